"""OFDM frame generation and (de)modulation with cyclic prefix handling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RadioConfig

# 256-QAM per-axis levels {-15, -13, ..., 15}; mean symbol power of the full
# grid is 170, so dividing by sqrt(170) gives unit average power.
_QAM256_LEVELS = np.arange(-15, 16, 2, dtype=float)
_QAM256_NORM = np.sqrt(170.0)


@dataclass
class Frame:
    """Transmitted constellation grid X, shape (N, M)."""

    symbols: np.ndarray
    modulation: str

    @property
    def num_subcarriers(self) -> int:
        return self.symbols.shape[0]

    @property
    def num_symbols(self) -> int:
        return self.symbols.shape[1]


@dataclass
class BasebandSignal:
    """Complex sample stream tagged with its rate and origin."""

    samples: np.ndarray
    sample_rate_hz: float
    origin: str = "base"  # "base" | "upsampled"

    def __len__(self) -> int:
        return len(self.samples)


def generate_frame(rng: np.random.Generator, cfg: RadioConfig) -> Frame:
    """Draw an N x M frame of i.i.d. uniform constellation symbols.

    Constellations are normalized to unit average power.
    """
    shape = (cfg.num_subcarriers, cfg.num_symbols)
    if cfg.modulation == "qpsk":
        re = rng.integers(0, 2, size=shape) * 2 - 1
        im = rng.integers(0, 2, size=shape) * 2 - 1
        symbols = (re + 1j * im) / np.sqrt(2.0)
    elif cfg.modulation == "qam256":
        re = _QAM256_LEVELS[rng.integers(0, 16, size=shape)]
        im = _QAM256_LEVELS[rng.integers(0, 16, size=shape)]
        symbols = (re + 1j * im) / _QAM256_NORM
    else:
        raise ValueError(f"unsupported modulation {cfg.modulation!r}")
    return Frame(symbols=symbols.astype(np.complex128), modulation=cfg.modulation)


def ofdm_modulate(frame: Frame, cfg: RadioConfig) -> BasebandSignal:
    """IDFT each symbol (with 1/N scaling) and prepend its cyclic prefix.

    Output is the concatenation of M blocks of length N + cp at the base rate.
    """
    X = frame.symbols
    if X.shape != (cfg.num_subcarriers, cfg.num_symbols):
        raise ValueError(
            f"frame shape {X.shape} does not match config "
            f"({cfg.num_subcarriers}, {cfg.num_symbols})"
        )
    body = np.fft.ifft(X, axis=0)  # numpy ifft carries the 1/N factor
    cp = cfg.cp_len_samples
    if cp > 0:
        blocks = np.concatenate([body[-cp:, :], body], axis=0)
    else:
        blocks = body
    samples = blocks.T.reshape(-1)
    return BasebandSignal(samples=samples, sample_rate_hz=cfg.base_rate_hz, origin="base")


def ofdm_demodulate(y: BasebandSignal, cfg: RadioConfig) -> np.ndarray:
    """Strip the CP of every symbol and DFT along the subcarriers (no 1/N)."""
    N, M, cp = cfg.num_subcarriers, cfg.num_symbols, cfg.cp_len_samples
    expected = M * (N + cp)
    if len(y.samples) != expected:
        raise ValueError(f"expected {expected} base-rate samples, got {len(y.samples)}")
    blocks = y.samples.reshape(M, N + cp)
    body = blocks[:, cp:]
    return np.fft.fft(body, axis=1).T  # shape (N, M)
