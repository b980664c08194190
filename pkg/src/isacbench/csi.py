"""CSI matrix extraction, the linear fast-path model, and binary I/O."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .config import RadioConfig
from .radio_frame import Frame

CSI_MAGIC = b"ISACCSI1"


@dataclass
class CsiMatrix:
    """Complex N x M channel matrix H."""

    values: np.ndarray
    cfg: RadioConfig
    provenance: str = "full-chain"  # "full-chain" | "linear"

    def __post_init__(self):
        expected = (self.cfg.num_subcarriers, self.cfg.num_symbols)
        if self.values.shape != expected:
            raise ValueError(f"CSI shape {self.values.shape} != {expected}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("CSI contains non-finite entries")


def extract_csi(Y: np.ndarray, frame: Frame, cfg: RadioConfig) -> CsiMatrix:
    """H = Y / X element-wise (the transmitted frame is known)."""
    X = frame.symbols
    if Y.shape != X.shape:
        raise ValueError(f"shape mismatch: Y {Y.shape} vs X {X.shape}")
    if np.any(X == 0):
        raise ValueError("frame contains zero symbols; cannot divide")
    return CsiMatrix(values=Y / X, cfg=cfg, provenance="full-chain")


def synthesize_csi(
    targets: list,
    snr_db: float,
    cfg: RadioConfig,
    rng: np.random.Generator | None = None,
) -> CsiMatrix:
    """Closed-form frequency-domain CSI for an ideal linear chain.

    H[n, m] = sum_p alpha_p * exp(-j 2 pi n df tau_p)
                          * exp(+j 2 pi f_Dp m T_tot) + w[n, m],
    with T_tot the CP-inclusive symbol duration and w complex Gaussian of
    variance 10^(-snr/10) (unit signal-power convention: |alpha| = 1 targets).
    """
    N, M = cfg.num_subcarriers, cfg.num_symbols
    n = np.arange(N)
    m = np.arange(M)
    H = np.zeros((N, M), dtype=complex)
    for t in targets:
        row = np.exp(-2j * np.pi * n * cfg.subcarrier_spacing_hz * t.delay_s)
        col = np.exp(
            2j * np.pi * t.doppler_hz(cfg.carrier_freq_hz) * m * cfg.total_symbol_time_s
        )
        H += t.reflection_coeff * np.outer(row, col)
    if not np.isinf(snr_db):
        if rng is None:
            raise ValueError("rng required for finite SNR")
        var = 10 ** (-snr_db / 10.0)
        H += np.sqrt(var / 2.0) * (
            rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))
        )
    return CsiMatrix(values=H, cfg=cfg, provenance="linear")


def save_csi(csi: CsiMatrix, path) -> None:
    """Write H as magic + u32 N + u32 M (LE) + row-major complex64."""
    N, M = csi.values.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<8sII", CSI_MAGIC, N, M))
        fh.write(np.ascontiguousarray(csi.values, dtype=np.complex64).tobytes())


def load_csi(path, cfg: RadioConfig) -> CsiMatrix:
    with open(path, "rb") as fh:
        magic, N, M = struct.unpack("<8sII", fh.read(16))
        if magic != CSI_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(8 * N * M), dtype=np.complex64)
    if data.size != N * M:
        raise ValueError(f"{path}: truncated payload")
    values = data.reshape(N, M).astype(np.complex128)
    return CsiMatrix(values=values, cfg=cfg, provenance="full-chain")
