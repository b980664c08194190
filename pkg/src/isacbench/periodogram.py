"""Window tapers and the zero-padded range/Doppler periodogram."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.signal import windows as _sswin

from .config import SPEED_OF_LIGHT, RadioConfig
from .csi import CsiMatrix

PERIODOGRAM_MAGIC = b"ISACPER1"


@dataclass(frozen=True)
class WindowSpec:
    """Taper selector: rectangular, hann, chebyshev, or a single DPSS order."""

    kind: str
    attenuation_db: float = 80.0  # chebyshev
    time_halfbandwidth: float = 3.5  # dpss NW
    order_index: int = 0  # dpss

    def __post_init__(self):
        if self.kind not in ("rectangular", "hann", "chebyshev", "dpss"):
            raise ValueError(f"unsupported window kind {self.kind!r}")
        if self.attenuation_db <= 0 or self.time_halfbandwidth <= 0:
            raise ValueError("window parameters must be positive")
        if self.order_index < 0:
            raise ValueError("order_index must be >= 0")

    @property
    def label(self) -> str:
        if self.kind == "chebyshev":
            return f"chebyshev{self.attenuation_db:g}"
        if self.kind == "dpss":
            return f"dpss{self.time_halfbandwidth:g}.{self.order_index}"
        return self.kind

    @classmethod
    def parse(cls, name: str) -> "WindowSpec":
        """Parse names like 'hann', 'chebyshev:80', 'dpss:3.5:1'."""
        parts = name.lower().split(":")
        kind = parts[0]
        if kind in ("rect", "rectangular"):
            return cls("rectangular")
        if kind == "hann":
            return cls("hann")
        if kind in ("chebyshev", "cheb"):
            at = float(parts[1]) if len(parts) > 1 else 80.0
            return cls("chebyshev", attenuation_db=at)
        if kind == "dpss":
            nw = float(parts[1]) if len(parts) > 1 else 3.5
            order = int(parts[2]) if len(parts) > 2 else 0
            return cls("dpss", time_halfbandwidth=nw, order_index=order)
        raise ValueError(f"cannot parse window name {name!r}")


def _dpss_taper(length: int, nw: float, order: int) -> np.ndarray:
    """Slepian sequence from the symmetric tridiagonal eigenproblem.

    Returns the unit-norm eigenvector of the (order+1)-th largest eigenvalue,
    sign-fixed so the leading half sums positive.
    """
    if order >= length:
        raise ValueError("order_index must be < length")
    w = nw / length
    n = np.arange(length)
    diag = ((length - 1 - 2 * n) / 2.0) ** 2 * np.cos(2 * np.pi * w)
    off = n[1:] * (length - n[1:]) / 2.0
    idx = length - 1 - order
    _, vec = eigh_tridiagonal(diag, off, select="i", select_range=(idx, idx))
    vec = vec[:, 0]
    s = vec.sum()
    if abs(s) < 1e-9:
        s = vec[: length // 2].sum()
    if s < 0:
        vec = -vec
    return vec


def make_window(spec: WindowSpec, length: int) -> np.ndarray:
    """Symmetric taper of the given length, peak-normalized to 1."""
    if length < 2:
        raise ValueError("window length must be >= 2")
    if spec.kind == "rectangular":
        return np.ones(length)
    if spec.kind == "hann":
        return _sswin.hann(length, sym=True)
    if spec.kind == "chebyshev":
        return _sswin.chebwin(length, at=spec.attenuation_db, sym=True)
    if spec.kind == "dpss":
        vec = _dpss_taper(length, spec.time_halfbandwidth, spec.order_index)
        return vec / np.max(np.abs(vec))
    raise ValueError(f"unsupported window kind {spec.kind!r}")


def apply_window(H: CsiMatrix, w_rows: np.ndarray, w_cols: np.ndarray) -> CsiMatrix:
    """Separable 2D windowing: H'[n, m] = H[n, m] * w_rows[n] * w_cols[m]."""
    N, M = H.values.shape
    if len(w_rows) != N or len(w_cols) != M:
        raise ValueError(
            f"window lengths ({len(w_rows)}, {len(w_cols)}) do not match CSI ({N}, {M})"
        )
    values = H.values * np.outer(w_rows, w_cols)
    return CsiMatrix(values=values, cfg=H.cfg, provenance=H.provenance)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


@dataclass
class Periodogram:
    """Real power image S with physical axis mapping.

    Rows are range bins (one-sided, starting at 0 m); columns are velocity
    bins, circularly shifted so zero velocity sits at column M'//2.
    """

    power: np.ndarray
    range_per_bin_m: float
    velocity_per_bin_mps: float
    velocity_offset_mps: float = field(default=0.0)

    @property
    def shape(self):
        return self.power.shape

    def range_of_row(self, row) -> float:
        return row * self.range_per_bin_m

    def velocity_of_col(self, col) -> float:
        return self.velocity_offset_mps + col * self.velocity_per_bin_mps


def compute_periodogram(Hw: CsiMatrix) -> Periodogram:
    """Zero-pad to powers of two, DFT over symbols, IDFT over subcarriers.

    S = |N' * ifft_rows(fft_cols(H_padded))|^2 / (N' M'), then the Doppler
    axis is fftshift-centered.
    """
    cfg = Hw.cfg
    N, M = Hw.values.shape
    Np, Mp = _next_pow2(N), _next_pow2(M)
    padded = np.zeros((Np, Mp), dtype=complex)
    padded[:N, :M] = Hw.values
    spec = np.fft.ifft(np.fft.fft(padded, axis=1), axis=0) * Np
    S = np.abs(spec) ** 2 / (Np * Mp)
    S = np.fft.fftshift(S, axes=1)

    range_per_bin = SPEED_OF_LIGHT / (2.0 * cfg.subcarrier_spacing_hz * Np)
    velocity_per_bin = SPEED_OF_LIGHT / (
        2.0 * cfg.carrier_freq_hz * cfg.total_symbol_time_s * Mp
    )
    return Periodogram(
        power=S,
        range_per_bin_m=range_per_bin,
        velocity_per_bin_mps=velocity_per_bin,
        velocity_offset_mps=-(Mp // 2) * velocity_per_bin,
    )


# Multi-window preprocessing stack: rectangular, Hann, and three same-NW DPSS
# orders (orders of one concentration problem are mutually orthogonal).
STACK_WINDOWS = (
    WindowSpec("rectangular"),
    WindowSpec("hann"),
    WindowSpec("dpss", time_halfbandwidth=3.5, order_index=0),
    WindowSpec("dpss", time_halfbandwidth=3.5, order_index=1),
    WindowSpec("dpss", time_halfbandwidth=3.5, order_index=2),
)


def multi_window_stack(H: CsiMatrix, specs=STACK_WINDOWS) -> list:
    """Periodograms of H under each stack window (default 5 channels)."""
    N, M = H.values.shape
    out = []
    for spec in specs:
        w_rows = make_window(spec, N)
        w_cols = make_window(spec, M)
        out.append(compute_periodogram(apply_window(H, w_rows, w_cols)))
    return out


def save_periodogram(p: Periodogram, path) -> None:
    """magic + u32 N' + u32 M' + float32 row-major + 3 float64 axis block."""
    Np, Mp = p.power.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<8sII", PERIODOGRAM_MAGIC, Np, Mp))
        fh.write(np.ascontiguousarray(p.power, dtype=np.float32).tobytes())
        fh.write(
            struct.pack(
                "<3d", p.range_per_bin_m, p.velocity_per_bin_mps, p.velocity_offset_mps
            )
        )


def load_periodogram(path) -> Periodogram:
    with open(path, "rb") as fh:
        magic, Np, Mp = struct.unpack("<8sII", fh.read(16))
        if magic != PERIODOGRAM_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = np.frombuffer(fh.read(4 * Np * Mp), dtype=np.float32)
        rpb, vpb, voff = struct.unpack("<3d", fh.read(24))
    if data.size != Np * Mp:
        raise ValueError(f"{path}: truncated payload")
    return Periodogram(
        power=data.reshape(Np, Mp).astype(np.float64),
        range_per_bin_m=rpb,
        velocity_per_bin_mps=vpb,
        velocity_offset_mps=voff,
    )
