"""CFAR detector family: global threshold, CA, censored (CS), and OS variants.

All detectors run on linear power images. Sliding-window statistics are
computed with 2D convolutions; edges are circular along the Doppler axis
(physically circular) and clamped (edge-replicated) along the range axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import convolve2d

from .periodogram import Periodogram


@dataclass(frozen=True)
class Detection:
    row: int
    col: int
    power: float
    range_m: float
    velocity_mps: float


@dataclass(frozen=True)
class CfarConfig:
    """CFAR window geometry and thresholding parameters.

    The reference band is the box of half-extents `reference` minus the guard
    box of half-extents `guard` (which contains the CUT). censor_strongest /
    censor_weakest count reference cells when num_subwindows == 0 and
    sub-window means when num_subwindows > 0.
    """

    pfa: float = 1e-4
    guard: tuple = (2, 2)
    reference: tuple = (6, 6)
    censor_strongest: int = 0
    censor_weakest: int = 0
    num_subwindows: int = 0
    os_rank: int | None = None

    def __post_init__(self):
        if not 0.0 < self.pfa < 1.0:
            raise ValueError("pfa must be in (0, 1)")
        for g, w in zip(self.guard, self.reference):
            if g < 0 or w <= g:
                raise ValueError("need reference > guard >= 0 per axis")
        if self.censor_strongest < 0 or self.censor_weakest < 0:
            raise ValueError("censor counts must be >= 0")
        if self.num_subwindows < 0:
            raise ValueError("num_subwindows must be >= 0")
        n_stats = self.num_subwindows if self.num_subwindows > 0 else self.num_reference_cells
        if self.censor_strongest + self.censor_weakest >= n_stats:
            raise ValueError("censoring would discard every reference statistic")
        if self.os_rank is not None and not 0 <= self.os_rank < n_stats:
            raise ValueError("os_rank out of range")

    @property
    def num_reference_cells(self) -> int:
        wr, wd = self.reference
        gr, gd = self.guard
        return (2 * wr + 1) * (2 * wd + 1) - (2 * gr + 1) * (2 * gd + 1)

    def reference_mask(self) -> np.ndarray:
        wr, wd = self.reference
        gr, gd = self.guard
        mask = np.ones((2 * wr + 1, 2 * wd + 1), dtype=bool)
        mask[wr - gr : wr + gr + 1, wd - gd : wd + gd + 1] = False
        return mask


def threshold_factor(num_reference: int, pfa: float):
    """Eq.-style CA-CFAR multiplier R * (pfa^(-1/R) - 1) on the noise mean."""
    R = np.asarray(num_reference, dtype=float)
    if np.any(R < 1):
        raise ValueError("reference count must be >= 1")
    if not 0.0 < pfa < 1.0:
        raise ValueError("pfa must be in (0, 1)")
    out = R * (pfa ** (-1.0 / R) - 1.0)
    return float(out) if np.isscalar(num_reference) else out


def os_threshold_factor(num_reference: int, rank: int, pfa: float) -> float:
    """Exact multiplier for thresholding on one order statistic.

    For the rank-th smallest of R exponential reference samples (0-based),
    the false-alarm probability of eta = alpha * x_(rank) is
    prod_{m=R-rank}^{R} m / (m + alpha); solve that for alpha. The naive
    "R_eff = 1" plug-in of the CA formula overshoots by orders of magnitude.
    """
    R = int(num_reference)
    if not 0 <= rank < R:
        raise ValueError("rank out of range")
    if not 0.0 < pfa < 1.0:
        raise ValueError("pfa must be in (0, 1)")
    m = np.arange(R - rank, R + 1, dtype=float)

    def log_pfa(alpha):
        return np.sum(np.log(m) - np.log(m + alpha)) - np.log(pfa)

    from scipy.optimize import brentq

    return float(brentq(log_pfa, 1e-12, 1e12, xtol=1e-12, rtol=1e-14))


def _pad_image(S: np.ndarray, pad_rows: int, pad_cols: int) -> np.ndarray:
    """Range axis (rows) edge-replicated, Doppler axis (cols) wrapped."""
    padded = np.pad(S, ((pad_rows, pad_rows), (0, 0)), mode="edge")
    return np.pad(padded, ((0, 0), (pad_cols, pad_cols)), mode="wrap")


def ca_noise_estimate(S: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Per-CUT mean of the reference cells via one 2D convolution."""
    wr, wd = cfg.reference
    if S.shape[0] <= 2 * wr or S.shape[1] <= 2 * wd:
        raise ValueError("CFAR window exceeds image size")
    kernel = cfg.reference_mask().astype(float)
    padded = _pad_image(S, wr, wd)
    sums = convolve2d(padded, kernel, mode="valid")
    return sums / cfg.num_reference_cells


def ca_exceedance_mask(S: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Boolean pre-clustering exceedance map of CA-CFAR."""
    noise = ca_noise_estimate(S, cfg)
    factor = threshold_factor(cfg.num_reference_cells, cfg.pfa)
    return S > factor * noise


def global_exceedance_mask(S: np.ndarray, pfa: float, noise_power: float) -> np.ndarray:
    """Fixed threshold eta = noise_power * ln(1/pfa) over the whole image."""
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    return S > noise_power * np.log(1.0 / pfa)


def estimate_noise_power(S: np.ndarray) -> float:
    """Robust noise-floor estimate: median over bins of an exponential field
    has mean sigma^2 * ln 2."""
    return float(np.median(S)) / np.log(2.0)


def _split_reference_mask(mask: np.ndarray, k: int) -> list:
    """Partition the reference ring into k angularly contiguous sub-masks."""
    rows, cols = np.nonzero(mask)
    cr = (mask.shape[0] - 1) / 2.0
    cc = (mask.shape[1] - 1) / 2.0
    angles = np.arctan2(rows - cr, cols - cc)
    order = np.lexsort((cols, rows, angles))
    groups = np.array_split(order, k)
    out = []
    for g in groups:
        if len(g) == 0:
            raise ValueError(f"cannot split {mask.sum()} reference cells into {k} sub-windows")
        sub = np.zeros_like(mask)
        sub[rows[g], cols[g]] = True
        out.append(sub)
    return out


def _robust_threshold_subwindows(S: np.ndarray, cfg: CfarConfig):
    """K-convolution fast path: censor/order over sub-window means."""
    wr, wd = cfg.reference
    k = cfg.num_subwindows
    padded = _pad_image(S, wr, wd)
    submasks = _split_reference_mask(cfg.reference_mask(), k)
    counts = np.array([m.sum() for m in submasks], dtype=float)
    means = np.stack(
        [convolve2d(padded, m.astype(float), mode="valid") / c
         for m, c in zip(submasks, counts)],
        axis=-1,
    )
    order = np.argsort(means, axis=-1, kind="stable")
    sorted_means = np.take_along_axis(means, order, axis=-1)
    sorted_counts = counts[order]
    lo, hi = cfg.censor_weakest, k - cfg.censor_strongest
    kept_m = sorted_means[..., lo:hi]
    kept_c = sorted_counts[..., lo:hi]
    r_eff = kept_c.sum(axis=-1)
    sigma2 = (kept_m * kept_c).sum(axis=-1) / r_eff
    return threshold_factor(r_eff, cfg.pfa) * sigma2


def _robust_threshold_exact(S: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Exact per-CUT sorting of all reference samples (chunked over rows)."""
    wr, wd = cfg.reference
    mask = cfg.reference_mask()
    R = cfg.num_reference_cells
    r_s, r_l = cfg.censor_strongest, cfg.censor_weakest
    if cfg.os_rank is not None:
        r_l, r_s = cfg.os_rank, R - 1 - cfg.os_rank
    r_eff = R - r_s - r_l
    if r_eff == 1:
        # Pure order statistic: use the exact false-alarm relation.
        factor = os_threshold_factor(R, r_l, cfg.pfa)
    else:
        factor = threshold_factor(r_eff, cfg.pfa)

    padded = _pad_image(S, wr, wd)
    n_rows, n_cols = S.shape
    chunk = max(1, int(4_000_000 // max(1, n_cols * R)))
    thr = np.empty_like(S)
    for start in range(0, n_rows, chunk):
        stop = min(start + chunk, n_rows)
        view = sliding_window_view(
            padded[start : stop + 2 * wr, :], (2 * wr + 1, 2 * wd + 1)
        )
        ref = np.sort(view[:, :, mask], axis=-1)
        sigma2 = ref[:, :, r_l : R - r_s].mean(axis=-1)
        thr[start:stop, :] = factor * sigma2
    return thr


def robust_exceedance_mask(S: np.ndarray, cfg: CfarConfig) -> np.ndarray:
    """Pre-clustering exceedance map of the censored / ordered-statistic CFAR."""
    no_censoring = (
        cfg.censor_strongest == 0 and cfg.censor_weakest == 0 and cfg.os_rank is None
    )
    if no_censoring and cfg.num_subwindows == 0:
        # Degenerates to CA; reuse its convolution path bit-exactly.
        return ca_exceedance_mask(S, cfg)
    if cfg.num_subwindows > 0:
        if cfg.os_rank is not None:
            raise ValueError("os_rank is only supported on the exact (K = 0) path")
        thr = _robust_threshold_subwindows(S, cfg)
    else:
        thr = _robust_threshold_exact(S, cfg)
    return S > thr


_NEIGHBOR_OFFSETS = [
    (dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)
]


def extract_peaks(mask: np.ndarray, p: Periodogram) -> list:
    """Keep masked bins that are strict 3x3 local maxima of the image.

    Ties on equal neighbors break toward the lowest (row, col) index: equality
    with a lexicographically later neighbor is allowed, with an earlier one is
    not. Neighborhoods wrap on the Doppler axis; beyond the range edges there
    are no competing cells (edge replication would alias each border cell onto
    itself and veto every peak in the first range bin).
    """
    S = p.power
    if mask.shape != S.shape:
        raise ValueError("mask and image shapes differ")
    padded = np.pad(S, ((1, 1), (0, 0)), mode="constant", constant_values=-np.inf)
    padded = np.pad(padded, ((0, 0), (1, 1)), mode="wrap")
    keep = mask.copy()
    for dr, dc in _NEIGHBOR_OFFSETS:
        nb = padded[1 + dr : 1 + dr + S.shape[0], 1 + dc : 1 + dc + S.shape[1]]
        if (dr, dc) > (0, 0):
            keep &= S >= nb
        else:
            keep &= S > nb
    rows, cols = np.nonzero(keep)
    return [
        Detection(
            row=int(r),
            col=int(c),
            power=float(S[r, c]),
            range_m=p.range_of_row(int(r)),
            velocity_mps=p.velocity_of_col(int(c)),
        )
        for r, c in zip(rows, cols)
    ]


def detect_global(p: Periodogram, pfa: float, noise_power: float) -> list:
    """Plain fixed-threshold detector (lower bound on missed detections)."""
    return extract_peaks(global_exceedance_mask(p.power, pfa, noise_power), p)


def detect_ca(p: Periodogram, cfg: CfarConfig) -> list:
    return extract_peaks(ca_exceedance_mask(p.power, cfg), p)


def detect_robust(p: Periodogram, cfg: CfarConfig) -> list:
    return extract_peaks(robust_exceedance_mask(p.power, cfg), p)


DETECTION_CSV_HEADER = "row,col,power,range_m,velocity_mps"


def write_detections(dets: list, path) -> None:
    with open(path, "w") as fh:
        fh.write(DETECTION_CSV_HEADER + "\n")
        for d in dets:
            fh.write(
                f"{d.row},{d.col},{d.power:.9g},{d.range_m:.9g},{d.velocity_mps:.9g}\n"
            )


def read_detections(path) -> list:
    dets = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != DETECTION_CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row, col, power, rng_m, vel = line.split(",")
            dets.append(
                Detection(
                    row=int(row),
                    col=int(col),
                    power=float(power),
                    range_m=float(rng_m),
                    velocity_mps=float(vel),
                )
            )
    return dets
