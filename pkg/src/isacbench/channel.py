"""Multi-target delay/Doppler channel, calibrated AWGN, target sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, RadioConfig
from .radio_frame import BasebandSignal


@dataclass
class Target:
    """Point scatterer at range r (m) moving radially at v (m/s)."""

    range_m: float
    radial_velocity_mps: float
    reflection_coeff: complex = 1.0 + 0j

    def __post_init__(self):
        if self.range_m < 0:
            raise ValueError("range_m must be >= 0")

    @property
    def delay_s(self) -> float:
        return 2.0 * self.range_m / SPEED_OF_LIGHT

    def doppler_hz(self, carrier_freq_hz: float) -> float:
        return 2.0 * self.radial_velocity_mps * carrier_freq_hz / SPEED_OF_LIGHT


@dataclass
class TargetSamplingSpec:
    """Random target-set description for Monte Carlo trials.

    count is either a fixed integer or a (low, high) inclusive tuple for a
    uniform integer draw. Reflection magnitudes follow a Rice law by default;
    path loss is deliberately not modeled.
    """

    count: object = (1, 15)
    range_bounds_m: tuple = (0.0, 78.0)
    velocity_bounds_mps: tuple = (-19.0, 19.0)
    magnitude_law: str = "rice"  # "rice" | "constant" | "loguniform"
    rice_k: float = 3.0
    rice_omega: float = 1.0
    mag_range_db: tuple = (-30.0, 0.0)  # loguniform power bounds
    min_spacing: tuple = (2.0, 2.0)  # (delta range m, delta velocity m/s)
    enforce_min_spacing: bool = True
    retry_budget: int = 1000

    def __post_init__(self):
        if self.range_bounds_m[0] > self.range_bounds_m[1]:
            raise ValueError("range bounds out of order")
        if self.velocity_bounds_mps[0] > self.velocity_bounds_mps[1]:
            raise ValueError("velocity bounds out of order")
        if self.rice_k < 0 or self.rice_omega <= 0:
            raise ValueError("need rice_k >= 0 and rice_omega > 0")
        if self.magnitude_law not in ("rice", "constant", "loguniform"):
            raise ValueError(f"unknown magnitude law {self.magnitude_law!r}")
        if self.mag_range_db[0] > self.mag_range_db[1]:
            raise ValueError("mag_range_db out of order")


def rice_magnitude(rng: np.random.Generator, k: float, omega: float, size=None):
    """Rice(K, Omega) draws with E[x^2] = Omega.

    Built from a complex Gaussian around a fixed line-of-sight component:
    nu^2 = K*Omega/(K+1), 2*sigma^2 = Omega/(K+1).
    """
    nu = np.sqrt(k * omega / (k + 1.0))
    sigma = np.sqrt(omega / (2.0 * (k + 1.0)))
    re = nu + sigma * rng.standard_normal(size)
    im = sigma * rng.standard_normal(size)
    return np.hypot(re, im)


def _too_close(r, v, placed, spacing):
    dr, dv = spacing
    for pr, pv in placed:
        if abs(r - pr) < dr and abs(v - pv) < dv:
            return True
    return False


def sample_targets(rng: np.random.Generator, spec: TargetSamplingSpec) -> list:
    """Sample a target set uniformly in the range/velocity box.

    Placement is sequential with rejection resampling against min_spacing;
    a pair conflicts only when it is too close in range AND velocity.
    """
    if isinstance(spec.count, int):
        count = spec.count
    else:
        lo, hi = spec.count
        count = int(rng.integers(lo, hi + 1))
    if count == 0:
        return []

    r_lo, r_hi = spec.range_bounds_m
    v_lo, v_hi = spec.velocity_bounds_mps
    placed = []
    retries = 0
    while len(placed) < count:
        r = rng.uniform(r_lo, r_hi)
        v = rng.uniform(v_lo, v_hi)
        if spec.enforce_min_spacing and _too_close(r, v, placed, spec.min_spacing):
            retries += 1
            if retries > spec.retry_budget:
                raise RuntimeError(
                    f"could not place {count} targets with spacing "
                    f"{spec.min_spacing} in the box after {spec.retry_budget} retries"
                )
            continue
        placed.append((r, v))

    if spec.magnitude_law == "rice":
        mags = rice_magnitude(rng, spec.rice_k, spec.rice_omega, size=count)
    elif spec.magnitude_law == "loguniform":
        # Power uniform in dB: spans a controlled dynamic range, useful for
        # probing sensitivity to the image noise floor.
        lo, hi = spec.mag_range_db
        mags = 10 ** (rng.uniform(lo, hi, size=count) / 20.0)
    else:
        mags = np.ones(count)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return [
        Target(range_m=r, radial_velocity_mps=v, reflection_coeff=m * np.exp(1j * p))
        for (r, v), m, p in zip(placed, mags, phases)
    ]


def apply_channel(
    x: BasebandSignal, targets: list, cfg: RadioConfig
) -> BasebandSignal:
    """Superpose delayed, Doppler-shifted copies of x, one per target.

    Delays are rounded to the nearest upsampled sample period; Doppler is a
    per-sample phasor at the upsampled rate. No noise is added here. The
    output is extended by the largest delay so no reflection is truncated.
    """
    fs = x.sample_rate_hz
    n_in = len(x.samples)
    delays = []
    for t in targets:
        d = int(round(t.delay_s * fs))
        if d > n_in:
            raise ValueError(f"target delay {t.delay_s:.3e}s exceeds signal duration")
        delays.append(d)

    max_d = max(delays, default=0)
    out = np.zeros(n_in + max_d, dtype=complex)
    for t, d in zip(targets, delays):
        fd = t.doppler_hz(cfg.carrier_freq_hz)
        n = np.arange(d, d + n_in)
        out[d : d + n_in] += t.reflection_coeff * x.samples * np.exp(
            2j * np.pi * fd * n / fs
        )
    return BasebandSignal(samples=out, sample_rate_hz=fs, origin=x.origin)


TARGETS_CSV_HEADER = "range_m,velocity_mps,alpha_re,alpha_im"


def write_targets(targets: list, path) -> None:
    with open(path, "w") as fh:
        fh.write(TARGETS_CSV_HEADER + "\n")
        for t in targets:
            a = complex(t.reflection_coeff)
            fh.write(
                f"{t.range_m:.9g},{t.radial_velocity_mps:.9g},{a.real:.9g},{a.imag:.9g}\n"
            )


def read_targets(path) -> list:
    targets = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != TARGETS_CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            r, v, re, im = (float(x) for x in line.split(","))
            targets.append(Target(r, v, complex(re, im)))
    return targets


def add_awgn(
    r: BasebandSignal, snr_db: float, rng: np.random.Generator
) -> BasebandSignal:
    """Add circular complex Gaussian noise calibrated to the signal power.

    The per-sample noise variance is P_s * 10^(-snr/10) with P_s the measured
    mean |sample|^2. Because pulse shaping preserves mean power, this matches
    the per-complex-symbol SNR over the whole bandwidth at the base rate.
    """
    if np.isinf(snr_db):
        return r
    p_s = float(np.mean(np.abs(r.samples) ** 2))
    if p_s == 0.0:
        raise ValueError("cannot calibrate noise against an all-zero signal")
    p_n = p_s * 10 ** (-snr_db / 10.0)
    noise = np.sqrt(p_n / 2.0) * (
        rng.standard_normal(len(r.samples)) + 1j * rng.standard_normal(len(r.samples))
    )
    return BasebandSignal(
        samples=r.samples + noise, sample_rate_hz=r.sample_rate_hz, origin=r.origin
    )
