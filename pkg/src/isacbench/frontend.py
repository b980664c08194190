"""Analog front-end models: SRRC shaping, PA nonlinearity, quantization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .radio_frame import BasebandSignal


@dataclass
class SrrcFilter:
    """Unit-energy square-root raised cosine filter.

    span_symbols is one-sided, in base-rate sample periods; the tap vector has
    2 * span * L + 1 entries spaced at the upsampled rate.
    """

    rolloff: float
    span_symbols: int
    upsampling_factor: int
    taps: np.ndarray = field(repr=False)

    @property
    def group_delay_samples(self) -> int:
        return self.span_symbols * self.upsampling_factor


def srrc_taps(rolloff: float, span: int = 16, upsampling_factor: int = 8) -> SrrcFilter:
    """Sample the SRRC impulse response and normalize it to unit energy.

    The singular points t = 0 and |t| = 1/(4*beta) are replaced by their
    analytic limits.
    """
    beta = rolloff
    if not 0.0 < beta <= 1.0:
        raise ValueError("rolloff must be in (0, 1]")
    if span < 4:
        raise ValueError("span must be >= 4 symbol periods")
    L = int(upsampling_factor)
    if L < 1:
        raise ValueError("upsampling_factor must be >= 1")

    n = np.arange(-span * L, span * L + 1)
    t = n / L  # in base-rate symbol periods
    h = np.empty_like(t)

    at_zero = n == 0
    at_sing = np.isclose(np.abs(t), 1.0 / (4.0 * beta))
    regular = ~(at_zero | at_sing)

    tr = t[regular]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1 - (4 * beta * tr) ** 2)
    h[regular] = num / den
    h[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    h[at_sing] = (beta / np.sqrt(2.0)) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
        + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
    )

    h /= np.sqrt(np.sum(h**2))
    return SrrcFilter(rolloff=beta, span_symbols=span, upsampling_factor=L, taps=h)


def pulse_shape(s: BasebandSignal, f: SrrcFilter) -> BasebandSignal:
    """Zero-stuff by L, convolve with the SRRC taps, scale by sqrt(L).

    The sqrt(L) factor keeps per-symbol energy equal to the base-rate stream,
    so mean power is preserved across the rate change.
    """
    if s.origin != "base":
        raise ValueError("pulse_shape expects a base-rate signal")
    L = f.upsampling_factor
    up = np.zeros(len(s.samples) * L, dtype=complex)
    up[::L] = s.samples
    out = fftconvolve(up, f.taps) * np.sqrt(L)
    return BasebandSignal(
        samples=out, sample_rate_hz=s.sample_rate_hz * L, origin="upsampled"
    )


@dataclass
class PaModel:
    """Saturating power amplifier: amplitude through tanh, phase untouched."""

    saturation_amplitude: float = 1.0
    enabled: bool = True

    def __post_init__(self):
        if self.saturation_amplitude <= 0:
            raise ValueError("saturation_amplitude must be positive")

    @classmethod
    def from_input_backoff(cls, signal: np.ndarray, ibo_db: float) -> "PaModel":
        """Set A_sat so that A_sat^2 = P_in * 10^(IBO/10) for this signal."""
        p_in = float(np.mean(np.abs(signal) ** 2))
        if p_in <= 0:
            raise ValueError("cannot derive drive level from an all-zero signal")
        return cls(saturation_amplitude=float(np.sqrt(p_in * 10 ** (ibo_db / 10.0))))


def pa_apply(x: BasebandSignal, pa: PaModel) -> BasebandSignal:
    """y = A_sat * tanh(|x| / A_sat) * exp(j * angle(x))."""
    if not pa.enabled:
        return x
    a = pa.saturation_amplitude
    mag = np.abs(x.samples)
    out = np.zeros_like(x.samples)
    nz = mag > 0
    out[nz] = a * np.tanh(mag[nz] / a) * (x.samples[nz] / mag[nz])
    return BasebandSignal(samples=out, sample_rate_hz=x.sample_rate_hz, origin=x.origin)


def matched_filter_downsample(r: BasebandSignal, f: SrrcFilter) -> BasebandSignal:
    """Matched-filter with the (real, symmetric) SRRC taps and decimate by L.

    Compensates the cascaded group delay of 2 * span * L taps so that output
    sample k lines up with the k-th base-rate sample of the shaped stream, and
    scales by 1/sqrt(L) so the shape -> matched-filter loopback is identity.
    """
    if r.origin != "upsampled":
        raise ValueError("matched_filter_downsample expects an upsampled signal")
    L = f.upsampling_factor
    delay = 2 * f.group_delay_samples
    out = fftconvolve(r.samples, f.taps) / np.sqrt(L)
    if len(out) <= delay:
        raise ValueError("input shorter than the filter transient")
    base = out[delay::L]
    return BasebandSignal(
        samples=base, sample_rate_hz=r.sample_rate_hz / L, origin="base"
    )


@dataclass
class QuantizerConfig:
    """Uniform midrise quantizer with `bits` bits per real component."""

    bits: int = 64
    enabled: bool = True

    def __post_init__(self):
        if not 1 <= self.bits <= 64:
            raise ValueError("bits must be in [1, 64]")


def quantize(y: BasebandSignal, q: QuantizerConfig) -> BasebandSignal:
    """Quantize real and imaginary parts over [-F, F], F = per-block peak.

    Values map to level centers of a 2^Q-level midrise grid. Q = 64 (or a
    disabled config) is an exact pass-through.
    """
    if not q.enabled or q.bits >= 64:
        return y
    full_scale = float(max(np.max(np.abs(y.samples.real)), np.max(np.abs(y.samples.imag))))
    if full_scale == 0.0:
        return y
    step = 2.0 * full_scale / (2.0**q.bits)
    top = full_scale - step / 2.0

    def _q(v):
        return np.clip((np.floor(v / step) + 0.5) * step, -top, top)

    out = _q(y.samples.real) + 1j * _q(y.samples.imag)
    return BasebandSignal(samples=out, sample_rate_hz=y.sample_rate_hz, origin=y.origin)
