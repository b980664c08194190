"""Full time-domain simulation chain from frame to CSI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import add_awgn, apply_channel
from .config import RadioConfig
from .csi import CsiMatrix, extract_csi
from .frontend import (
    PaModel,
    QuantizerConfig,
    SrrcFilter,
    matched_filter_downsample,
    pa_apply,
    pulse_shape,
    quantize,
    srrc_taps,
)
from .radio_frame import BasebandSignal, generate_frame, ofdm_demodulate, ofdm_modulate


@dataclass
class ImpairmentProfile:
    """Hardware impairment switchboard for the simulation chain."""

    name: str = "clean"
    pa_enabled: bool = False
    ibo_db: float = 0.0
    quantizer_bits: int = 64
    modulation: str = "qpsk"

    @classmethod
    def clean(cls) -> "ImpairmentProfile":
        return cls()

    @classmethod
    def impaired(cls) -> "ImpairmentProfile":
        """PA at 0 dB input back-off, 1-bit quantization, 256-QAM."""
        return cls(
            name="impaired",
            pa_enabled=True,
            ibo_db=0.0,
            quantizer_bits=1,
            modulation="qam256",
        )


PROFILES = {"clean": ImpairmentProfile.clean, "impaired": ImpairmentProfile.impaired}


def simulate_csi_full(
    targets: list,
    snr_db: float,
    cfg: RadioConfig,
    rng: np.random.Generator,
    profile: ImpairmentProfile | None = None,
    srrc: SrrcFilter | None = None,
    srrc_rolloff: float = 0.25,
    srrc_span: int = 16,
) -> CsiMatrix:
    """Run the complete TX -> channel -> RX chain and extract H.

    TX and RX power amplifiers share the saturation level, derived from the
    shaped TX signal via the profile's input back-off.
    """
    profile = profile or ImpairmentProfile.clean()
    cfg = cfg.with_modulation(profile.modulation)
    if srrc is None:
        srrc = srrc_taps(srrc_rolloff, srrc_span, cfg.upsampling_factor)

    frame = generate_frame(rng, cfg)
    base = ofdm_modulate(frame, cfg)
    shaped = pulse_shape(base, srrc)

    if profile.pa_enabled:
        pa = PaModel.from_input_backoff(shaped.samples, profile.ibo_db)
        shaped = pa_apply(shaped, pa)

    received = apply_channel(shaped, targets, cfg)
    received = add_awgn(received, snr_db, rng)

    if profile.pa_enabled:
        received = pa_apply(received, pa)

    bb = matched_filter_downsample(received, srrc)
    n_base = cfg.num_symbols * (cfg.num_subcarriers + cfg.cp_len_samples)
    if len(bb.samples) < n_base:
        raise ValueError("received stream too short after matched filtering")
    bb = BasebandSignal(
        samples=bb.samples[:n_base], sample_rate_hz=bb.sample_rate_hz, origin="base"
    )
    bb = quantize(bb, QuantizerConfig(bits=profile.quantizer_bits))

    Y = ofdm_demodulate(bb, cfg)
    return extract_csi(Y, frame, cfg)
