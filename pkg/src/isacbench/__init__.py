"""OFDM ISAC radar simulator and CFAR peak-detection benchmark."""

from .config import DESK, TABLE2, SPEED_OF_LIGHT, RadioConfig
from .radio_frame import BasebandSignal, Frame, generate_frame, ofdm_demodulate, ofdm_modulate
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
from .channel import (
    Target,
    TargetSamplingSpec,
    add_awgn,
    apply_channel,
    read_targets,
    rice_magnitude,
    sample_targets,
    write_targets,
)
from .csi import CsiMatrix, extract_csi, load_csi, save_csi, synthesize_csi
from .pipeline import PROFILES, ImpairmentProfile, simulate_csi_full
from .periodogram import (
    STACK_WINDOWS,
    Periodogram,
    WindowSpec,
    apply_window,
    compute_periodogram,
    load_periodogram,
    make_window,
    multi_window_stack,
    save_periodogram,
)
from .cfar import (
    CfarConfig,
    Detection,
    ca_exceedance_mask,
    detect_ca,
    detect_global,
    detect_robust,
    estimate_noise_power,
    extract_peaks,
    global_exceedance_mask,
    os_threshold_factor,
    read_detections,
    robust_exceedance_mask,
    threshold_factor,
    write_detections,
)
from .metrics import GATE_KAPPA, AssociationGate, TrialScore, associate, score_curve
from .bench import (
    BenchResult,
    DetectorSpec,
    ScenarioConfig,
    export_results,
    place_target_pair,
    run_noise_limited,
    run_resolution_limited,
    run_scenario,
    run_trial,
    trial_rng,
)

__version__ = "0.1.0"
