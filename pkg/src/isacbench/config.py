"""Radio configuration and presets."""

from __future__ import annotations

from dataclasses import dataclass, replace

SPEED_OF_LIGHT = 2.99792458e8

SUPPORTED_MODULATIONS = ("qpsk", "qam256")


@dataclass(frozen=True)
class RadioConfig:
    """OFDM radio parameters.

    The symbol time T is always 1 / subcarrier_spacing_hz and is never stored
    independently. cp_len_samples counts base-rate samples (rate N * delta_f).
    """

    carrier_freq_hz: float = 28.0e9
    num_subcarriers: int = 256
    subcarrier_spacing_hz: float = 120e3
    num_symbols: int = 64
    cp_len_samples: int = 23
    upsampling_factor: int = 8
    modulation: str = "qpsk"

    def __post_init__(self):
        if self.num_subcarriers < 1 or self.num_symbols < 1:
            raise ValueError("num_subcarriers and num_symbols must be >= 1")
        if self.upsampling_factor < 1:
            raise ValueError("upsampling_factor must be >= 1")
        if not 0 <= self.cp_len_samples < self.num_subcarriers:
            raise ValueError("cp_len_samples must satisfy 0 <= cp < N")
        if self.subcarrier_spacing_hz <= 0 or self.carrier_freq_hz <= 0:
            raise ValueError("frequencies must be positive")
        if self.modulation not in SUPPORTED_MODULATIONS:
            raise ValueError(f"unsupported modulation {self.modulation!r}")

    @property
    def symbol_time_s(self) -> float:
        return 1.0 / self.subcarrier_spacing_hz

    @property
    def cp_time_s(self) -> float:
        return self.cp_len_samples / self.base_rate_hz

    @property
    def total_symbol_time_s(self) -> float:
        """Duration of one OFDM symbol including its cyclic prefix."""
        return self.symbol_time_s + self.cp_time_s

    @property
    def bandwidth_hz(self) -> float:
        return self.num_subcarriers * self.subcarrier_spacing_hz

    @property
    def base_rate_hz(self) -> float:
        return self.bandwidth_hz

    @property
    def upsampled_rate_hz(self) -> float:
        return self.base_rate_hz * self.upsampling_factor

    @property
    def range_resolution_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def velocity_resolution_mps(self) -> float:
        return SPEED_OF_LIGHT / (
            2.0 * self.carrier_freq_hz * self.total_symbol_time_s * self.num_symbols
        )

    def with_modulation(self, modulation: str) -> "RadioConfig":
        return replace(self, modulation=modulation)


# Desk-scale default: small enough for interactive runs and the test suite.
DESK = RadioConfig()

# Full-scale cellular configuration: 190.08 MHz over 1584 subcarriers at
# 120 kHz spacing, 1120 symbols per frame. The standard CP of 0.59 us equals
# 112 samples at the 190.08 MHz base rate (it is quoted as 144 samples at the
# numerology-native 2048-point FFT rate).
TABLE2 = RadioConfig(
    num_subcarriers=1584,
    num_symbols=1120,
    cp_len_samples=112,
)

PRESETS = {"desk": DESK, "table2": TABLE2}


def radio_from_dict(d: dict) -> RadioConfig:
    """Build a RadioConfig from a config-file mapping.

    A 'preset' key selects a base preset; any remaining keys override its
    fields.
    """
    d = dict(d or {})
    base = PRESETS[d.pop("preset", "desk")]
    if not d:
        return base
    return replace(base, **d)
