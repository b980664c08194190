import numpy as np
import pytest

from isacbench import (
    DESK,
    SPEED_OF_LIGHT,
    BasebandSignal,
    Target,
    TargetSamplingSpec,
    add_awgn,
    apply_channel,
    read_targets,
    rice_magnitude,
    sample_targets,
    write_targets,
)


def test_target_delay_and_doppler():
    t = Target(range_m=30.0, radial_velocity_mps=10.0)
    assert abs(t.delay_s - 60.0 / SPEED_OF_LIGHT) < 1e-18
    assert abs(t.doppler_hz(28e9) - 2 * 10.0 * 28e9 / SPEED_OF_LIGHT) < 1e-9
    with pytest.raises(ValueError):
        Target(range_m=-1.0, radial_velocity_mps=0.0)


def test_apply_channel_single_static_target_is_pure_delay():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    fs = DESK.upsampled_rate_hz
    r = 30.0
    d = int(round(2 * r / SPEED_OF_LIGHT * fs))
    assert d > 0
    t = Target(range_m=r, radial_velocity_mps=0.0, reflection_coeff=0.5j)
    y = apply_channel(BasebandSignal(x, fs, "upsampled"), [t], DESK)
    assert len(y.samples) == 200 + d
    np.testing.assert_array_equal(y.samples[:d], 0.0)
    np.testing.assert_allclose(y.samples[d:], 0.5j * x, atol=1e-15)


def test_apply_channel_pure_doppler_is_phase_ramp():
    x = np.ones(64, dtype=complex)
    fs = 1e6
    t = Target(range_m=0.0, radial_velocity_mps=5.0)
    y = apply_channel(BasebandSignal(x, fs, "upsampled"), [t], DESK)
    fd = t.doppler_hz(DESK.carrier_freq_hz)
    n = np.arange(64)
    np.testing.assert_allclose(y.samples, np.exp(2j * np.pi * fd * n / fs), atol=1e-12)


def test_apply_channel_superposition():
    rng = np.random.default_rng(1)
    x = BasebandSignal(
        rng.standard_normal(100) + 1j * rng.standard_normal(100),
        DESK.upsampled_rate_hz,
        "upsampled",
    )
    t1 = Target(10.0, 3.0, 1.0)
    t2 = Target(25.0, -7.0, 0.3 - 0.4j)
    both = apply_channel(x, [t1, t2], DESK)
    a = apply_channel(x, [t1], DESK)
    b = apply_channel(x, [t2], DESK)
    n = len(both.samples)
    pa = np.pad(a.samples, (0, n - len(a.samples)))
    pb = np.pad(b.samples, (0, n - len(b.samples)))
    np.testing.assert_allclose(both.samples, pa + pb, atol=1e-12)


def test_apply_channel_empty_target_list():
    x = BasebandSignal(np.ones(10, dtype=complex), 1e6, "upsampled")
    y = apply_channel(x, [], DESK)
    np.testing.assert_array_equal(y.samples, 0.0)


def test_apply_channel_excessive_delay_raises():
    x = BasebandSignal(np.ones(10, dtype=complex), DESK.upsampled_rate_hz, "upsampled")
    with pytest.raises(ValueError):
        apply_channel(x, [Target(range_m=1e6, radial_velocity_mps=0.0)], DESK)


def test_awgn_power_calibration():
    rng = np.random.default_rng(2)
    x = BasebandSignal(np.ones(200_000, dtype=complex), 1e6, "base")
    for snr in (0.0, 10.0):
        y = add_awgn(x, snr, np.random.default_rng(3))
        p_n = np.mean(np.abs(y.samples - x.samples) ** 2)
        assert abs(p_n - 10 ** (-snr / 10)) < 0.02 * 10 ** (-snr / 10)
    # infinite SNR is a no-op
    z = add_awgn(x, np.inf, rng)
    np.testing.assert_array_equal(z.samples, x.samples)


def test_awgn_zero_signal_raises():
    x = BasebandSignal(np.zeros(8, dtype=complex), 1e6, "base")
    with pytest.raises(ValueError):
        add_awgn(x, 10.0, np.random.default_rng(0))


def test_rice_magnitude_moments():
    rng = np.random.default_rng(4)
    x = rice_magnitude(rng, k=3.0, omega=1.0, size=200_000)
    assert np.all(x >= 0)
    assert abs(np.mean(x**2) - 1.0) < 0.01


def test_loguniform_magnitudes():
    spec = TargetSamplingSpec(
        count=50, magnitude_law="loguniform", mag_range_db=(-30.0, 0.0),
        enforce_min_spacing=False,
    )
    rng = np.random.default_rng(11)
    mags_db = []
    for _ in range(100):
        for t in sample_targets(rng, spec):
            mags_db.append(20 * np.log10(abs(t.reflection_coeff)))
    mags_db = np.asarray(mags_db)
    assert np.all(mags_db >= -30.0 - 1e-9) and np.all(mags_db <= 0.0 + 1e-9)
    # power uniform in dB: mean -15 dB, variance 30^2/12
    assert abs(np.mean(mags_db) + 15.0) < 0.3
    assert abs(np.var(mags_db) - 75.0) < 3.0


def test_mag_range_db_out_of_order_raises():
    with pytest.raises(ValueError):
        TargetSamplingSpec(magnitude_law="loguniform", mag_range_db=(0.0, -30.0))


def test_sample_targets_bounds_and_count():
    spec = TargetSamplingSpec(count=(1, 15))
    rng = np.random.default_rng(5)
    counts = set()
    for _ in range(200):
        ts = sample_targets(rng, spec)
        counts.add(len(ts))
        for t in ts:
            assert 0.0 <= t.range_m <= 78.0
            assert -19.0 <= t.radial_velocity_mps <= 19.0
    assert min(counts) >= 1 and max(counts) <= 15
    assert len(counts) > 5  # the draw actually varies


def test_sample_targets_min_spacing():
    spec = TargetSamplingSpec(count=8, min_spacing=(5.0, 5.0))
    rng = np.random.default_rng(6)
    for _ in range(50):
        ts = sample_targets(rng, spec)
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                dr = abs(ts[i].range_m - ts[j].range_m)
                dv = abs(ts[i].radial_velocity_mps - ts[j].radial_velocity_mps)
                assert dr >= 5.0 or dv >= 5.0


def test_sample_targets_retry_budget_exhaustion():
    spec = TargetSamplingSpec(
        count=50, min_spacing=(80.0, 40.0), retry_budget=100
    )
    with pytest.raises(RuntimeError):
        sample_targets(np.random.default_rng(7), spec)


def test_sample_targets_deterministic():
    spec = TargetSamplingSpec()
    a = sample_targets(np.random.default_rng(8), spec)
    b = sample_targets(np.random.default_rng(8), spec)
    assert len(a) == len(b)
    for ta, tb in zip(a, b):
        assert ta.range_m == tb.range_m
        assert ta.reflection_coeff == tb.reflection_coeff


def test_targets_csv_roundtrip(tmp_path):
    ts = sample_targets(np.random.default_rng(9), TargetSamplingSpec(count=5))
    path = tmp_path / "targets.csv"
    write_targets(ts, path)
    back = read_targets(path)
    assert len(back) == 5
    for a, b in zip(ts, back):
        assert abs(a.range_m - b.range_m) < 1e-6
        assert abs(a.radial_velocity_mps - b.radial_velocity_mps) < 1e-6
        assert abs(a.reflection_coeff - b.reflection_coeff) < 1e-6


def test_read_targets_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("foo,bar\n1,2\n")
    with pytest.raises(ValueError):
        read_targets(path)
