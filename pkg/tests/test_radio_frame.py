import numpy as np
import pytest

from isacbench import (
    DESK,
    RadioConfig,
    generate_frame,
    ofdm_demodulate,
    ofdm_modulate,
)

QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def test_qpsk_alphabet_and_power():
    rng = np.random.default_rng(1)
    frame = generate_frame(rng, DESK)
    sym = frame.symbols.ravel()
    dists = np.min(np.abs(sym[:, None] - QPSK_POINTS[None, :]), axis=1)
    assert np.max(dists) < 1e-12
    assert abs(np.mean(np.abs(sym) ** 2) - 1.0) < 1e-12


def test_qam256_alphabet_and_power():
    cfg = RadioConfig(num_subcarriers=64, num_symbols=256, cp_len_samples=4,
                      modulation="qam256")
    rng = np.random.default_rng(2)
    frame = generate_frame(rng, cfg)
    sym = frame.symbols.ravel()
    # 256 distinct points possible; with 16k draws we expect to see them all
    assert len(np.unique(np.round(sym, 9))) == 256
    assert abs(np.mean(np.abs(sym) ** 2) - 1.0) < 0.02


def test_generate_frame_deterministic():
    a = generate_frame(np.random.default_rng(77), DESK)
    b = generate_frame(np.random.default_rng(77), DESK)
    np.testing.assert_array_equal(a.symbols, b.symbols)


def test_modulate_delta_is_scaled_idft():
    cfg = RadioConfig(num_subcarriers=16, num_symbols=2, cp_len_samples=3)
    X = np.zeros((16, 2), dtype=complex)
    n0 = 5
    X[n0, 0] = 1.0
    from isacbench.radio_frame import Frame

    sig = ofdm_modulate(Frame(X, "qpsk"), cfg)
    body0 = sig.samples[3 : 3 + 16]
    k = np.arange(16)
    expected = np.exp(2j * np.pi * k * n0 / 16) / 16
    np.testing.assert_allclose(body0, expected, atol=1e-14)


def test_cyclic_prefix_copies_tail():
    rng = np.random.default_rng(3)
    sig = ofdm_modulate(generate_frame(rng, DESK), DESK)
    N, cp = DESK.num_subcarriers, DESK.cp_len_samples
    blocks = sig.samples.reshape(DESK.num_symbols, N + cp)
    np.testing.assert_array_equal(blocks[:, :cp], blocks[:, -cp:])


def test_roundtrip_identity():
    rng = np.random.default_rng(4)
    frame = generate_frame(rng, DESK)
    Y = ofdm_demodulate(ofdm_modulate(frame, DESK), DESK)
    err = np.max(np.abs(Y - frame.symbols)) / np.max(np.abs(frame.symbols))
    assert err < 1e-10


def test_demodulate_zero_input():
    from isacbench.radio_frame import BasebandSignal

    n = DESK.num_symbols * (DESK.num_subcarriers + DESK.cp_len_samples)
    zero = BasebandSignal(np.zeros(n, dtype=complex), DESK.base_rate_hz, "base")
    np.testing.assert_array_equal(ofdm_demodulate(zero, DESK), 0.0)


def test_circular_delay_phase_ramp():
    # Delay by d < cp base samples: row n gains exp(-j 2 pi n d / N).
    cfg = RadioConfig(num_subcarriers=32, num_symbols=1, cp_len_samples=8)
    rng = np.random.default_rng(5)
    frame = generate_frame(rng, cfg)
    sig = ofdm_modulate(frame, cfg)
    d = 3
    delayed = np.roll(sig.samples, d)
    from isacbench.radio_frame import BasebandSignal

    Y = ofdm_demodulate(BasebandSignal(delayed, sig.sample_rate_hz, "base"), cfg)
    n = np.arange(32)
    expected = frame.symbols[:, 0] * np.exp(-2j * np.pi * n * d / 32)
    np.testing.assert_allclose(Y[:, 0], expected, atol=1e-10)
    np.testing.assert_allclose(np.abs(Y[:, 0]), np.abs(frame.symbols[:, 0]), atol=1e-10)


def test_parseval_idft_scaling():
    rng = np.random.default_rng(6)
    frame = generate_frame(rng, DESK)
    body = np.fft.ifft(frame.symbols, axis=0)
    p_time = np.mean(np.abs(body) ** 2)
    p_freq = np.mean(np.abs(frame.symbols) ** 2)
    assert abs(p_time - p_freq / DESK.num_subcarriers) < 1e-12


def test_dimension_mismatch_raises():
    rng = np.random.default_rng(7)
    frame = generate_frame(rng, DESK)
    other = RadioConfig(num_subcarriers=128, num_symbols=64, cp_len_samples=9)
    with pytest.raises(ValueError):
        ofdm_modulate(frame, other)


def test_config_invariants():
    with pytest.raises(ValueError):
        RadioConfig(cp_len_samples=300)  # cp >= N
    with pytest.raises(ValueError):
        RadioConfig(modulation="bpsk")
    assert DESK.symbol_time_s * DESK.subcarrier_spacing_hz == 1.0
