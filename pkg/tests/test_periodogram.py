import numpy as np
import pytest
from scipy.signal import windows as sswin

from isacbench import (
    DESK,
    TABLE2,
    SPEED_OF_LIGHT,
    CsiMatrix,
    RadioConfig,
    Target,
    WindowSpec,
    apply_window,
    compute_periodogram,
    load_periodogram,
    make_window,
    multi_window_stack,
    save_periodogram,
    synthesize_csi,
)
from isacbench.periodogram import STACK_WINDOWS, _next_pow2


def brute_force_periodogram(H, Np, Mp):
    """Direct double-loop evaluation of the padded 2D transform."""
    N, M = H.shape
    S = np.zeros((Np, Mp))
    for n_out in range(Np):
        for m_out in range(Mp):
            acc = 0.0j
            for n in range(N):
                for m in range(M):
                    acc += H[n, m] * np.exp(
                        -2j * np.pi * m * m_out / Mp + 2j * np.pi * n * n_out / Np
                    )
            S[n_out, m_out] = abs(acc) ** 2 / (Np * Mp)
    return np.fft.fftshift(S, axes=1)


def small_cfg(n, m):
    return RadioConfig(num_subcarriers=n, num_symbols=m, cp_len_samples=0)


def test_periodogram_matches_brute_force():
    rng = np.random.default_rng(0)
    cfg = small_cfg(6, 5)
    H = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    p = compute_periodogram(CsiMatrix(H, cfg, "linear"))
    assert p.power.shape == (8, 8)
    expected = brute_force_periodogram(H, 8, 8)
    np.testing.assert_allclose(p.power, expected, atol=1e-10)


def test_periodogram_all_ones_4x4():
    cfg = small_cfg(4, 4)
    H = np.ones((4, 4), dtype=complex)
    p = compute_periodogram(CsiMatrix(H, cfg, "linear"))
    assert p.power.shape == (4, 4)
    # Zero velocity sits at column M'//2 after centering.
    assert p.power[0, 2] == pytest.approx(16.0)
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 2] = False
    assert np.max(p.power[mask]) < 1e-20


def test_periodogram_zero_input():
    cfg = small_cfg(4, 4)
    p = compute_periodogram(CsiMatrix(np.zeros((4, 4), dtype=complex), cfg, "linear"))
    np.testing.assert_array_equal(p.power, 0.0)


def test_periodogram_nonnegative_and_pow2_dims():
    rng = np.random.default_rng(1)
    cfg = small_cfg(6, 5)
    H = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
    p = compute_periodogram(CsiMatrix(H, cfg, "linear"))
    assert np.all(p.power >= 0)
    for dim, orig in zip(p.power.shape, (6, 5)):
        assert dim >= orig and dim & (dim - 1) == 0


def test_parseval_without_padding():
    # Desk dims are powers of two, so there is no padding and energy is
    # conserved exactly between the CSI and the periodogram.
    rng = np.random.default_rng(2)
    H = synthesize_csi([], 0.0, DESK, rng)
    p = compute_periodogram(H)
    total = np.sum(p.power)
    ref = np.sum(np.abs(H.values) ** 2)
    assert abs(total - ref) / ref < 1e-9


def test_axis_metadata_desk():
    p = compute_periodogram(synthesize_csi([], np.inf, DESK))
    Np, Mp = p.power.shape
    assert p.range_per_bin_m == pytest.approx(
        SPEED_OF_LIGHT / (2 * DESK.subcarrier_spacing_hz * Np)
    )
    assert p.velocity_of_col(Mp // 2) == pytest.approx(0.0)
    assert p.range_of_row(0) == 0.0


def test_single_target_peak_maps_back():
    t = Target(range_m=33.0, radial_velocity_mps=-8.0, reflection_coeff=1.0)
    p = compute_periodogram(synthesize_csi([t], np.inf, DESK))
    r, c = np.unravel_index(np.argmax(p.power), p.power.shape)
    assert abs(p.range_of_row(r) - 33.0) <= DESK.range_resolution_m / 2
    assert abs(p.velocity_of_col(c) + 8.0) <= DESK.velocity_resolution_mps / 2


def test_full_scale_target_range_bin():
    # 39 m at the full-scale radio lands in range bin round(2*39/c0*df*N').
    t = Target(range_m=39.0, radial_velocity_mps=0.0)
    p = compute_periodogram(synthesize_csi([t], np.inf, TABLE2))
    Np = p.power.shape[0]
    assert Np == 2048
    r, _ = np.unravel_index(np.argmax(p.power), p.power.shape)
    expected = round(2 * 39.0 / SPEED_OF_LIGHT * TABLE2.subcarrier_spacing_hz * Np)
    assert r == expected == 64


def test_next_pow2():
    assert [_next_pow2(n) for n in (1, 2, 3, 4, 5, 255, 256, 257)] == [
        1, 2, 4, 4, 8, 256, 256, 512,
    ]


def test_window_parse_and_label():
    assert WindowSpec.parse("rect").kind == "rectangular"
    assert WindowSpec.parse("hann").kind == "hann"
    cheb = WindowSpec.parse("chebyshev:60")
    assert cheb.kind == "chebyshev" and cheb.attenuation_db == 60.0
    d = WindowSpec.parse("dpss:2.5:1")
    assert (d.time_halfbandwidth, d.order_index) == (2.5, 1)
    assert d.label == "dpss2.5.1"
    with pytest.raises(ValueError):
        WindowSpec.parse("kaiser")
    with pytest.raises(ValueError):
        WindowSpec("dpss", order_index=-1)


def test_hann_window_shape():
    w = make_window(WindowSpec("hann"), 64)
    assert w[0] == pytest.approx(0.0)
    assert 0.999 < np.max(w) <= 1.0  # even-length symmetric taper straddles 1
    np.testing.assert_allclose(w, w[::-1], atol=1e-15)
    odd = make_window(WindowSpec("hann"), 65)
    assert odd[32] == pytest.approx(1.0)


def test_chebyshev_sidelobes():
    w = make_window(WindowSpec("chebyshev", attenuation_db=80.0), 256)
    spec = np.abs(np.fft.fft(w, 65536))
    spec /= spec[0]
    # Sidelobe region: outside the main lobe (~2*65536/256 bins wide).
    side = spec[1024:32768]
    assert 20 * np.log10(np.max(side)) <= -79.9


def test_dpss_matches_scipy():
    # Independent oracle: scipy's dpss solves the same concentration problem.
    for order in (0, 1, 2):
        mine = make_window(WindowSpec("dpss", time_halfbandwidth=3.5,
                                      order_index=order), 128)
        ref = sswin.dpss(128, 3.5, Kmax=3)[order]
        ref = ref / np.max(np.abs(ref))
        if np.dot(mine, ref) < 0:
            ref = -ref
        np.testing.assert_allclose(mine, ref, atol=1e-8)


def test_dpss_orders_orthogonal():
    vecs = []
    for order in (0, 1, 2):
        from isacbench.periodogram import _dpss_taper

        vecs.append(_dpss_taper(128, 3.5, order))
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(np.dot(vecs[i], vecs[j])) < 1e-8


def test_apply_window_single_entry():
    cfg = small_cfg(8, 4)
    H = np.zeros((8, 4), dtype=complex)
    H[3, 1] = 2.0 - 1.0j
    wr = make_window(WindowSpec("hann"), 8)
    wc = make_window(WindowSpec("hann"), 4)
    out = apply_window(CsiMatrix(H, cfg, "linear"), wr, wc)
    assert out.values[3, 1] == pytest.approx((2.0 - 1.0j) * wr[3] * wc[1])
    assert np.count_nonzero(out.values) <= 1


def test_apply_window_length_mismatch():
    cfg = small_cfg(8, 4)
    H = CsiMatrix(np.ones((8, 4), dtype=complex), cfg, "linear")
    with pytest.raises(ValueError):
        apply_window(H, np.ones(7), np.ones(4))


def test_multi_window_stack_properties():
    assert len(STACK_WINDOWS) == 5
    t = Target(range_m=20.0, radial_velocity_mps=5.0)
    stack = multi_window_stack(synthesize_csi([t], np.inf, DESK))
    assert len(stack) == 5
    dims = {p.power.shape for p in stack}
    meta = {(p.range_per_bin_m, p.velocity_per_bin_mps) for p in stack}
    assert len(dims) == 1 and len(meta) == 1
    peaks = [np.unravel_index(np.argmax(p.power), p.power.shape) for p in stack]
    rows = [pk[0] for pk in peaks]
    cols = [pk[1] for pk in peaks]
    # All channels agree within a main-lobe half-width (DPSS NW=3.5 -> ~4 bins)
    assert max(rows) - min(rows) <= 4
    assert max(cols) - min(cols) <= 4


def test_periodogram_binary_roundtrip(tmp_path):
    t = Target(range_m=10.0, radial_velocity_mps=2.0)
    p = compute_periodogram(synthesize_csi([t], 20.0, DESK, np.random.default_rng(3)))
    path = tmp_path / "s.isacper"
    save_periodogram(p, path)
    back = load_periodogram(path)
    assert back.power.shape == p.power.shape
    np.testing.assert_allclose(back.power, p.power, rtol=1e-6, atol=1e-12)
    assert back.range_per_bin_m == p.range_per_bin_m
    assert back.velocity_per_bin_mps == p.velocity_per_bin_mps
    assert back.velocity_offset_mps == p.velocity_offset_mps


def test_load_periodogram_bad_magic(tmp_path):
    path = tmp_path / "bad.isacper"
    path.write_bytes(b"BADMAGIC" + b"\x00" * 40)
    with pytest.raises(ValueError):
        load_periodogram(path)
