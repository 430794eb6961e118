import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddmsim import channel
from ddmsim.channel import RadarScene, radar_response
from ddmsim.frame import apply_ddm_coding, build_frame, ddm_phase_set, frame_capacity, phase_set_from_bins
from ddmsim.params import TABLE2, WaveformConfig, derive_params
from ddmsim.radar_rx import (
    SNR_CAP_DB,
    annotate,
    area_of,
    bin_to_physical,
    compute_rdm,
    compute_esi_rdms,
    extract_peaks,
    rdm_snr,
    signed_bin,
)
from conftest import SMALL, crandn

TINY = WaveformConfig(B=16e6, N_c=16, N_sym=8, N_Tx=1, bundle_size=1, N_pr=4, N_p=2, cir_len=4)


def grid(cfg, seed=0):
    rng = np.random.default_rng(seed)
    return build_frame(rng.integers(0, 2, frame_capacity(cfg).info_bits), cfg).S


def on_grid_gain(cfg, dist):
    # cancels the carrier phase so the peak is real and positive
    return np.exp(2j * np.pi * cfg.f_c * 2 * dist / cfg.c0)


def brute_rdm(Y, S):
    n_c, n_sym = Y.shape
    F_c = np.exp(-2j * np.pi * np.outer(np.arange(n_c), np.arange(n_c)) / n_c)
    F_s = np.exp(-2j * np.pi * np.outer(np.arange(n_sym), np.arange(n_sym)) / n_sym)
    Z_f = (F_c @ Y) / S
    Z_r = np.linalg.inv(F_c) @ Z_f
    return Z_r @ F_s


def test_siso_static_target_single_peak():
    S = grid(TINY)
    p = 3
    d = channel.range_for_bin(TINY, p)
    Y = radar_response(S, RadarScene.single(d, 0.0, on_grid_gain(TINY, d)), TINY)
    rdm = compute_rdm(Y, S, "rectangular", "rectangular")
    assert np.allclose(rdm.Z, brute_rdm(Y, S), atol=1e-12)
    P = np.abs(rdm.Z)
    assert np.unravel_index(np.argmax(P), P.shape) == (p, 0)
    assert rdm.Z[p, 0] == pytest.approx(TINY.N_sym, abs=1e-12)
    off = P.copy()
    off[p, 0] = 0
    assert off.max() < 1e-9 * P[p, 0]


def test_ddm_static_target_four_equal_peaks():
    cfg = TABLE2
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    d = channel.range_for_bin(cfg, 40)
    Y = radar_response(apply_ddm_coding(S, ph), RadarScene.single(d, 0.0, on_grid_gain(cfg, d)), cfg)
    rdm = compute_rdm(Y, S, "rectangular", "rectangular")
    peaks = rdm.Z[40, np.array([-192, -64, 64, 192]) % cfg.N_sym]
    assert np.max(np.abs(peaks - peaks[0])) < 1e-9 * abs(peaks[0])
    assert abs(peaks[0]) == pytest.approx(cfg.N_sym, rel=1e-9)
    dets = extract_peaks(rdm)
    assert len(dets) == 4
    assert sorted(d.vel_bin for d in dets) == [-192, -64, 64, 192]


def test_moving_target_shifts_all_peaks_equally():
    cfg = SMALL
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    dp = derive_params(cfg)
    vb = 3
    v = channel.velocity_for_bin(cfg, vb)  # on-grid, approaching
    d = channel.range_for_bin(cfg, 10)
    Y = radar_response(apply_ddm_coding(S, ph), RadarScene.single(d, v), cfg, ici=False)
    dets = extract_peaks(compute_rdm(Y, S, "rectangular", "rectangular"))
    # on-grid Doppler: fd_bar * alpha * N_sym bins
    shift = (-2 * v * cfg.f_c / cfg.c0) / dp.delta_f * dp.alpha * cfg.N_sym
    assert shift == pytest.approx(vb, abs=1e-9)
    got = sorted(d.vel_bin for d in dets)
    assert got == sorted(int(signed_bin(p + round(shift), cfg.N_sym)) for p in ph.p)


def test_division_by_uncoded_symbols_matters():
    cfg = SMALL
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    S_k = apply_ddm_coding(S, ph)
    Y = radar_response(S_k, RadarScene.single(channel.range_for_bin(cfg, 5)), cfg)
    good = extract_peaks(compute_rdm(Y, S, "rectangular", "rectangular"))
    assert len(good) == 4
    # dividing by one antenna's coded grid pulls that antenna to zero velocity instead
    wrong = compute_rdm(Y, S_k[0], "rectangular", "rectangular")
    assert np.argmax(np.abs(wrong.Z[5])) == signed_bin(-ph.p[0] + ph.p[0], cfg.N_sym) % cfg.N_sym


def test_zero_symbol_rejected_with_location():
    S = grid(TINY).copy()
    S[5, 2] = 0
    with pytest.raises(ValueError, match="subcarrier 5, symbol 2"):
        compute_rdm(np.ones_like(S), S)


@pytest.mark.parametrize("rbin", [0, 7, 21])
def test_peak_location_window_independent(rbin):
    cfg = SMALL
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    Y = radar_response(apply_ddm_coding(S, ph), RadarScene.single(channel.range_for_bin(cfg, rbin)), cfg)
    a = {(d.range_bin, d.vel_bin) for d in extract_peaks(compute_rdm(Y, S, "rectangular", "rectangular"))}
    b = {(d.range_bin, d.vel_bin) for d in extract_peaks(compute_rdm(Y, S, "hann", "hann"))}
    assert a == b and len(a) == 4


def test_two_targets_give_eight_detections():
    cfg = SMALL
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    sc = RadarScene(np.array([1.0, 0.7]), np.array([channel.range_for_bin(cfg, 8), channel.range_for_bin(cfg, 14)]),
                    np.array([0.0, channel.velocity_for_bin(cfg, 2)]))
    Y = radar_response(apply_ddm_coding(S, ph), sc, cfg) + 1e-3 * crandn(np.random.default_rng(0), cfg.N_c, cfg.N_sym)
    dets = extract_peaks(compute_rdm(Y, S))
    assert len(dets) == 8
    assert sorted({d.range_bin for d in dets}) == [8, 14]


def test_noise_only_false_alarms():
    cfg = SMALL
    S = grid(cfg)
    rng = np.random.default_rng(77)
    empty = sum(not extract_peaks(compute_rdm(crandn(rng, cfg.N_c, cfg.N_sym), S)) for _ in range(300))
    assert empty / 300 >= 0.99


def test_threshold_must_be_positive():
    rdm = compute_rdm(np.ones((16, 8), complex), np.ones((16, 8), complex))
    with pytest.raises(ValueError):
        extract_peaks(rdm, threshold_db=0)


def test_bin_to_physical_examples():
    dp = derive_params(TABLE2)
    ph = ddm_phase_set(4, 512)
    assert bin_to_physical(0, int(ph.p[0]), dp, ph) == (0.0, 0.0, 0)
    r, _, _ = bin_to_physical(100, 0 + 64, dp, ph)
    assert r == pytest.approx(14.99, abs=5e-3)
    r, v, k = bin_to_physical(0, int(ph.p[2]) + 10, dp, ph)
    assert k == 2
    # positive bin offset = approaching target (negative velocity) under f_D = -2 v f_c / c0
    assert v == pytest.approx(-10 * dp.delta_v) and abs(v) == pytest.approx(18.79, abs=5e-3)


@given(st.integers(-256, 255))
def test_area_index_matches_nearest_centre(vb):
    ph = ddm_phase_set(4, 512)
    k = area_of(vb, 512, 4)
    dist = np.abs(signed_bin(vb - ph.p, 512))
    assert dist[k] == dist.min()
    assert dist[k] <= 64


def test_bin_to_physical_roundtrip_table2():
    cfg = TABLE2
    dp = derive_params(cfg)
    ph = ddm_phase_set(4, cfg.N_sym)
    S = grid(cfg)
    vb = 17
    Y = radar_response(apply_ddm_coding(S, ph), RadarScene.single(channel.range_for_bin(cfg, 60),
                                                                  channel.velocity_for_bin(cfg, vb)), cfg, ici=False)
    dets = annotate(extract_peaks(compute_rdm(Y, S)), dp, ph)
    assert len(dets) == 4
    assert sorted(d.antenna for d in dets) == [0, 1, 2, 3]
    for d in dets:
        assert d.range_m == pytest.approx(60 * dp.delta_r)
        assert d.velocity_mps == pytest.approx(channel.velocity_for_bin(cfg, vb), rel=1e-12)


def test_noiseless_snr_is_capped():
    S = grid(SMALL)
    Y = radar_response(S[None] * 1.0, RadarScene.single(channel.range_for_bin(SMALL, 4)), SMALL.with_(N_Tx=1,
                                                                                                     bundle_size=1))
    rdm = compute_rdm(Y, S, "rectangular", "rectangular")
    dets = extract_peaks(rdm)
    assert rdm_snr(rdm, dets)[0] == SNR_CAP_DB
    with pytest.raises(ValueError):
        rdm_snr(rdm, [])


def _mean_snr(cfg, trials, rng):
    S = grid(cfg)
    sc = RadarScene.single(channel.range_for_bin(cfg, 9))
    Y0 = radar_response(S, sc, cfg)
    out = []
    for _ in range(trials):
        rdm = compute_rdm(Y0 + 0.3 * crandn(rng, cfg.N_c, cfg.N_sym), S)
        dets = [d for d in extract_peaks(rdm) if d.range_bin == 9 and d.vel_bin == 0]
        out.append(rdm_snr(rdm, dets)[0])
    return np.mean(out)


def test_doubling_symbols_adds_3db():
    rng = np.random.default_rng(8)
    base = SMALL.with_(N_Tx=1, bundle_size=1)
    a = _mean_snr(base, 30, rng)
    b = _mean_snr(base.with_(N_sym=64), 30, rng)
    assert b - a == pytest.approx(10 * np.log10(2), abs=0.3)


def test_esi_maps_one_per_antenna():
    cfg = SMALL.with_(bundle_size=1)
    from ddmsim.baselines import esi_grids

    S = grid(cfg)
    Y = radar_response(esi_grids(S, 4), RadarScene.single(channel.range_for_bin(cfg, 4)), cfg)
    maps = compute_esi_rdms(Y, esi_grids(S, 4), "rectangular", "rectangular")
    assert len(maps) == 4
    for m in maps:
        assert m.Z.shape == (16, 32)
        d = extract_peaks(m)
        # comb keeps the full bandwidth: same range bin, N_Tx times shorter unambiguous range
        assert len(d) == 1 and d[0].range_bin == 4 and d[0].vel_bin == 0
