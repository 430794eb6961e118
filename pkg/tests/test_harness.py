import math

import numpy as np
import pytest
from scipy.special import erfc

from ddmsim.harness import (
    CSV_FIELDS,
    BerPoint,
    BerReport,
    LinkSimulator,
    RadarDemo,
    Scenario,
    ebn0_at_ber,
    run_ber_sweep,
    run_radar_demo,
)
from ddmsim.params import DESK, TABLE2, ConfigError, derive_params
from ddmsim.radar_rx import area_of


def test_noiseless_sweep_is_error_free():
    rep = run_ber_sweep(Scenario(system="ddm", scenario="full_rx", ebn0_db=(math.inf,), max_frames=5))
    assert rep.points[0].errors == 0 and rep.points[0].frames == 5
    assert rep.points[0].upper_bound


def test_scenario_rules():
    assert Scenario(system="ddm", scenario="est_channel").link_cfg().N_pr == 16
    assert Scenario(system="esi", scenario="est_channel").link_cfg().N_pr == 4
    assert Scenario(system="siso", scenario="est_channel").link_cfg().N_pr == 4
    assert Scenario(system="ddm", scenario="pilot_sync").link_cfg().N_p == 64
    assert Scenario(system="esi", scenario="pilot_sync").link_cfg().N_p == 16
    assert Scenario(system="esi").link_cfg().bundle_size == 1
    assert Scenario(system="siso").link_cfg().N_Tx == 1
    assert not Scenario(scenario="no_ici").ici_enabled and Scenario().ici_enabled


@pytest.mark.parametrize("bad", [dict(system="dsi"), dict(scenario="tracking"), dict(min_errors=0),
                                 dict(profile="rician")])
def test_scenario_validation(bad):
    with pytest.raises(ConfigError):
        Scenario(**bad).validate()


def test_interval_and_upper_bound():
    p = BerPoint(5.0, 10, 10_000, 100)
    lo, hi = p.interval
    half = 1.96 * math.sqrt(0.01 * 0.99 / 10_000)
    assert (lo, hi) == pytest.approx((0.01 - half, 0.01 + half))
    z = BerPoint(9.0, 10, 30_000, 0)
    assert z.upper_bound and z.interval == (0.0, 1e-4)


def test_ebn0_at_ber_log_interpolation():
    rep = BerReport("ddm", "perfect_csi", [BerPoint(0, 1, 10**6, 10**4), BerPoint(2, 1, 10**6, 10**2)])
    assert ebn0_at_ber(rep, 1e-3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ebn0_at_ber(rep, 1e-6)


def test_csv_identical_across_thread_counts(tmp_path):
    kw = dict(system="ddm", scenario="full_rx", ebn0_db=(4.0, 6.0), min_errors=50, max_frames=12, seed=9)
    paths = []
    for t in (1, 3):
        p = tmp_path / f"t{t}.csv"
        run_ber_sweep(Scenario(threads=t, **kw)).write_csv(p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    lines = paths[0].read_text().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS) and len(lines) == 3
    assert (tmp_path / "t1.csv.meta.json").exists()


def test_zero_error_point_written_as_bound(tmp_path):
    rep = run_ber_sweep(Scenario(ebn0_db=(40.0,), max_frames=2))
    rep.write_csv(tmp_path / "b.csv")
    row = (tmp_path / "b.csv").read_text().splitlines()[1].split(",")
    assert row[5] == "0" and row[6].startswith("<")


def test_siso_uncoded_awgn_8db():
    cfg = DESK.with_(T_cp=0.0, cir_len=1)
    rep = run_ber_sweep(Scenario(system="siso", cfg=cfg, profile="awgn", coded=False, ici=False, max_velocity=0.0,
                                 ebn0_db=(8.0,), min_errors=200, min_frames=20, max_frames=200, seed=8))
    pt = rep.points[0]
    q = 0.5 * erfc(math.sqrt(10 ** 0.8))
    assert q == pytest.approx(1.9e-4, rel=0.01)
    assert abs(pt.ber - q) < 3 * math.sqrt(q * (1 - q) / pt.bits)


def test_coded_ber_nonincreasing():
    rep = run_ber_sweep(Scenario(ebn0_db=(3.0, 5.0, 7.0), min_errors=200, min_frames=20, max_frames=100, seed=4))
    b = rep.bers()
    assert b[0] > b[1] > b[2]
    assert "inversions" not in rep.meta


def test_frame_seeds_shared_across_ebn0_and_systems():
    a = LinkSimulator(Scenario(system="ddm"))
    b = LinkSimulator(Scenario(system="esi"))
    ra, rb = a.frame_rngs(7), b.frame_rngs(7)
    for x, y in zip(ra, rb):
        assert x.integers(0, 2**31) == y.integers(0, 2**31)


def test_radar_demo_single_static_target():
    res = run_radar_demo(RadarDemo(targets=((30.0, 0.0, 1.0),)))
    assert len(res.detections) == 4
    assert {d.antenna for d in res.detections} == {0, 1, 2, 3}
    assert all(d.velocity_mps == 0.0 for d in res.detections)
    assert np.all(res.snr_db > 30)


def test_radar_demo_area_layout():
    """Bin arithmetic oracle: target at vb velocity bins lands at p_k + vb in area k."""
    cfg = DESK
    dp = derive_params(cfg)
    vb = -9
    v = -vb * dp.delta_v
    res = run_radar_demo(RadarDemo(targets=((20 * dp.delta_r, v, 1.0),), ici=False))
    p = (2 * np.arange(4) + 1 - 4) * cfg.N_sym // 8
    want = {(int(k), int(((pk + vb + 64) % 128) - 64)) for k, pk in enumerate(p)}
    assert {(d.antenna, d.vel_bin) for d in res.detections} == want
    for d in res.detections:
        assert area_of(d.vel_bin, cfg.N_sym, 4) == d.antenna
        assert d.velocity_mps == pytest.approx(v)


def test_radar_demo_byte_identical(tmp_path):
    demo = RadarDemo(targets=((12.0, 5.0, 1.0), (40.0, -30.0, 0.5)), seed=3)
    for tag in "ab":
        run_radar_demo(demo, tmp_path / f"{tag}.rdm", tmp_path / f"{tag}.csv")
    assert (tmp_path / "a.rdm").read_bytes() == (tmp_path / "b.rdm").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
