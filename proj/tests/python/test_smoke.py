import math

import pytest

import slitbilliard as sb


EXAMPLE = """config:
  left:
    constant: 0.5
    cos:
      - {k: 1, amplitude: 0.3}
  right:
    constant: 0.5
    sin:
      - {k: 1, amplitude: 0.3}
  lambda: 0.6
  x0: 0.1
experiment:
  command: atlas
  params:
    n: 6
    check: none
"""


def test_version():
    assert sb.__version__ == "0.1.0"


def test_walls_and_jumps():
    cfg = sb.example_config(0.6, 0.1)
    f, fd, fdd = cfg.wall_at(0.0)
    assert f == pytest.approx(0.8, abs=1e-15)
    assert fdd == pytest.approx(-0.3 * math.pi**2, rel=1e-14)
    j = cfg.jump_data(1)
    assert (j.f_minus, j.f_plus) == pytest.approx((0.5, 0.8), abs=1e-14)
    assert j.l_plus / j.l_minus == pytest.approx(0.4, abs=1e-13)


def test_invalid_walls_raise():
    with pytest.raises(sb.Error, match="InvalidConfig"):
        sb.TrigSeries(0.5, cos=[sb.Harmonic(1, 0.5)])
    with pytest.raises(sb.Error):
        sb.example_config(0.5, 0.5)


def test_elliptic_orbit():
    cfg = sb.elliptic_config(0.01)
    rec = sb.slit_record(cfg, 0.25, 2.04, sb.Chamber.Upper)
    nxt = sb.collision_map(cfg, rec)
    assert nxt.t == pytest.approx(0.75, abs=1e-12)
    assert nxt.v == pytest.approx(2.04, abs=1e-12)
    traj = sb.simulate(cfg, rec, 40)
    assert traj.status == sb.TrajectoryStatus.Running
    assert all(abs(r.v - 2.04) < 1e-9 for r in traj.records)


def test_angle_action_round_trip():
    geo = sb.ChamberGeometry(sb.example_config(0.6, 0.1), sb.Chamber.Upper)
    t, v = geo.from_angle_action(0.7, 1e4)
    theta, action = geo.to_angle_action(t, v)
    assert theta == pytest.approx(0.7, abs=1e-9)
    assert action == pytest.approx(1e4, rel=1e-10)


def test_trapping_and_affine():
    cfg = sb.example_config(0.6, 0.1)
    verdict = sb.classify(cfg)
    assert verdict.kind == sb.TrapKind.LowerTrapping
    chamber, rate, contraction = sb.predicted_rate(cfg)
    assert chamber == sb.Chamber.Lower
    assert rate == pytest.approx(2.013, rel=1e-3)
    assert contraction == pytest.approx(0.364, rel=1e-3)
    sys = sb.build_affine(cfg)
    assert sys.hyperbolic
    assert sys.trace == pytest.approx(sb.compute_constants(cfg)["tr_upper"], abs=1e-8)
    assert sys.lambda_u * sys.lambda_s == pytest.approx(1.0, abs=1e-12)
    assert sb.good_line_bound(0.4) == pytest.approx(0.75)
    assert sb.waiting_time(0.75, sys.lambda_u, 2.0, 2.0, 0.1)[0] == 16
    surv = sb.survival_curve(sys, 0, 500, 10, 1)
    assert surv[0] == 1.0
    assert all(b <= a for a, b in zip(surv, surv[1:]))


def test_harness_atlas():
    out = sb.run_config_text(EXAMPLE)
    assert out["pass"]
    assert "atlas.csv" in out["files"]
    body = [l for l in out["files"]["atlas.csv"].splitlines() if not l.startswith("#")]
    assert body[0] == "lambda,x0,kind,tr,hyperbolic"
    assert len(body) == 1 + 15


def test_harness_needs_seed():
    text = EXAMPLE.replace("command: atlas", "command: escape")
    with pytest.raises(sb.Error):
        sb.run_config_text(text)


def test_canonical_config_round_trip():
    once = sb.canonical_config(EXAMPLE)
    assert sb.canonical_config(once) == once
