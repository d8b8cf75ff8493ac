import math

import pytest

import rootflow as rf


def test_family_and_flow_give_kac_derivative():
    circle = rf.family("unit-circle", 256)
    kac = rf.flow(circle, 0.5)
    for p in (0.1, 0.5, 0.9):
        # Q(p) = p(1-t) / (p(1-t) + t) at t = 1/2
        assert kac.quantile(p) == pytest.approx(p / (p + 1), rel=1e-12)
    assert rf.quantile_distance(kac, rf.family("kac-derivative:t=0.5", 256), kac.probs) < 1e-12


def test_haar_sum_and_bridge():
    circle = rf.family("unit-circle", 512)
    grid = rf.chebyshev_grid(512)
    two = rf.oplus_power(circle, 2.0)
    assert rf.quantile_distance(two, rf.family("haar-sum:k=2", 512), grid) < 1e-9
    assert rf.bridge_residual(rf.family("taylor", 512), 0.5, grid) < 1e-9


def test_s_transform_of_circular_law():
    # The circular element has S(z) = 1/(1+z) for a*a.
    s = rf.s_transform(rf.family("circular", 256), [-0.5, -0.25])
    assert s == pytest.approx([2.0, 4.0 / 3.0], rel=1e-12)


def test_csv_round_trip():
    m = rf.family("taylor", 32)
    back = rf.RadialQuantile.from_csv(m.to_csv())
    assert back.radii == m.radii


def test_roots_and_errors():
    roots = rf.aberth_roots([-6, 11, -6, 1])  # (z-1)(z-2)(z-3)
    assert sorted(r.real for r in roots) == pytest.approx([1, 2, 3], abs=1e-10)
    with pytest.raises(rf.RootflowError) as err:
        rf.oplus_power(rf.family("unit-circle", 16), 0.5)
    assert err.value.code == "domain"
    with pytest.raises(ValueError):
        rf.family("no-such-family")


def test_small_experiment_is_deterministic():
    a = rf.derivative_experiment("kac", n=160, t=0.5, trials=2, seed=3, threads=1)
    b = rf.derivative_experiment("kac", n=160, t=0.5, trials=2, seed=3, threads=2)
    assert a["trials"] == b["trials"]
    assert a["gauss_lucas_violations"] == 0
    assert a["mean_ks_flow"] < 0.2


def test_pde_and_profiles():
    s = rf.pde_state(rf.family("taylor"), rf.uniform_nodes(200, 1.0))
    out = rf.integrate(s, 0.1)
    assert out.t == pytest.approx(0.1)
    exact = rf.flow(rf.family("taylor"), 0.1)
    assert max(abs(f - exact.cdf(x)) for x, f in zip(out.x, out.phi)) < 2e-2
    x = rf.uniform_nodes(100, 1.0)
    assert rf.ode_residual(x, x) < 1e-10
    m = rf.profile_to_measure(rf.taylor_profile())
    assert m.quantile(0.5) == pytest.approx(0.5, abs=1e-6)


def test_verify_closed_form():
    reports = rf.verify("closed-form", grid=512)
    assert [r["id"] for r in reports][0] == "2-kac-closed-form"
    assert all(r["passed"] for r in reports)
    assert all(math.isfinite(m["value"]) for r in reports for m in r["metrics"])
