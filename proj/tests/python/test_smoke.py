import math

import pytest

import arwmass

SIX_PI2 = 6.0 * math.pi**2


def test_sads_mass_is_recovered():
    spec = arwmass.sads_spec(arwmass.SAdSParams(3, 0.0, 1.0))
    report = arwmass.mass_limit(spec, K=10, nodes_per_axis=12)
    assert report["m_hat"] == pytest.approx(1.0, abs=1e-5)
    assert all(v == pytest.approx(SIX_PI2, rel=1e-6) for v in report["integrals"])


def test_rw_family_slice_integral_and_mass():
    spec = arwmass.rw_family(3, 1.0, 2.0)
    assert arwmass.mass_limit(spec)["m_hat"] == pytest.approx(4.0, abs=1e-6)
    one = arwmass.rw_family(3, 1.0, 1.0)
    assert arwmass.slice_mass_integral(one, -0.1) == pytest.approx(SIX_PI2 * 1.01, rel=1e-10)


def test_graph_integral_matches_slice():
    spec = arwmass.rw_family()
    assert arwmass.graph_mass_integral(spec, "-0.3") == pytest.approx(arwmass.slice_mass_integral(spec, -0.3), rel=1e-10)


def test_validate_and_errors():
    assert arwmass.arw_validate(arwmass.rw_family())["passed"]
    bad = arwmass.custom_spec(3, 1.0, "-log(-log(-t))", a=-0.5)
    assert not arwmass.arw_validate(bad)["passed"]
    with pytest.raises(arwmass.ParseError):
        arwmass.custom_spec(3, 1.0, "log(-t")
    with pytest.raises(ValueError):
        arwmass.imcf_run(arwmass.rw_family(), 0.5, 1.0)
    with pytest.raises(arwmass.NumericalAbort):
        arwmass.imcf_run(arwmass.custom_spec(3, 1.0, "log(-t)", psi="-5*t^2"), -0.5, 1.0)


def test_imcf_exact_family():
    run = arwmass.imcf_run(arwmass.rw_family(), -0.5, 30.0)
    assert run["u"][0] == -0.5
    assert run["slope"] == pytest.approx(-1.0 / 3.0, abs=1e-9)
    assert run["decay_rate"] == pytest.approx(-1.0 / 3.0, abs=1e-9)
    short = arwmass.imcf_run(arwmass.rw_family(), -0.5, 3.0)
    assert short["u"][-1] == pytest.approx(-0.5 * math.exp(-1.0), abs=1e-8)
    assert math.isnan(short["slope"])


def test_slab_tcc_and_uniqueness():
    rw = arwmass.rw_family()
    assert arwmass.slab_balance(rw, -0.5, -0.25, 16)["relative"] <= 1e-6
    tcc = arwmass.tcc_check(rw, events=20, directions=8, seed=1)
    assert tcc["violations"] == 0 and tcc["samples"] == 160
    for eps in (0.1, -0.1):
        assert arwmass.mass_limit(arwmass.reparametrize_time(rw, eps))["m_hat"] == pytest.approx(1.0, abs=1e-4)
    spec, lam = arwmass.normalize(arwmass.rescale(rw, 1.21))
    assert lam == pytest.approx(1.0 / 1.21, rel=1e-12)
    assert arwmass.mass_limit(spec)["m_hat"] == pytest.approx(1.0, rel=1e-8)


def test_sads_helpers():
    p = arwmass.SAdSParams(3, -1.0, 1.0)
    r0 = arwmass.horizon(p)
    assert 0.0 < r0 < 1.0
    x0 = arwmass.x0_of_r(p, 0.5)
    assert arwmass.r_of_x0(p, x0) == pytest.approx(0.5, rel=1e-12)
    assert arwmass.oracle_mass_integral(p, 0.5) == pytest.approx(SIX_PI2 * (1 - 0.5**4 / 6), rel=1e-14)
    spec = arwmass.sads_spec(p)
    assert arwmass.monotonicity_scan(spec)["trend"] == "increasing"
    G = arwmass.einstein_tensor(spec, [x0, 1.0, 1.0, 1.0])
    assert len(G) == 4 and G[1][0] == pytest.approx(G[0][1], abs=1e-12)
    ricci, scalar = arwmass.conformal_residuals(spec, [x0, 1.0, 1.0, 1.0])
    assert ricci <= 1e-8 and scalar <= 1e-8
