import math

import mpmath as mp
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

import oracles as o
from zaslab.errors import DomainError, InterpolationError, ParseError
from zaslab.geometry import (Boosted, Bumped, Flat, NegSchwarzschild, PosSchwarzschild,
                             PowerLaw, Resolution, Tabulated, Weight, evaluate_profile,
                             is_superharmonic_at, mean_curvature_transform, profile_from_dict,
                             profile_to_dict, rescale_resolution, scalar_curvature, sphere_area,
                             sphere_geometry, validate_profile)
from zaslab.mass import hawking_mass, hawking_mass_closed_form

CASES = [
    (Flat(), ("flat", {}), [0.3, 1.0, 7.0]),
    (NegSchwarzschild(-1.0), ("negSchwarzschild", {"m": -1}), [0.6, 1.0, 10.0]),
    (PosSchwarzschild(1.0), ("posSchwarzschild", {"m": 1}), [0.3, 0.5, 4.0]),
    (PowerLaw(0.25, 1.0), ("powerLaw", {"alpha": 0.25, "r0": 1}), [1.1, 2.0, 9.0]),
    (PowerLaw(0.75, 1.0), ("powerLaw", {"alpha": 0.75, "r0": 1}), [1.01, 3.0]),
    (Boosted(0.5, 1.0), ("boosted", {"r0": 0.5, "a": 1}), [0.6, 1.0, 5.0]),
]


@pytest.mark.parametrize("profile,sym,radii", CASES, ids=lambda x: getattr(x, "label", None))
def test_derivatives_match_symbolic(profile, sym, radii):
    expr = o.phi_expr(sym[0], **sym[1])
    for x in radii:
        np.testing.assert_allclose(evaluate_profile(profile, x), o.derivs(expr, x),
                                   rtol=1e-12, atol=1e-13)


def test_documented_derivative_values():
    assert evaluate_profile(NegSchwarzschild(-1.0), 1.0) == (0.5, 0.5, -1.0)
    phi, dphi, _ = evaluate_profile(Boosted(0.5, 1.0), 1.0)
    assert phi == pytest.approx(1.0) and dphi == pytest.approx(0.5)


def test_domain_checks():
    with pytest.raises(DomainError):
        NegSchwarzschild(-1.0).phi(0.4)
    with pytest.raises(DomainError):
        PowerLaw(0.25, 1.0).phi(1.0)      # endpoint excluded: phi' blows up
    assert NegSchwarzschild(-1.0).phi(0.5) == 0.0
    with pytest.raises(DomainError):
        NegSchwarzschild(1.0)
    with pytest.raises(DomainError):
        PosSchwarzschild(-1.0)


def test_sphere_geometry_neg_schwarzschild():
    geo = sphere_geometry(NegSchwarzschild(-1.0), 1.0)
    assert geo.area == pytest.approx(4 * math.pi * 0.0625, rel=1e-15)
    assert geo.areal_radius == pytest.approx(0.25)
    assert geo.mean_curvature == pytest.approx(24.0, rel=1e-14)
    fd = o.fd_mean_curvature(o.mp_fn(o.phi_expr("negSchwarzschild", m=-1)), mp.mpf(1))
    assert geo.mean_curvature == pytest.approx(fd, rel=1e-9)


def test_horizon_is_minimal():
    assert sphere_geometry(PosSchwarzschild(1.0), 0.5).mean_curvature == pytest.approx(0, abs=1e-14)


@pytest.mark.parametrize("profile,sym,radii", CASES, ids=lambda x: getattr(x, "label", None))
def test_mean_curvature_matches_area_variation(profile, sym, radii):
    f = o.mp_fn(o.phi_expr(sym[0], **sym[1]))
    for x in radii:
        H = sphere_geometry(profile, x).mean_curvature
        assert H == pytest.approx(o.fd_mean_curvature(f, mp.mpf(x)), rel=1e-8, abs=1e-10)


def test_mean_curvature_transform():
    assert mean_curvature_transform(0.5, 0.5, 2.0) == pytest.approx(24.0)
    # as phi_bar -> 0 the normal-derivative term dominates
    for pb in (1e-2, 1e-4, 1e-6):
        ratio = mean_curvature_transform(pb, 1.0, 3.0) * pb**3 / 4.0
        assert abs(ratio - 1.0) <= pb
    with pytest.raises(DomainError):
        mean_curvature_transform(0.0, 1.0, 1.0)


def test_scalar_curvature_values():
    assert scalar_curvature(NegSchwarzschild(-1.0), 1.0) == 0.0
    b = Boosted(0.5, 1.0)
    lap = float(o.fd_laplacian(o.mp_fn(o.phi_expr("boosted", r0=0.5, a=1)), mp.mpf(1)))
    assert lap < 0
    assert scalar_curvature(b, 1.0) == pytest.approx(-8 * lap, rel=1e-6)
    assert scalar_curvature(b, 1.0) > 0
    assert is_superharmonic_at(b, 1.0)


@settings(max_examples=40, deadline=None)
@given(m=st.floats(0.1, 5.0), s=st.floats(0.05, 20.0))
def test_schwarzschild_scalar_flat(m, s):
    assert is_superharmonic_at(PosSchwarzschild(m), s)
    assert is_superharmonic_at(NegSchwarzschild(-m), m / 2 + s)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.0, 3.0), r0=st.floats(0.1, 2.0), f=st.floats(1.01, 30.0))
def test_boosted_scalar_curvature_symbolic(a, r0, f):
    x = r0 * f
    expr = o.scalar_curvature_expr(o.phi_expr("boosted", r0=r0, a=a))
    ref = float(expr.subs(o.r, sp.Rational(x)).evalf(30))
    assert scalar_curvature(Boosted(r0, a), x) == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_harmonic_boosted_curvature_exact_near_singularity():
    # a = 0 gives phi = 1 - r0/r, harmonic; phi**-5 would amplify rounding
    assert scalar_curvature(Boosted(1.0, 0.0), 1.01171875) == 0.0
    assert scalar_curvature(NegSchwarzschild(-1.0), 0.5 + 1e-6) == 0.0


@settings(max_examples=60, deadline=None)
@given(m=st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 1e-3), f=st.floats(1.05, 50.0))
def test_hawking_literal_equals_closed_form(m, f):
    p = NegSchwarzschild(m) if m < 0 else PosSchwarzschild(m)
    x = abs(m) / 2 * f
    assert hawking_mass(p, x) == pytest.approx(hawking_mass_closed_form(p, x), rel=1e-9, abs=1e-12)
    assert hawking_mass(p, x) == pytest.approx(m, rel=1e-9)


def test_area_formula():
    p = Boosted(0.5, 1.0)
    assert sphere_area(p, 2.0) == pytest.approx(4 * math.pi * 4 * p.phi(2.0) ** 4)


def test_validation_flags():
    v = validate_profile(NegSchwarzschild(-1.0))
    assert v.positive and v.asymptotically_flat and v.zas and v.regular
    assert v.nonnegative_scalar_curvature and v.min_scalar_curvature == 0.0
    v = validate_profile(PowerLaw(0.25, 1.0))
    assert v.zas and not v.regular
    assert not validate_profile(Flat()).zas
    assert not validate_profile(PosSchwarzschild(1.0)).zas
    assert validate_profile(Boosted(0.5, 1.0)).regular


def test_validation_detects_negative_curvature():
    dented = Bumped(Flat(), -0.3, 3.0, 1.0)
    v = validate_profile(dented)
    assert not v.nonnegative_scalar_curvature
    assert v.min_scalar_curvature < 0


@pytest.mark.parametrize("profile", [c[0] for c in CASES], ids=lambda p: p.label)
def test_profile_roundtrip(profile):
    doc = profile_to_dict(profile)
    assert profile_from_dict(doc) == profile


def test_profile_parse_errors():
    with pytest.raises(ParseError):
        profile_from_dict({"kind": "nope"})
    with pytest.raises(ParseError):
        profile_from_dict({"kind": "flat", "extra": 1})
    with pytest.raises(ParseError):
        profile_from_dict({"kind": "negSchwarzschild", "params": {}})
    with pytest.raises(ParseError):
        profile_from_dict({"kind": "negSchwarzschild", "params": {"m": -1, "q": 2}})


def test_tabulated_spline_and_range():
    rs = np.linspace(1.0, 50.0, 400)
    tab = Tabulated(tuple((float(x), 1.0 + 0.5 / x) for x in rs))
    assert tab.phi(3.3) == pytest.approx(1 + 0.5 / 3.3, rel=1e-6)
    with pytest.raises(InterpolationError):
        tab.phi(60.0)
    with pytest.raises(DomainError):
        Tabulated(((1.0, 1.0), (0.5, 1.0), (2.0, 1.0), (3.0, 1.0)))
    assert profile_from_dict(profile_to_dict(tab)) == tab


def test_bump_is_local_and_smooth():
    base = NegSchwarzschild(-1.0)
    b = Bumped(base, 0.25, 4.0, 2.0)
    for x in (0.6, 1.9, 6.1, 50.0):
        assert b.derivs(x) == base.derivs(x)
    f = lambda x: b.phi(x)
    for x in (2.5, 4.0, 5.3):
        assert b.derivs(x)[1] == pytest.approx(o.fd_first(f, x, 1e-4), rel=1e-6, abs=1e-9)
        df = lambda y: b.derivs(y)[1]
        assert b.derivs(x)[2] == pytest.approx(o.fd_first(df, x, 1e-4), rel=1e-5, abs=1e-8)
    with pytest.raises(DomainError):
        Bumped(base, 0.1, 0.6, 0.2)      # support reaches the singular sphere
    with pytest.raises(DomainError):
        Bumped(Flat(), -4.0, 3.0, 1.0)   # phi would turn negative


def test_derivs_near_matches_derivs():
    for p in (NegSchwarzschild(-1.0), Boosted(0.5, 1.0), PowerLaw(0.25, 1.0)):
        for d in (0.3, 1e-3):
            np.testing.assert_allclose(p.derivs_near(d), p.derivs(p.r_min + d), rtol=1e-10)


def test_rescaling_rejects_nonpositive_weight():
    res = Resolution(NegSchwarzschild(-1.0))
    bad = Weight(lambda x: 1.0 - 2.0 * math.exp(-x), lambda x: 2.0 * math.exp(-x))
    with pytest.raises(DomainError):
        rescale_resolution(res, bad)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_rescaled_conformal_function_preserves_metric(seed):
    p = Boosted(0.5, 1.0)
    lam = Weight.random_smooth(np.random.default_rng(seed))
    res = rescale_resolution(Resolution(p), lam)
    for x in (0.7, 2.0):
        pb, _ = res.conformal_function(x)
        assert pb * res.background_factor(x) == pytest.approx(p.phi(x), rel=1e-14)
