import cmath
import json
import math
from pathlib import Path

import numpy as np
import pytest

from mtsurf import curvature as C
from mtsurf import surfaces as S
from mtsurf.jet import Jet

ORACLE = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())
TAU45 = (1 + 1j) / math.sqrt(2)


def grid(a, b, n=20):
    return [(u, v) for u in np.linspace(a[0], a[1], n) for v in np.linspace(b[0], b[1], n)]


# Euclidean sections -----------------------------------------------------------

def test_section_xixibar_matches_oracle():
    o = ORACLE["section_xixibar"]
    sec = S.euclidean_section("xi*xibar")
    assert sec.graph_function((1, 0), 0).value == pytest.approx(complex(*o["F"]))
    assert sec.sigma((1, 0), 0).value == pytest.approx(complex(*o["sigma"]))
    mod, half, phi = sec.angle_data((1, 0), 1)
    assert mod.value == pytest.approx(complex(*o["abs_sigma"]))
    assert mod.wirtinger(1, 0) == pytest.approx(complex(*o["d_abs_sigma"]))
    assert mod.wirtinger(0, 1) == pytest.approx(complex(*o["dbar_abs_sigma"]))
    assert abs(phi.value) == pytest.approx(math.pi)


def test_constant_support_is_degenerate():
    with pytest.raises(S.DegenerateSection):
        S.euclidean_section("1.5").angle_data((0.2, 0.1), 1)


@pytest.mark.parametrize("r", ["R^2", "exp(R)", "sin(R) + R^3", "R/(1+R^2)"])
def test_rotational_sections_satisfy_mt_equation(r):
    sec = S.euclidean_section(r)
    for p in grid((0.1, 0.9), (0.1, 0.9), 6):
        assert sec.residual_eq2(p) <= 1e-10


def test_section_reproduced_by_generic_immersion():
    sec = S.euclidean_section("xi*xibar")
    gen = S.generic_immersion(("u", "v"), ("0.5*(1+u^2+v^2)^2*u", "0.5*(1+u^2+v^2)^2*v"))
    for p in [(0.3, -0.2), (0.7, 0.4)]:
        for a, b in zip(sec.chart(p), gen.chart(p)):
            assert np.allclose(a.c, b.c, rtol=1e-13, atol=1e-13)


# tori ------------------------------------------------------------------------------

def test_torus_examples():
    t = S.euclidean_torus("1")
    assert abs(t.point((1.0, 0.7))[1]) <= 1e-15
    t = S.euclidean_torus("1 + 0.5*cos(2*theta)")
    assert abs(t.point((1.0, 0.0))[1]) <= 1e-15


def test_torus_extends_through_origin_and_negative_R():
    t = S.euclidean_torus("a + b*cos(n*theta)", params={"a": 1, "b": 0.5, "n": 2})
    for R in (-1.5, 0.0, 0.3):
        fd = C.fundamental_data(t, (R, 0.4))
        assert fd.lagrangian_defect <= 1e-10


def test_torus_orientation_flip():
    a = S.euclidean_torus("1 + 0.5*cos(theta)")
    b = S.euclidean_torus("1 + 0.5*cos(theta)", orientation_sign=-1)
    assert b.point((0.5, 1.0))[1] == pytest.approx(-a.point((0.5, 1.0))[1])
    with pytest.raises(S.FamilySpecError):
        S.euclidean_torus("1", orientation_sign=2)


def test_perturbed_torus_is_not_lagrangian():
    spec = {
        "kind": "GenericImmersion",
        "exprs": {
            "z1_re": "R*cos(theta)",
            "z1_im": "R*sin(theta)",
            "z2_re": "0.5*((1-R^2)*L0 - (1+R^2)*L1)*0 + 0.5*((1-R^2)*(1+0.5*cos(2*theta))*cos(theta) - (1+R^2)*(-sin(2*theta))*sin(theta)) + eps*R^2*cos(2*theta)",
            "z2_im": "0.5*((1-R^2)*(1+0.5*cos(2*theta))*sin(theta) + (1+R^2)*(-sin(2*theta))*cos(theta)) + eps*R^2*sin(2*theta)",
        },
        "params": {"eps": 0.1, "L0": 0, "L1": 0, "variables": ["R", "theta"]},
    }
    imm = S.FamilySpec.from_dict(spec).build()
    worst = max(C.fundamental_data(imm, p).lagrangian_defect for p in grid((-2, 2), (0, 2 * math.pi), 8))
    assert worst > 1e-3


# Euclidean rank one --------------------------------------------------------------

def test_rank_one_equator_examples():
    imm = S.euclidean_rank_one("equator", "s*t", "t")
    cf = imm.closed_forms((0.3, 0.8))
    assert cf["k"] == pytest.approx(0, abs=1e-15)
    assert cf["E"] == pytest.approx(0, abs=1e-15)
    assert cf["F"] == pytest.approx(-1)
    assert cf["h112"] == pytest.approx(-1)


@pytest.mark.parametrize("R0", ["0.3", "0.5", "2.0"])
def test_latitude_geodesic_curvature(R0):
    imm = S.euclidean_rank_one("latitude", "t", "t", params={"R0": float(R0)})
    assert imm.geodesic_curvature((0.4, 1.0)) == pytest.approx(ORACLE["latitude_k"][R0], rel=1e-12)
    assert imm.geodesic_curvature((0.4, 1.0)) == pytest.approx((1 - float(R0) ** 2) / (2 * float(R0)), rel=1e-12)


def test_rank_one_errors():
    with pytest.raises(S.DegenerateRankOne):
        S.euclidean_rank_one("equator", "t", "s").closed_forms((0.2, 0.3))
    with pytest.raises(S.NotArcLength):
        S.euclidean_rank_one(("2*cos(s)", "2*sin(s)"), "t", "t").chart((0.1, 0.5))
    with pytest.raises(S.FamilySpecError):
        S.euclidean_rank_one("meridian", "t", "t")


@pytest.mark.parametrize(
    "curve,a,b,params",
    [
        ("equator", "s+t", "t", {}),
        ("equator", "s^2 + 1", "t*(1+s^2)", {}),
        ("latitude", "cos(s)", "2*t + s", {"R0": 0.5}),
        ("latitude", "1", "t^2 + 1", {"R0": 0.8}),
    ],
)
def test_rank_one_metric_matches_closed_forms(curve, a, b, params):
    imm = S.euclidean_rank_one(curve, a, b, params)
    for p in grid((0.0, 1.0), (0.5, 1.5), 5):
        cf = imm.closed_forms(p)
        g = C.fundamental_data(imm, p).g
        scale = max(1.0, abs(cf["E"]), abs(cf["F"]))
        assert abs(g[0][0] - C.RANK_ONE_METRIC_FACTOR * cf["E"]) <= 1e-9 * scale
        assert abs(g[0][1] - C.RANK_ONE_METRIC_FACTOR * cf["F"]) <= 1e-9 * scale
        assert abs(g[1][1]) <= 1e-9 * scale


# hyperbolic graphs -------------------------------------------------------------------

def test_linear_potential():
    g = S.hyperbolic_profile_graph("x", tau=1)
    s0 = g.sigma0((0.2, 0.1), 0).value
    assert s0 == pytest.approx(1)
    assert g.lagrangian_angle((0.2, 0.1)) == pytest.approx(0)


def test_zero_potential_is_degenerate():
    g = S.hyperbolic_graph("0*u")
    with pytest.raises(S.DegenerateGraph):
        g.sigma0((0.1, 0.1), 0)
    with pytest.raises(S.DegenerateGraph):
        g.chart((0.1, 0.1), 2)


def test_quadratic_sigma0_matches_oracle():
    g = S.hyperbolic_graph("t^2", tau=TAU45)
    for item in ORACLE["quadratic_sigma0"]:
        p, t = tuple(item["p"]), item["t"]
        s0 = g.sigma0(p, 0).value
        assert s0 == pytest.approx(complex(*item["sigma0"]), abs=1e-12)
        assert s0 == pytest.approx(1j * (2 + 4 * t * t), abs=1e-12)
        # sigma0 from the chart agrees with the potential identity
        assert g.sigma0_from_chart(p, 0).value == pytest.approx(s0, rel=1e-12)


def test_profile_x2_matches_oracle():
    g = S.hyperbolic_profile_graph("x^2", tau=1)
    assert g.sigma0((0.5, 0), 0).value == pytest.approx(complex(*ORACLE["profile_x2_sigma0_at_half"]))
    assert g.lagrangian_angle((0.5, 0)) == pytest.approx(0)


def test_profile_with_vanishing_sigma0():
    # ln(x) has f'' + f'^2 = 0 for x > 0
    g = S.hyperbolic_profile_graph("ln(x)", tau=1)
    with pytest.raises(S.DegenerateGraph):
        g.sigma0((0.4, 0.0), 0)


def test_graph_reproduced_by_generic_immersion():
    g = S.hyperbolic_graph("t^2", tau=1)
    den = "((1-4*u^2)^2 + 16*u^2*v^2)"
    gen = S.generic_immersion(("u", "v"), (f"4*u*(1-4*u^2)/{den}", f"-16*u^2*v/{den}"), space="HypGeodesics")
    for p in [(0.1, 0.2), (-0.15, 0.05)]:
        for a, b in zip(g.chart(p), gen.chart(p)):
            assert np.allclose(a.c, b.c, rtol=1e-12, atol=1e-12)


def test_tau_must_be_unimodular():
    with pytest.raises(S.FamilySpecError):
        S.hyperbolic_profile_graph("x^2", tau=1.1)


GRAPHS = [
    ("t^2", TAU45),
    ("t^2 + 0.2*mu*mubar", TAU45),
    ("u^2 + v^2 + 0.3*(u^2 - v^2) + 0.5*u + 0.2*u^3", None),
    ("ln(cosh(t))", 1j),
]


@pytest.mark.parametrize("h,tau", GRAPHS)
def test_graph_invariants_on_grid(h, tau):
    g = S.hyperbolic_graph(h, tau=tau, r0=0.25)
    ref = None
    for p in grid((-0.4, 0.4), (-0.4, 0.4), 20):
        # Lagrangian by construction
        assert C.fundamental_data(g, p).lagrangian_defect <= 1e-10
        # e^{4 i phi} = (d^2 h + (dh)^2) / (dbar^2 h + (dbar h)^2)
        hj = g.potential(p, 2)
        ratio = (hj.wirtinger(2, 0) + hj.wirtinger(1, 0) ** 2) / (hj.wirtinger(0, 2) + hj.wirtinger(0, 1) ** 2)
        assert abs(cmath.exp(4j * g.lagrangian_angle(p)) - ratio) <= 1e-10
        # r - (ln|dh| + h) is constant
        diff = g.support(p).value.real - (math.log(abs(hj.wirtinger(1, 0))) + hj.value.real)
        ref = diff if ref is None else ref
        assert abs(diff - ref) <= 1e-10


@pytest.mark.parametrize("r", ["xi*xibar", "R^2 + 0.3*R*cos(theta)", "exp(u)*sin(v) + u^2"])
def test_sections_are_lagrangian_on_grid(r):
    sec = S.euclidean_section(r)
    for p in grid((0.1, 0.9), (0.1, 0.9), 20):
        assert C.fundamental_data(sec, p).lagrangian_defect <= 1e-10


def test_tori_are_lagrangian_on_grid():
    t = S.euclidean_torus("1 + 0.5*cos(2*theta)")
    pts = [(R, th) for R in np.linspace(-2, 2, 20) for th in np.linspace(0, 2 * math.pi, 20, endpoint=False)]
    assert max(C.fundamental_data(t, p).lagrangian_defect for p in pts) <= 1e-10


# Weingarten families -------------------------------------------------------------------

def _M(f_expr, params, x):
    j = f_expr.eval_jet({"x": Jet.lift("u", (x, 0), 2)}, params)
    return (j.partial(2, 0) + j.partial(1, 0) ** 2).real


def test_weingarten_profiles():
    fam = S.hyperbolic_weingarten_family("sinh", 1.0)
    for x in np.linspace(-1, 1, 9):
        assert _M(fam.f, fam.params, x) == pytest.approx(ORACLE["sinh_M"], rel=1e-13)
    fam = S.hyperbolic_weingarten_family("sin", 2.0)
    assert _M(fam.f, fam.params, math.pi / 8) == pytest.approx(ORACLE["sin_M_at_pi_8"], rel=1e-13)
    with pytest.raises(S.FamilySpecError):
        S.hyperbolic_weingarten_family("sinh", 0.0)


def test_weingarten_support_function():
    fam = S.hyperbolic_weingarten_family("sinh", 1.3, 0.2, r0=0.0)
    diffs = [fam.support(p).value.real - fam.closed_support(p) for p in grid((-0.4, 0.4), (-0.4, 0.4), 5) if abs(p[0]) > 1e-3]
    assert max(diffs) - min(diffs) <= 1e-12
    assert diffs[0] == pytest.approx(math.log(1.3))


# sphere family -------------------------------------------------------------------------------

def test_sphere_family_examples():
    fam = S.hyperbolic_sphere_family(2, 1.0)
    assert abs(fam.point((0.7, math.pi / 2))[1]) <= 1e-15
    mu1, mu2 = fam.point((1.0, 0.0))
    assert mu2 == pytest.approx(1)
    assert 1 + mu1 * mu2.conjugate() == pytest.approx(2)
    for th in np.linspace(0, 2 * math.pi, 20, endpoint=False):
        for R in (1e-3, 1e3):
            assert abs(fam.point((R, th))[1]) <= 1e-2


@pytest.mark.parametrize("n,c", [(2, 1.5), (3, 1), (4, 2)])
def test_sphere_profile_integrals(n, c):
    prof = S.SphereProfile(n, c)
    got = prof(Jet.lift("u", (0.7, 0), 2))
    assert got.value.real == pytest.approx(ORACLE[f"sphere_f_n{n}_c{c}"], rel=1e-9)
    # derivative of f is the given f'
    assert got.partial(1, 0).real == pytest.approx(0.7 / (0.7 ** (2 * n) + c * c), rel=1e-12)


def test_sphere_profile_without_quadrature():
    with pytest.raises(S.QuadratureUnavailable):
        S.SphereProfile(4, 2, quadrature=False)(Jet.lift("u", (0.5, 0), 1))
    with pytest.raises(S.FamilySpecError):
        S.SphereProfile(1, 1)


def test_sphere_chart_matches_graph():
    fam = S.hyperbolic_sphere_family(2, 1.0, tau=TAU45)
    g = fam.graph()
    for R, th in [(0.5, 0.3), (1.2, 2.0)]:
        mu1, mu2 = fam.point((R, th))
        assert g.point((mu1.real, mu1.imag))[1] == pytest.approx(mu2, rel=1e-12, abs=1e-13)


# hyperbolic rank one ---------------------------------------------------------------------

def test_hyperbolic_rank_one_metric():
    imm = S.hyperbolic_rank_one(("s", "0"), ("0", "t"))
    g_ss, g_st, g_tt = imm.closed_metric((0.0, 0.0))
    assert g_st == pytest.approx(ORACLE["hyp_rank_one_gst"])
    assert g_tt == 0
    fd = C.fundamental_data(imm, (0.1, 0.2))
    assert fd.g[1][1] == 0
    with pytest.raises(S.DegenerateRankOne):
        S.hyperbolic_rank_one(("s", "0"), ("s", "1")).closed_metric((0.1, 0.1))


# specs ---------------------------------------------------------------------------------------

def test_family_spec_json_round_trip():
    spec = S.FamilySpec("HypProfileGraph", {"f": "x^2"}, {}, tau=TAU45)
    back = S.FamilySpec.from_dict(json.loads(spec.to_json()))
    assert back == spec
    assert isinstance(back.build(), S.HyperbolicProfileGraph)


@pytest.mark.parametrize(
    "d",
    [
        {"kind": "Nope"},
        {"kind": "EucSection"},
        {"kind": "HypProfileGraph", "exprs": {"f": "x"}, "tau": [1.0, 1.0]},
        {"kind": "EucTorus", "exprs": {"L": "1"}, "params": {"r0": "x"}},
    ],
)
def test_family_spec_errors(d):
    with pytest.raises(S.FamilySpecError):
        S.FamilySpec.from_dict(d).build()


def test_every_kind_builds():
    specs = {
        "EucSection": {"exprs": {"r": "xi*xibar"}},
        "EucTorus": {"exprs": {"L": "1"}},
        "EucRankOne": {"exprs": {"a": "s", "b": "t"}, "params": {"curve": "equator"}},
        "HypGraph": {"exprs": {"h": "u^2"}},
        "HypProfileGraph": {"exprs": {"f": "x^2"}},
        "HypWeingartenFamily": {"params": {"kind": "sinh", "c0": 1}},
        "HypSphereFamily": {"params": {"n": 2, "c": 1}},
        "HypRankOne": {"exprs": {"mu1_re": "s", "mu1_im": "0", "mu2_re": "0", "mu2_im": "t"}},
        "GenericImmersion": {"exprs": {"z1_re": "u", "z1_im": "v", "z2_re": "u", "z2_im": "0"}},
    }
    assert set(specs) == set(S.KINDS)
    for kind, d in specs.items():
        imm = S.FamilySpec.from_dict({"kind": kind, **d}).build()
        assert imm.kind == kind
