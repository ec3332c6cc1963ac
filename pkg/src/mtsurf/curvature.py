"""Fundamental forms, mean curvature, marginally-trapped defects and Gauss curvature.

Two independent paths are provided wherever a closed form exists: a generic
engine that works on the jets of any immersion and the closed formulas of the
individual surface families.  The mean curvature vector is the trace
H = g^{ab} II_ab.
"""
import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import surfaces as S
from .jet import InsufficientOrder, Jet, JetError
from .spaces import (
    EUC,
    HYP,
    GeometryError,
    TangentVec,
    christoffels,
    metric_form,
    metric_matrix,
    symplectic_form,
)

LAGRANGIAN_TOL = 1e-8
MT_TOL = 1e-8
MINIMAL_TOL = 1e-8
WEINGARTEN_TOL = 1e-6
DET_TOL = 1e-12
# a second fundamental form smaller than this fraction of the raw
# accelerations is indistinguishable from roundoff
ACC_FLOOR = 1e-8


class DegenerateInducedMetric(ValueError):
    pass


class PhaseUnwrapError(ValueError):
    pass


def _vec(z1, z2, i, j):
    return TangentVec(z1.partial(i, j), z2.partial(i, j))


def _metric_plus_norm(G):
    return float(np.linalg.norm(G, 2))


@dataclass
class FundamentalData:
    g: np.ndarray
    g_inv: np.ndarray
    II: list
    H: TangentVec
    mt_defect: float
    lagrangian_defect: float
    signature: str
    tangents: tuple = ()
    scale: float = 0.0
    h_scale: float = 0.0

    @property
    def mt_relative(self):
        return abs(self.mt_defect) / self.scale if self.scale > 0 else 0.0

    @property
    def is_minimal(self):
        return self.H.norm_plus() <= MINIMAL_TOL * self.h_scale


def fundamental_data(imm, p):
    """Induced metric, second fundamental form and mean curvature at ``p``."""
    z1, z2 = imm.chart(p, 2)
    space = imm.space
    pt = (z1.value, z2.value)
    X = (_vec(z1, z2, 1, 0), _vec(z1, z2, 0, 1))
    XX = {
        (0, 0): _vec(z1, z2, 2, 0),
        (0, 1): _vec(z1, z2, 1, 1),
        (1, 1): _vec(z1, z2, 0, 2),
    }
    G = metric_matrix(space, *pt)
    Xr = np.array([x.real_components() for x in X])  # 2 x 4
    g = Xr @ G @ Xr.T
    det = np.linalg.det(g)
    gscale = max(1.0, float(np.abs(g).max()))
    if abs(det) <= DET_TOL * gscale * gscale:
        raise DegenerateInducedMetric(f"det g = {det:.3g} at {tuple(p)}")
    g_inv = np.linalg.inv(g)
    Gam = christoffels(space, *pt)

    def normal_part(V):
        coeffs = g_inv @ (Xr @ G @ V)
        return V - coeffs @ Xr

    II = [[None, None], [None, None]]
    acc_norm = {}
    for (a, b), v in XX.items():
        raw, conn = v.real_components(), np.einsum("kij,i,j->k", Gam, Xr[a], Xr[b])
        acc = raw + conn
        acc_norm[a, b] = acc_norm[b, a] = np.linalg.norm(raw) + np.linalg.norm(conn)
        II[a][b] = II[b][a] = normal_part(acc)
    Hr = sum(g_inv[a, b] * II[a][b] for a in range(2) for b in range(2))
    # size of the terms summed into H, so cancellations do not shrink the scale
    gmax = float(np.abs(g_inv).max())
    h_scale = gmax * sum(np.linalg.norm(II[a][b]) for a in range(2) for b in range(2))
    h_scale = max(h_scale, ACC_FLOOR * gmax * sum(acc_norm.values()))
    mt = float(Hr @ G @ Hr)
    lag = abs(symplectic_form(space, *pt, X[0].v1, X[0].v2, X[1].v1, X[1].v2, check=False))
    if det < 0:
        sig = "Lorentzian"
    else:
        sig = "Riemannian"
    return FundamentalData(
        g=g,
        g_inv=g_inv,
        II=[[TangentVec.from_real(II[a][b]) for b in range(2)] for a in range(2)],
        H=TangentVec.from_real(Hr),
        mt_defect=mt,
        lagrangian_defect=float(lag),
        signature=sig,
        tangents=X,
        scale=_metric_plus_norm(G) * h_scale**2,
        h_scale=float(h_scale),
    )


# ---------------------------------------------------------------------------
# Gauss curvature


def brioschi(E, F, G):
    """Gauss curvature from jets (order >= 2) of the first fundamental form."""
    if min(E.order, F.order, G.order) < 2:
        raise InsufficientOrder("Brioschi formula needs second derivatives of the metric")
    e, f, g = E.value.real, F.value.real, G.value.real
    Eu, Ev = E.partial(1, 0).real, E.partial(0, 1).real
    Fu, Fv = F.partial(1, 0).real, F.partial(0, 1).real
    Gu, Gv = G.partial(1, 0).real, G.partial(0, 1).real
    Evv, Fuv, Guu = E.partial(0, 2).real, F.partial(1, 1).real, G.partial(2, 0).real
    m1 = np.array([
        [-Evv / 2 + Fuv - Guu / 2, Eu / 2, Fu - Ev / 2],
        [Fv - Gu / 2, e, f],
        [Gv / 2, f, g],
    ])
    m2 = np.array([
        [0.0, Ev / 2, Gu / 2],
        [Ev / 2, e, f],
        [Gu / 2, f, g],
    ])
    det = e * g - f * f
    if abs(det) <= DET_TOL:
        raise DegenerateInducedMetric(f"EG - F^2 = {det:.3g}")
    return float((np.linalg.det(m1) - np.linalg.det(m2)) / det**2)


def induced_metric_jets(imm, p, order=2):
    """Jets of (E, F, G) of the given order at ``p``."""
    z1, z2 = imm.chart(p, order + 1)
    Xu = (z1.du(), z2.du())
    Xv = (z1.dv(), z2.dv())
    a, b = z1.truncate(order), z2.truncate(order)

    def G(x, y):
        return metric_form(imm.space, a, b, x[0], x[1], y[0], y[1], check=False)

    return G(Xu, Xu), G(Xu, Xv), G(Xv, Xv)


def _closed_gauss_graph(graph, p):
    s = graph.sigma0(p, 2)
    sb = s.conj()
    s0, sb0 = s.value, sb.value
    d, db = (lambda j: j.wirtinger(1, 0)), (lambda j: j.wirtinger(0, 1))
    term = 2 * (s.wirtinger(0, 2) - sb.wirtinger(2, 0))
    term += (d(sb) ** 2 - db(sb) * db(s)) / sb0
    term -= (db(s) ** 2 - d(s) * d(sb)) / s0
    return (1j / (4 * abs(s0) ** 2) * term).real


def gauss_curvature(imm, p, method="generic"):
    if method == "generic":
        return brioschi(*induced_metric_jets(imm, p, 2))
    if method == "closed":
        if not isinstance(imm, S.HyperbolicGraph):
            raise ValueError(f"no closed Gauss curvature formula for {imm.kind}")
        return _closed_gauss_graph(imm, p)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# closed-form criteria


def mt_criterion_euclidean(section, points, branch="either"):
    """Residual of the null mean curvature equation at each point."""
    return np.array([section.residual_eq2(p, branch) for p in points])


def second_fundamental_closed_euclidean(section, p):
    return section.beta_coefficients(p)


def _ehat(graph, p, root=None):
    h = graph.potential(p, 2)
    em = graph.half_angle(p, 1, root)  # e^{-i phi}
    return em * h.truncate(1).exp()


def graph_criterion(graph, p):
    """(|Im d e^{-i phi + h}|, |Re d e^{-i phi + h}|) at a point."""
    w = _ehat(graph, p).wirtinger(1, 0)
    return abs(w.imag), abs(w.real)


def unwrap_phase(values, period):
    """Continuously unwrap a row-major sequence of angles; fail on jumps > period/4."""
    out = []
    prev = None
    for v in values:
        if v is None:
            out.append(None)
            continue
        if prev is None:
            out.append(v)
        else:
            k = round((prev - v) / period)
            w = v + k * period
            if abs(w - prev) > period / 4:
                raise PhaseUnwrapError(f"angle jump {abs(w - prev):.3g} exceeds {period / 4:.3g}")
            out.append(w)
        prev = out[-1]
    return out


def _unwrap_grid(rows, period):
    """Unwrap along rows; each row starts from the unwrapped first entry of the row above."""
    firsts = unwrap_phase([r[0] for r in rows], period)
    out = []
    for f0, r in zip(firsts, rows):
        out.append(unwrap_phase([f0] + list(r[1:]), period))
    return out


def mt_criterion_hyperbolic(graph, us, vs):
    """Max residuals (minus, plus) over the grid; raises if the angle cannot be unwrapped."""
    phis = [[graph.lagrangian_angle((u, v)) for v in vs] for u in us]
    _unwrap_grid(phis, math.pi)
    rm, rp = 0.0, 0.0
    for u in us:
        for v in vs:
            a, b = graph_criterion(graph, (u, v))
            rm, rp = max(rm, a), max(rp, b)
    return rm, rp


def jh_closed(graph, p):
    """The tangent field J H from the potential, as a tangent vector."""
    s = graph.sigma0(p, 1)
    F = graph.potential(p, 1 + 1).d()
    sv, sbv = s.value, s.value.conjugate()
    ds = s.wirtinger(1, 0)
    dsb = s.conj().wirtinger(1, 0)
    a = -(dsb / sbv - ds / sv - 4 * F.value) / (2 * sv)
    z1, z2 = graph.chart(p, 1)
    Xu, Xv = _vec(z1, z2, 1, 0), _vec(z1, z2, 0, 1)
    return Xu * a.real + Xv * a.imag


def weingarten_ode_residual(f, tau, x, interpretation="powers"):
    """Residual of the profile ODE for non-trivial tau, under either reading of f^4, f^3."""
    tau = complex(tau)
    xj = Jet.lift("u", (float(x), 0.0), 4)
    fj = f.eval_jet({"x": xj}) if hasattr(f, "eval_jet") else f(xj)
    d = [fj.partial(k, 0).real for k in range(5)]
    f0, f1, f2, f3, f4 = d
    if interpretation == "powers":
        F4, F3 = f0**4, f0**3
    elif interpretation == "derivatives":
        F4, F3 = f4, f3
    else:
        raise ValueError("interpretation must be 'powers' or 'derivatives'")
    r = (tau * tau).real
    return 4 * r * (f2 + f1 * f1) * (F4 + 2 * f1 * F3 + 2 * f2 * f2) - (1 + 4 * r) * (F3 + 2 * f1 * f2) ** 2


# ---------------------------------------------------------------------------
# closed vs generic comparisons


def _param_vector(X, c):
    return X[0] * c[0] + X[1] * c[1]


def _ii_bilinear(fd, a, b):
    out = TangentVec(0j, 0j)
    for i in range(2):
        for j in range(2):
            out = out + fd.II[i][j] * (a[i] * b[j])
    return out


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def _vec_rel(a, b):
    return (a - b).norm_plus() / max(1.0, b.norm_plus())


def _best_factor(closed, generic):
    """Least-squares real factor c with closed ~ c * generic."""
    x, y = closed.real_components(), generic.real_components()
    yy = float(y @ y)
    return float(x @ y) / yy if yy > 0 else 0.0


RANK_ONE_METRIC_FACTOR = 0.5
JH_FACTOR = 1.0


def compare_point(imm, p):
    """Discrepancies between closed-form and generic quantities at a point."""
    out = {}
    if isinstance(imm, S.EuclideanSection):
        fd = fundamental_data(imm, p)
        frames = imm.frame(p)
        for (i, j), clo in imm.second_fundamental_frame(p).items():
            gen = _ii_bilinear(fd, frames[i][1], frames[j][1])
            out[f"II_{i + 1}{j + 1}"] = _vec_rel(clo, gen)
        out["residual_vs_mt"] = abs(imm.residual_eq2(p)) if fd.mt_relative < MT_TOL else 0.0
    elif isinstance(imm, S.HyperbolicGraph):
        kg = gauss_curvature(imm, p, "generic")
        kc = gauss_curvature(imm, p, "closed")
        out["K"] = _rel(kc, kg)
        fd = fundamental_data(imm, p)
        JH = TangentVec(1j * fd.H.v1, 1j * fd.H.v2)
        out["JH"] = _vec_rel(jh_closed(imm, p) * JH_FACTOR, JH)
    elif isinstance(imm, S.EuclideanRankOne):
        fd = fundamental_data(imm, p)
        cf = imm.closed_forms(p)
        c = RANK_ONE_METRIC_FACTOR
        out["E"] = _rel(c * cf["E"], fd.g[0, 0])
        out["F"] = _rel(c * cf["F"], fd.g[0, 1])
        out["G"] = _rel(c * cf["G"], fd.g[1, 1])
        out["H"] = _vec_rel(cf["H_aligned"], fd.H)
    elif isinstance(imm, S.HyperbolicRankOne):
        fd = fundamental_data(imm, p)
        gss, gst, gtt = imm.closed_metric(p)
        out["g_ss"] = _rel(gss, fd.g[0, 0])
        out["g_st"] = _rel(gst, fd.g[0, 1])
        out["g_tt"] = _rel(gtt, fd.g[1, 1])
        out["H_mu1"] = abs(fd.H.v1)
    return out


# ---------------------------------------------------------------------------
# classification over a grid


@dataclass
class MTReport:
    family: str
    space: str
    param_names: tuple
    grid: dict
    stats: dict
    verdicts: dict
    points: list = field(default_factory=list)
    exceptions: list = field(default_factory=list)

    def to_dict(self):
        return {
            "family": self.family,
            "space": self.space,
            "param_names": list(self.param_names),
            "grid": self.grid,
            "stats": self.stats,
            "verdicts": self.verdicts,
            "exceptions": self.exceptions,
        }


def _closed_residuals(imm, p):
    if isinstance(imm, S.EuclideanSection):
        mod, _, phi = imm.angle_data(p, 0)
        return {"sigma": abs(mod.value), "phi": phi.value.real,
                "residual_eq1": imm.residual_eq1(p), "residual_eq2": imm.residual_eq2(p)}
    if isinstance(imm, S.HyperbolicGraph):
        rm, rp = graph_criterion(imm, p)
        return {"sigma": abs(imm.sigma0(p, 0).value), "phi": imm.lagrangian_angle(p),
                "residual_minus": rm, "residual_plus": rp}
    return {}


def evaluate_point(imm, p, with_curvature=True):
    fd = fundamental_data(imm, p)
    row = {
        "mt_defect": fd.mt_defect,
        "mt_relative": fd.mt_relative,
        "lagrangian_defect": fd.lagrangian_defect,
        "H_norm": fd.H.norm_plus(),
        "minimal": fd.is_minimal,
        "signature": fd.signature,
    }
    if with_curvature:
        row["K"] = gauss_curvature(imm, p, "generic")
    row.update(_closed_residuals(imm, p))
    return row


def grid_points(us, vs):
    return [(float(u), float(v)) for u in us for v in vs]


def _safe_eval(imm, p, with_curvature):
    try:
        return evaluate_point(imm, p, with_curvature), None
    except (GeometryError, JetError, ArithmeticError, ValueError) as exc:
        return None, {"point": list(p), "error": type(exc).__name__, "message": str(exc)}


def _stat(values):
    vals = [abs(v) for v in values if v is not None]
    if not vals:
        return None
    return {"max": max(vals), "mean": sum(vals) / len(vals)}


def classify(imm, us, vs, tolerances=None, threads=1, with_curvature=True):
    """Evaluate every grid point and aggregate defects into verdicts."""
    tol = {"lagrangian": LAGRANGIAN_TOL, "mt": MT_TOL, "weingarten": WEINGARTEN_TOL, "minimal": MINIMAL_TOL}
    tol.update(tolerances or {})
    pts = grid_points(us, vs)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda q: _safe_eval(imm, q, with_curvature), pts))
    else:
        results = [_safe_eval(imm, q, with_curvature) for q in pts]
    rows = [r for r, _ in results]
    exceptions = [e for _, e in results if e is not None]
    good = [r for r in rows if r is not None]

    stats = {}
    for key in ("mt_defect", "mt_relative", "lagrangian_defect", "H_norm", "K", "sigma",
                "residual_eq1", "residual_eq2", "residual_minus", "residual_plus"):
        vals = [r[key] for r in good if key in r]
        if vals:
            stats[key] = _stat(vals)

    phis = [r.get("phi") if r is not None else None for r in rows]
    if any(v is not None for v in phis):
        period = 2 * math.pi if imm.space == EUC else math.pi
        grid_rows = [phis[i * len(vs):(i + 1) * len(vs)] for i in range(len(us))]
        try:
            flat = [x for row in _unwrap_grid(_fill_rows(grid_rows), period) for x in row]
            vals = [x for x in flat if x is not None]
            stats["phi"] = {"min": min(vals), "max": max(vals)}
        except PhaseUnwrapError as exc:
            exceptions.append({"point": None, "error": "PhaseUnwrapError", "message": str(exc)})

    def all_ok(pred):
        return bool(good) and all(pred(r) for r in good)

    verdicts = {
        "lagrangian": all_ok(lambda r: r["lagrangian_defect"] <= tol["lagrangian"]),
        "marginally_trapped": all_ok(lambda r: r["mt_relative"] <= tol["mt"]),
        "minimal": all_ok(lambda r: r["minimal"]),
    }
    if with_curvature:
        verdicts["weingarten"] = all_ok(lambda r: abs(r["K"]) <= tol["weingarten"])
    grid = {
        imm.param_names[0]: {"min": float(us[0]), "max": float(us[-1]), "count": len(us)},
        imm.param_names[1]: {"min": float(vs[0]), "max": float(vs[-1]), "count": len(vs)},
    }
    return MTReport(imm.kind, str(imm.space.value), tuple(imm.param_names), grid, stats, verdicts, rows, exceptions)


def _fill_rows(rows):
    # a row whose first entry failed starts from its first valid entry
    out = []
    for r in rows:
        r = list(r)
        while r and r[0] is None:
            r.pop(0)
        out.append(r or [0.0])
    return out
