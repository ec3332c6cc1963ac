"""Neutral Kaehler structures on the spaces of oriented geodesics.

Two single-chart spaces are modelled:

``EUC`` -- oriented lines of R^3, identified with TS^2 in the holomorphic
coordinates (xi, eta) (stereographic xi on the sphere, eta the fibre).

``HYP`` -- oriented geodesics of H^3, identified with P^1 x P^1 minus the
reflected diagonal, coordinates (mu1, mu2).

A tangent vector is given by its holomorphic components (v1, v2): the real
vector v1 d/dz1 + conj(v1) d/dconj(z1) + v2 d/dz2 + conj(v2) d/dconj(z2).  For a
curve z(t) these are simply dz/dt, and the real coordinate components are
(Re v1, Im v1, Re v2, Im v2).

Tensor products of complex one-forms are symmetrised,
``da db -> (da (x) db + db (x) da) / 2``.  The symplectic form follows the
convention ``Omega(X, Y) = G(J X, Y)``.

All metric functions are generic: point coordinates and vector components
may be complex numbers or :class:`~mtsurf.jet.Jet` instances.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .jet import Jet

DIAGONAL_TOL = 1e-12
CHART_LIMIT = 1e6


class SpaceId(str, Enum):
    EUC = "EucLines"
    HYP = "HypGeodesics"


EUC = SpaceId.EUC
HYP = SpaceId.HYP


class GeometryError(ValueError):
    pass


class OnReflectedDiagonal(GeometryError):
    pass


class ChartOverflow(GeometryError):
    pass


class SingularMetric(GeometryError):
    pass


@dataclass(frozen=True)
class GeodesicPoint:
    z1: complex
    z2: complex


@dataclass(frozen=True)
class TangentVec:
    v1: complex
    v2: complex

    def __add__(self, other):
        return TangentVec(self.v1 + other.v1, self.v2 + other.v2)

    def __sub__(self, other):
        return TangentVec(self.v1 - other.v1, self.v2 - other.v2)

    def __mul__(self, s):
        return TangentVec(self.v1 * s, self.v2 * s)

    __rmul__ = __mul__

    def __neg__(self):
        return TangentVec(-self.v1, -self.v2)

    def real_components(self):
        return np.array([self.v1.real, self.v1.imag, self.v2.real, self.v2.imag])

    @classmethod
    def from_real(cls, x):
        return cls(complex(x[0], x[1]), complex(x[2], x[3]))

    def norm_plus(self):
        """Positive-definite reference norm on the components."""
        return float(np.sqrt(abs(self.v1) ** 2 + abs(self.v2) ** 2))


def _cj(x):
    return x.conj() if isinstance(x, Jet) else complex(x).conjugate()


def _val(x):
    return x.value if isinstance(x, Jet) else complex(x)


def check_point(space, z1, z2):
    """Raise if the chart point is outside the supported region."""
    a, b = _val(z1), _val(z2)
    if space == EUC:
        if abs(a) > CHART_LIMIT:
            raise ChartOverflow(f"|xi| = {abs(a):.3g} beyond the chart limit")
    else:
        if abs(a) > CHART_LIMIT or abs(b) > CHART_LIMIT:
            raise ChartOverflow("point beyond the affine chart limit")
        if abs(1 + a * b.conjugate()) < DIAGONAL_TOL:
            raise OnReflectedDiagonal(f"|1 + mu1 conj(mu2)| < {DIAGONAL_TOL:g}")


def _sym(a1, b2, a2, b1):
    # symmetrised product (alpha beta)(X, Y) with alpha(X)=a1, beta(Y)=b2, alpha(Y)=a2, beta(X)=b1
    return (a1 * b2 + a2 * b1) * 0.5


def metric_form(space, z1, z2, x1, x2, y1, y2, check=True):
    """G(X, Y) for holomorphic components X=(x1,x2), Y=(y1,y2) at (z1, z2).

    Returns a real number (or a real-valued jet).
    """
    if check:
        check_point(space, z1, z2)
    if space == EUC:
        xi, eta = z1, z2
        xib, etab = _cj(xi), _cj(eta)
        w = 1 + xi * xib
        k = 2 * (xi * etab - xib * eta) / w
        t1 = _sym(x2, _cj(y1), y2, _cj(x1))  # d eta d xibar
        t2 = _sym(_cj(x2), y1, _cj(y2), x1)  # d etabar d xi
        t3 = _sym(x1, _cj(y1), y1, _cj(x1))  # d xi d xibar
        out = 2j / (w * w) * (t1 - t2 + k * t3)
    else:
        c = 1 + z1 * _cj(z2)
        s = (x1 * _cj(y2) + y1 * _cj(x2)) / (c * c)
        out = s.imag
    return out.real if not isinstance(out, Jet) else out


def metric(space, p, X, Y):
    return float(metric_form(space, p.z1, p.z2, X.v1, X.v2, Y.v1, Y.v2))


def complex_structure(space, X):
    return TangentVec(1j * X.v1, 1j * X.v2)


def symplectic_form(space, z1, z2, x1, x2, y1, y2, check=True):
    """Omega(X, Y) evaluated from the closed 2-form.

    Under the half-normalised wedge the displayed 2-forms equal ``-Omega``; the
    sign is fixed so that Omega(X, Y) = G(J X, Y).
    """
    if check:
        check_point(space, z1, z2)
    if space == EUC:
        xi, eta = z1, z2
        xib, etab = _cj(xi), _cj(eta)
        w = 1 + xi * xib
        k = 2 * (xi * etab - xib * eta) / w

        def wedge(a1, b2, a2, b1):
            return (a1 * b2 - a2 * b1) * 0.5

        t1 = wedge(x2, _cj(y1), y2, _cj(x1))
        t2 = wedge(_cj(x2), y1, _cj(y2), x1)
        t3 = wedge(x1, _cj(y1), y1, _cj(x1))
        out = -2 / (w * w) * (t1 + t2 + k * t3)
    else:
        c = 1 + z1 * _cj(z2)
        s = (x1 * _cj(y2) - y1 * _cj(x2)) / (c * c)
        out = s.real
    return out.real if not isinstance(out, Jet) else out


def symplectic(space, p, X, Y):
    return float(symplectic_form(space, p.z1, p.z2, X.v1, X.v2, Y.v1, Y.v2))


_BASIS = ((1.0, 0.0), (1j, 0.0), (0.0, 1.0), (0.0, 1j))


def metric_matrix(space, z1, z2, check=True):
    """Real 4x4 metric in the coordinates (Re z1, Im z1, Re z2, Im z2).

    Entries are floats, or jets when the point coordinates are jets.
    """
    if check:
        check_point(space, z1, z2)
    g = [[None] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i, 4):
            e, f = _BASIS[i], _BASIS[j]
            g[i][j] = g[j][i] = metric_form(space, z1, z2, e[0], e[1], f[0], f[1], check=False)
    if isinstance(g[0][0], Jet) or any(isinstance(x, Jet) for row in g for x in row):
        return g
    return np.array(g, dtype=float)


def metric_derivatives(space, z1, z2):
    """dG[k, i, j] = d G_ij / d x^k at the point (real coordinates)."""
    check_point(space, z1, z2)
    z1, z2 = complex(z1), complex(z2)
    dG = np.zeros((4, 4, 4))
    for slot in (0, 1):
        zc = z1 if slot == 0 else z2
        lifted = Jet.lift("z", (zc.real, zc.imag), 1)
        const = Jet.constant(z2 if slot == 0 else z1, 1, lifted.base)
        a, b = (lifted, const) if slot == 0 else (const, lifted)
        g = metric_matrix(space, a, b, check=False)
        for i in range(4):
            for j in range(4):
                gij = g[i][j]
                if not isinstance(gij, Jet):
                    continue
                dG[2 * slot, i, j] = gij.partial(1, 0).real
                dG[2 * slot + 1, i, j] = gij.partial(0, 1).real
    return dG


def christoffels(space, z1, z2):
    """Gamma[k, i, j] of the Levi-Civita connection in real coordinates."""
    g = metric_matrix(space, complex(z1), complex(z2))
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric("ambient metric is singular") from exc
    if not np.all(np.isfinite(ginv)):
        raise SingularMetric("ambient metric is singular")
    dG = metric_derivatives(space, z1, z2)
    # lowered symbols Gamma_{l i j} = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    low = 0.5 * (
        np.transpose(dG, (1, 0, 2))  # d_i g_lj -> [l, i, j]
        + np.transpose(dG, (1, 2, 0))  # d_j g_li -> [l, i, j]
        - dG  # d_l g_ij
    )
    return np.einsum("kl,lij->kij", ginv, low)


def causal_class(space, p, X, tol=1e-10):
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = X.norm_plus()
    if n == 0:
        return "null"
    q = metric(space, p, X, X)
    if abs(q) <= tol * n * n:
        return "null"
    return "spacelike" if q > 0 else "timelike"


def null_normal_criterion(dFbar, beta, tol=1e-10):
    """Nullity test for the normal vector T(beta) of a Euclidean Lagrangian section.

    ``dFbar`` is d(conj F) at the point; the condition reads
    beta^2 dFbar = conj(beta)^2 dbar(F), with dbar(F) = conj(dFbar).
    """
    lhs = beta * beta * dFbar
    rhs = (beta.conjugate() ** 2) * complex(dFbar).conjugate()
    scale = abs(beta) ** 2 * abs(dFbar)
    if scale == 0:
        return True
    return abs(lhs - rhs) <= tol * scale
