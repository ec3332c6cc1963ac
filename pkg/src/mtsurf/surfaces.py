"""Surface families in the two geodesic spaces.

Every constructor returns an :class:`Immersion`: a rule that maps a point of
a two-parameter domain to chart values ``(z1, z2)`` carried as jets in the
two real parameters.  Families with a closed-form theory additionally expose
the quantities that theory is phrased in (support function, Lagrangian
angle, potential, frame coefficients).
"""
import cmath
import json
import math
from dataclasses import dataclass, field

from . import expr as _expr
from .jet import DEFAULT_ORDER, MAX_ORDER, Jet
from .spaces import EUC, HYP, SpaceId, check_point

DEGENERATE_TOL = 1e-10


class SurfaceError(ValueError):
    pass


class DegenerateSection(SurfaceError):
    pass


class DegenerateGraph(SurfaceError):
    pass


class DegenerateRankOne(SurfaceError):
    pass


class NotArcLength(SurfaceError):
    pass


class QuadratureUnavailable(SurfaceError):
    pass


class FamilySpecError(ValueError):
    pass


def _order_up(order, by=1):
    if order + by > MAX_ORDER:
        raise ValueError(f"order {order} needs jets of order {order + by} > {MAX_ORDER}")
    return order + by


class _LazyVars(dict):
    """Variable bindings computed on first access."""

    def __init__(self, providers):
        super().__init__()
        self._providers = providers

    def __missing__(self, key):
        if key not in self._providers:
            raise KeyError(key)
        val = self._providers[key]()
        self[key] = val
        return val


def _complex_vars(base, order, tau=None, names=("xi", "xibar")):
    """Lazy bindings for a complex chart coordinate z = u + i v."""
    z0 = complex(*base)

    def z():
        return Jet.lift("z", base, order)

    def theta():
        if z0 == 0:
            raise SurfaceError("polar angle undefined at the origin")
        zz = vars_[names[0]] * (1 / z0)
        return zz.log().imag + cmath.phase(z0)

    providers = {
        "u": lambda: Jet.lift("u", base, order),
        "v": lambda: Jet.lift("v", base, order),
        names[0]: z,
        names[1]: lambda: Jet.lift("zbar", base, order),
        "R": lambda: vars_[names[0]].modulus(),
        "theta": theta,
    }
    if tau is not None:
        providers["t"] = lambda: (vars_[names[0]] * tau + vars_[names[1]] * tau.conjugate()).real
    vars_ = _LazyVars(providers)
    return vars_


def _eval(e, vars_, params):
    """Evaluate an Expr or a callable over lazy variable bindings."""
    if callable(e) and not isinstance(e, _expr.Expr):
        return e(vars_)
    bindings = {name: vars_[name] for name in e.names if name not in params}
    if not bindings:
        ref = next(iter(vars_._providers.values()))()
        return e.eval_jet({"_": ref}, params)
    return e.eval_jet(bindings, params)


def _as_expr(e, variables, params):
    if e is None or callable(e) and not isinstance(e, _expr.Expr):
        return e
    if isinstance(e, _expr.Expr):
        return e
    return _expr.parse(str(e), variables=variables, params=params)


class Immersion:
    """Parametrised surface: parameter point -> jets of the chart coordinates."""

    kind = "GenericImmersion"
    space = EUC
    param_names = ("u", "v")
    domain = ((-1.0, 1.0), (-1.0, 1.0))

    def chart(self, p, order=DEFAULT_ORDER):
        """Jets (z1, z2) of order ``order`` in the two parameters at ``p``."""
        raise NotImplementedError

    def point(self, p):
        z1, z2 = self.chart(p, 0)
        return z1.value, z2.value


# ---------------------------------------------------------------------------
# Euclidean rank-two sections


class EuclideanSection(Immersion):
    """Lagrangian section xi -> (xi, F) generated by a real support function r.

    F = (1 + xi xibar)^2 dbar(r) / 2 and sigma = -d(conj F) = |sigma| e^{i phi}.
    """

    kind = "EucSection"
    space = EUC
    param_names = ("u", "v")
    VARIABLES = ("u", "v", "xi", "xibar", "R", "theta")

    def __init__(self, r, params=None, domain=((-1.0, 1.0), (-1.0, 1.0))):
        self.params = dict(params or {})
        self.r = _as_expr(r, self.VARIABLES, self.params)
        self.domain = domain

    def support(self, p, order):
        return _eval(self.r, _complex_vars(p, order), self.params)

    def graph_function(self, p, order):
        """F as a jet of the given order."""
        up = _order_up(order)
        r = self.support(p, up)
        xi = Jet.lift("z", p, order)
        w = 1 + xi * xi.conj()
        return 0.5 * w * w * r.dbar()

    def chart(self, p, order=DEFAULT_ORDER):
        F = self.graph_function(p, order)
        xi = Jet.lift("z", p, order)
        check_point(EUC, xi, F)
        return xi, F

    def sigma(self, p, order):
        """sigma = -d(conj F) as a jet of the given order."""
        F = self.graph_function(p, _order_up(order))
        return -F.conj().d()

    def angle_data(self, p, order, root=None):
        """Jets of |sigma|, e^{i phi/2} and phi.

        ``root`` selects the branch of e^{i phi/2} at the base point; by default
        the principal half angle is used.
        """
        s = self.sigma(p, order)
        if abs(s.value) < DEGENERATE_TOL:
            raise DegenerateSection(f"|sigma| = {abs(s.value):.3g} at {p}")
        mod = s.modulus()
        unit = s / mod
        phi0 = cmath.phase(unit.value)
        if root is None:
            root = cmath.exp(0.5j * phi0)
        half = unit.sqrt_near(root)
        phi = (unit * (1 / unit.value)).log().imag + phi0
        return mod, half, phi

    @staticmethod
    def _branch(x, y, branch):
        # x = y is the displayed equation; under sigma = -d(conj F) the null
        # condition is x = y or x = -y depending on the point
        minus, plus = abs(x - y), abs(x + y)
        if branch == "minus":
            return minus
        if branch == "plus":
            return plus
        if branch == "either":
            return min(minus, plus)
        raise ValueError("branch must be 'minus', 'plus' or 'either'")

    def residual_eq1(self, p, branch="either"):
        """e^{-i phi/2} d|sigma| vs e^{i phi/2} dbar|sigma|; A_(12) is null iff one branch vanishes."""
        mod, half, _ = self.angle_data(p, 1)
        h = half.value
        return self._branch(mod.wirtinger(1, 0) / h, h * mod.wirtinger(0, 1), branch)

    def residual_eq2(self, p, branch="either"):
        """d(e^{-i phi/2}/(1+|xi|^2)) vs dbar(e^{i phi/2}/(1+|xi|^2)); H is null iff one branch vanishes."""
        mod, half, _ = self.angle_data(p, 1)
        xi = Jet.lift("z", p, 1)
        w = 1 + xi * xi.conj()
        a = half.reciprocal() / w
        b = half / w
        return self._branch(a.wirtinger(1, 0), b.wirtinger(0, 1), branch)

    def frame(self, p):
        """Orthonormal tangent frame with G(E_a, E_b) = diag(1, -1).

        Returns ``[(E1, c1), (E2, c2)]`` with E the holomorphic components and c
        the parameter components (E = c_u X_u + c_v X_v).  The coefficients are
        alpha = (1+|xi|^2) e^{-i phi/2 -/+ i pi/4} / |sigma|^(1/2).
        """
        from .spaces import TangentVec

        F = self.graph_function(p, 1)
        mod, half, _ = self.angle_data(p, 0)
        xi = complex(*p)
        w = 1 + abs(xi) ** 2
        dF, dbarF = F.wirtinger(1, 0), F.wirtinger(0, 1)
        ehalf = half.value  # e^{i phi/2}
        out = []
        for sign in (-1, 1):
            alpha = w * cmath.exp(sign * 0.25j * math.pi) / (ehalf * math.sqrt(mod.value.real))
            vec = TangentVec(alpha / 2, (alpha * dF + alpha.conjugate() * dbarF) / 2)
            out.append((vec, (alpha.real / 2, alpha.imag / 2)))
        return out

    def normal_vector(self, p, beta):
        """T(beta) = Re[beta (d_xi + (dbar Fbar + 2(xibar F - xi Fbar)/(1+|xi|^2)) d_eta - d Fbar d_etabar)].

        The relative sign inside the d_eta coefficient is the one for which
        T(beta) is orthogonal to the tangent plane.
        """
        from .spaces import TangentVec

        F = self.graph_function(p, 1)
        xi = complex(*p)
        Fv = F.value
        Fb = F.conj()
        coeff = Fb.wirtinger(0, 1) + 2 * (xi.conjugate() * Fv - xi * Fv.conjugate()) / (1 + abs(xi) ** 2)
        dFbar = Fb.wirtinger(1, 0)
        v2 = beta * coeff - beta.conjugate() * dFbar.conjugate()
        return TangentVec(beta / 2, v2 / 2)

    def beta_coefficients(self, p):
        """The closed-form coefficients beta_11, beta_22, beta_12, as displayed.

        They refer to the frame with coefficients e^{-i phi/2 +/- i pi/4} / sqrt(2|sigma|);
        :meth:`second_fundamental_frame` assembles them in :meth:`frame`.
        """
        mod, half, phi = self.angle_data(p, 1)
        s = self.sigma(p, 0).value
        xi = complex(*p)
        w = 1 + abs(xi) ** 2
        m = mod.value.real
        dm, dbm = mod.wirtinger(1, 0), mod.wirtinger(0, 1)
        dphi, dbphi = phi.wirtinger(1, 0), phi.wirtinger(0, 1)
        eip = half.value**2
        den = 8 * w**-2 * eip * m**3
        b11 = -(-s * dbm + m * m * (dphi - 1j * eip * dbphi - 2 * (1j * xi.conjugate() - xi * eip) / w)) / den
        b22 = -(s * dbm + m * m * (dphi + 1j * eip * dbphi - 2 * (1j * xi.conjugate() + xi * eip) / w)) / den
        b12 = -(m * dm) / den
        return b11, b22, b12


    def second_fundamental_frame(self, p):
        """A(E_a, E_b) in the frame of :meth:`frame`, built from the beta coefficients.

        The frame here is sqrt(2) times the beta frame with the two vectors
        exchanged, and beta_11 enters with the opposite sign: checked against
        the generic second fundamental form.
        """
        b11, b22, b12 = self.beta_coefficients(p)
        return {
            (0, 0): self.normal_vector(p, 4 * b22),
            (1, 1): self.normal_vector(p, -4 * b11),
            (0, 1): self.normal_vector(p, 4 * b12),
        }


class EuclideanTorus(Immersion):
    """Separable marginally trapped tori r = s R L(theta)/(1+R^2) + r0 in polar parameters."""

    kind = "EucTorus"
    space = EUC
    param_names = ("R", "theta")

    def __init__(self, L, r0=0.0, params=None, orientation_sign=1, domain=((-2.0, 2.0), (0.0, 2 * math.pi))):
        self.params = dict(params or {})
        self.L = _as_expr(L, ("theta",), self.params)
        self.r0 = float(r0)
        if orientation_sign not in (1, -1):
            raise FamilySpecError("orientation_sign must be +1 or -1")
        self.sign = orientation_sign
        self.domain = domain

    def _L(self, theta):
        if callable(self.L) and not isinstance(self.L, _expr.Expr):
            return self.L(theta)
        return self.L.eval_jet({"theta": theta}, self.params)

    def chart(self, p, order=DEFAULT_ORDER):
        up = _order_up(order)
        Lj = self._L(Jet.lift("v", p, up))
        Lp = Lj.dv()
        Lj = Lj.truncate(order)
        R = Jet.lift("u", p, order)
        th = Jet.lift("v", p, order)
        e = (1j * th).exp()
        xi = R * e
        eta = 0.5 * ((1 - R * R) * Lj + 1j * (1 + R * R) * Lp) * e * self.sign
        check_point(EUC, xi, eta)
        return xi, eta

    def as_section(self):
        """The same surface as a section over xi != 0, via its support function."""

        def r(vars_):
            R, th = vars_["R"], vars_["theta"]
            return self.sign * R / (1 + R * R) * self._L(th) + self.r0

        return EuclideanSection(r)


class EuclideanRankOne(Immersion):
    """Affine normal bundle over a unit-speed curve: (s,t) -> (xi(s), (a + i b) xi'(s)).

    The fibre coordinate eta is the holomorphic component of V = a gamma' + b j gamma'.
    """

    kind = "EucRankOne"
    space = EUC
    param_names = ("s", "t")
    SPEED_TOL = 1e-8

    def __init__(self, curve, a, b, params=None, domain=((0.0, 1.0), (0.5, 1.5))):
        self.params = dict(params or {})
        self.curve = curve
        if isinstance(curve, str):
            if curve not in ("equator", "latitude"):
                raise FamilySpecError(f"unknown curve preset {curve!r}")
        else:
            re, im = curve
            self.curve = (_as_expr(re, ("s",), self.params), _as_expr(im, ("s",), self.params))
        self.a = _as_expr(a, ("s", "t"), self.params)
        self.b = _as_expr(b, ("s", "t"), self.params)
        self.domain = domain

    def curve_jet(self, p, order):
        s = Jet.lift("u", p, order)
        if self.curve == "equator":
            return (1j * s).exp()
        if self.curve == "latitude":
            R0 = float(self.params.get("R0", 0.5))
            omega = (1 + R0 * R0) / (2 * R0)
            return R0 * (1j * omega * s).exp()
        re, im = self.curve
        return self._e(re, s) + 1j * self._e(im, s)

    def _e(self, e, s, t=None):
        b = {"s": s} if t is None else {"s": s, "t": t}
        return e.eval_jet({k: v for k, v in b.items() if k in e.names} or {"s": s}, self.params)

    def _ab(self, p, order):
        s, t = Jet.lift("u", p, order), Jet.lift("v", p, order)
        return self._e(self.a, s, t), self._e(self.b, s, t)

    def speed(self, p):
        xi = self.curve_jet(p, 1)
        return 2 * abs(xi.partial(1, 0)) / (1 + abs(xi.value) ** 2)

    def chart(self, p, order=DEFAULT_ORDER):
        up = _order_up(order)
        xi_up = self.curve_jet(p, up)
        sp = 2 * abs(xi_up.partial(1, 0)) / (1 + abs(xi_up.value) ** 2)
        if abs(sp - 1) > self.SPEED_TOL:
            raise NotArcLength(f"curve speed {sp:.12g} is not 1 at s = {p[0]}")
        xidot = xi_up.du()
        xi = xi_up.truncate(order)
        a, b = self._ab(p, order)
        eta = (a + 1j * b) * xidot
        check_point(EUC, xi, eta)
        return xi, eta

    def geodesic_curvature(self, p):
        xi = self.curve_jet(p, 2)
        z, zd, zdd = xi.value, xi.partial(1, 0), xi.partial(2, 0)
        w = 1 + abs(z) ** 2
        acc = zdd - 2 * z.conjugate() * zd * zd / w
        return (4 * (acc * (1j * zd).conjugate()).real / w**2)

    def closed_forms(self, p):
        """k, E, F, G, h_112 and the mean curvature vector in the splitting picture."""
        from .spaces import TangentVec

        k = self.geodesic_curvature(p)
        a, b = self._ab(p, 2)
        av = a.value.real
        a_t, a_st = a.partial(0, 1).real, a.partial(1, 1).real
        b_s, b_t = b.partial(1, 0).real, b.partial(0, 1).real
        if abs(b_t) < DEGENERATE_TOL:
            raise DegenerateRankOne(f"|b_t| = {abs(b_t):.3g} at {p}")
        xi = self.curve_jet(p, 1)
        xidot = xi.partial(1, 0)
        coef = (k * b_t - a_st) / b_t
        jpsi_t = TangentVec(0j, 1j * (a_t + 1j * b_t) * xidot)
        return {
            "k": k,
            "E": -2 * (b_s + k * av),
            "F": -b_t,
            "G": 0.0,
            "h112": k * b_t - a_st,
            # the displayed mean curvature vector, coef * J Psi_t
            "H": jpsi_t * coef,
            # trace mean curvature in this package's metric; valid when a_t = 0
            "H_aligned": jpsi_t * (-4 * coef / b_t),
        }


# ---------------------------------------------------------------------------
# hyperbolic graphs


class HyperbolicGraph(Immersion):
    """Lagrangian graph mu1 -> (mu1, mu2) generated by a real potential h.

    d h = F = conj(mu2) / (1 + mu1 conj(mu2)), so mu2 = conj(F / (1 - mu1 F)).
    """

    kind = "HypGraph"
    space = HYP
    param_names = ("u", "v")
    VARIABLES = ("u", "v", "mu", "mubar", "R", "theta", "t")

    def __init__(self, h, params=None, tau=None, r0=0.0, domain=((-0.5, 0.5), (-0.5, 0.5))):
        self.params = dict(params or {})
        self.tau = None if tau is None else complex(tau)
        if self.tau is not None and abs(abs(self.tau) - 1) > 1e-12:
            raise FamilySpecError("tau must lie on the unit circle")
        self.h = _as_expr(h, self.VARIABLES, self.params)
        self.r0 = float(r0)
        self.domain = domain

    def _vars(self, p, order):
        return _complex_vars(p, order, self.tau, names=("mu", "mubar"))

    def potential(self, p, order):
        return _eval(self.h, self._vars(p, order), self.params)

    def chart(self, p, order=DEFAULT_ORDER):
        F = self.potential(p, _order_up(order)).d()
        mu = Jet.lift("z", p, order)
        mu2bar = F / (1 - mu * F)
        mu2 = mu2bar.conj()
        check_point(HYP, mu, mu2)
        if order >= 1:
            s0 = F.d().value + F.value**2
            if abs(s0) < DEGENERATE_TOL:
                raise DegenerateGraph(f"|sigma0| = {abs(s0):.3g} at {p}")
        return mu, mu2

    def sigma0(self, p, order):
        """sigma0 = d^2 h + (d h)^2 as a jet of the given order."""
        h = self.potential(p, _order_up(order, 2))
        F = h.d()
        s0 = F.d() + (F * F).truncate(order)
        if abs(s0.value) < DEGENERATE_TOL:
            raise DegenerateGraph(f"|sigma0| = {abs(s0.value):.3g} at {p}")
        return s0

    def sigma0_from_chart(self, p, order):
        """sigma0 = d conj(mu2) / (1 + mu1 conj(mu2))^2 from the chart jets."""
        mu, mu2 = self.chart(p, _order_up(order))
        mu2b = mu2.conj()
        c = 1 + mu * mu2b
        return (mu2b.d() / (c * c).truncate(order))

    def support(self, p, order=0):
        """r = ln|dh| + h + r0."""
        h = self.potential(p, _order_up(order))
        return h.d().modulus().log() + h.truncate(order) + self.r0

    def half_angle(self, p, order, root=None):
        """Jet of e^{-i phi} where sigma0 = |sigma0| e^{2 i phi}."""
        s0 = self.sigma0(p, order)
        unit = s0 / s0.modulus()
        if root is None:
            root = cmath.exp(0.5j * cmath.phase(unit.value))
        return unit.sqrt_near(root).reciprocal()

    def lagrangian_angle(self, p):
        return 0.5 * cmath.phase(self.sigma0(p, 0).value)


class HyperbolicProfileGraph(HyperbolicGraph):
    """Potential h = f(tau mu1 + conj(tau mu1)) for a real profile f(x)."""

    kind = "HypProfileGraph"

    def __init__(self, f, tau=1.0, params=None, r0=0.0, domain=((-0.5, 0.5), (-0.5, 0.5))):
        params = dict(params or {})
        self.f = _as_expr(f, ("x",), params)

        def h(vars_):
            t = vars_["t"]
            if callable(self.f) and not isinstance(self.f, _expr.Expr):
                return self.f(t)
            return self.f.eval_jet({"x": t}, params)

        super().__init__(h, params=params, tau=complex(tau), r0=r0, domain=domain)


class HyperbolicWeingartenFamily(HyperbolicProfileGraph):
    """Profiles solving f'' + f'^2 = +c0^2 (sinh kind) or -c0^2 (sin kind)."""

    def __init__(self, kind, c0, d0=0.0, tau=1.0, r0=0.0, domain=((-0.5, 0.5), (-0.5, 0.5))):
        if c0 == 0:
            raise FamilySpecError("c0 must be nonzero")
        if kind == "sinh":
            src = "ln(cosh(c0*x + d0))"
        elif kind == "sin":
            src = "ln(abs(cos(c0*x + d0)))"
        else:
            raise FamilySpecError(f"unknown Weingarten kind {kind!r}")
        self.weingarten_kind = kind
        self.c0, self.d0 = float(c0), float(d0)
        super().__init__(src, tau=tau, params={"c0": c0, "d0": d0}, r0=r0, domain=domain)
        self.kind = "HypWeingartenFamily"

    def closed_support(self, p):
        """ln|sinh(c0 t + d0)| (resp. ln|sin(...)|) + r0 at the point."""
        t = 2 * (self.tau * complex(*p)).real
        arg = self.c0 * t + self.d0
        g = math.sinh(arg) if self.weingarten_kind == "sinh" else math.sin(arg)
        return math.log(abs(g)) + self.r0


def _simpson(fn, a, b, tol=1e-10, n=16, max_n=1 << 20):
    """Composite Simpson with step doubling until successive estimates agree."""

    def rule(m):
        hstep = (b - a) / m
        s = fn(a) + fn(b)
        s += 4 * sum(fn(a + (2 * i - 1) * hstep) for i in range(1, m // 2 + 1))
        s += 2 * sum(fn(a + 2 * i * hstep) for i in range(1, m // 2))
        return s * hstep / 3

    prev = rule(n)
    while n < max_n:
        n *= 2
        cur = rule(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


class SphereProfile:
    """f with f'(x) = x / (x^{2n} + c^2), as a function on jets."""

    def __init__(self, n, c, quadrature=True):
        if int(n) != n or n < 2:
            raise FamilySpecError("n must be an integer >= 2")
        if c == 0:
            raise FamilySpecError("c must be nonzero")
        self.n, self.c = int(n), float(c)
        self.quadrature = quadrature
        self.dfexpr = _expr.parse("x/(x^(2*n) + c^2)", variables=("x",), params=("n", "c"))
        self._pars = {"n": self.n, "c": self.c}

    @property
    def closed_form(self):
        return self.n == 2 or (self.n == 3 and self.c == 1.0)

    def df(self, x):
        return self.dfexpr.eval_jet({"x": x}, self._pars)

    def __call__(self, x):
        if self.n == 2:
            return (x * x / self.c).atan() / (2 * self.c)
        if self.n == 3 and self.c == 1.0:
            w = x * x
            s3 = math.sqrt(3.0)
            return ((1 + w).log() / 6 - (1 - w + w * w).log() / 12
                    + (s3 / 6) * ((2 * w - 1) / s3).atan() - (s3 / 6) * math.atan(-1 / s3))
        if not self.quadrature:
            raise QuadratureUnavailable(f"no closed form for n={self.n}, c={self.c}")
        x0 = x.value.real
        f0 = _simpson(lambda s: s / (s ** (2 * self.n) + self.c**2), 0.0, x0)
        if x.order == 0:
            return Jet.constant(f0, 0, x.base)
        # derivatives of f at x0 come from the jet of f'
        dj = self.df(Jet.lift("u", (x0, 0.0), x.order - 1))
        series = [f0] + [dj.partial(k, 0) / math.factorial(k + 1) for k in range(x.order)]
        return x.compose(series)


class HyperbolicSphereFamily(Immersion):
    """Marginally trapped spheres Sigma_{n,c} in polar parameters (R, theta).

    With x = R cos(theta + theta0) and tau = e^{i theta0}:
    mu1 = R e^{i theta},  mu2 = e^{-i theta0} f'(x) / (1 - R e^{-i(theta + theta0)} f'(x)).
    The same surface is the profile graph with potential h = 2 f(x), see :meth:`graph`.
    """

    kind = "HypSphereFamily"
    space = HYP
    param_names = ("R", "theta")

    def __init__(self, n, c, tau=1.0, quadrature=True, domain=((0.05, 3.0), (0.0, 2 * math.pi))):
        self.profile = SphereProfile(n, c, quadrature)
        self.tau = complex(tau)
        if abs(abs(self.tau) - 1) > 1e-12:
            raise FamilySpecError("tau must lie on the unit circle")
        self.theta0 = cmath.phase(self.tau)
        self.domain = domain

    def chart(self, p, order=DEFAULT_ORDER):
        R = Jet.lift("u", p, order)
        th = Jet.lift("v", p, order)
        x = R * (th + self.theta0).cos()
        df = self.profile.df(x)
        mu1 = R * (1j * th).exp()
        mu2 = df * self.tau.conjugate() / (1 - R * (-1j * (th + self.theta0)).exp() * df)
        check_point(HYP, mu1, mu2)
        return mu1, mu2

    def graph(self):
        prof = self.profile

        def f(t):
            return 2 * prof(t * 0.5)

        g = HyperbolicProfileGraph(f, tau=self.tau)
        g.kind = "HypSphereFamily"
        return g

    def diagonal_distance(self, p):
        """|1 + mu1 conj(mu2)| at a parameter point."""
        mu1, mu2 = self.point(p)
        return abs(1 + mu1 * mu2.conjugate())


class HyperbolicRankOne(Immersion):
    """(s, t) -> (mu1(s), mu2(s, t)) from real/imaginary part expressions."""

    kind = "HypRankOne"
    space = HYP
    param_names = ("s", "t")

    def __init__(self, mu1, mu2, params=None, domain=((-0.5, 0.5), (-0.5, 0.5))):
        self.params = dict(params or {})
        self.mu1 = tuple(_as_expr(e, ("s",), self.params) for e in mu1)
        self.mu2 = tuple(_as_expr(e, ("s", "t"), self.params) for e in mu2)
        self.domain = domain

    def _pair(self, pair, s, t):
        out = []
        for e in pair:
            b = {k: v for k, v in (("s", s), ("t", t)) if k in e.names}
            out.append(e.eval_jet(b or {"s": s}, self.params))
        return out[0] + 1j * out[1]

    def chart(self, p, order=DEFAULT_ORDER):
        s, t = Jet.lift("u", p, order), Jet.lift("v", p, order)
        mu1 = self._pair(self.mu1, s, s.truncate(order) * 0 + t)
        mu2 = self._pair(self.mu2, s, t)
        check_point(HYP, mu1, mu2)
        return mu1, mu2

    def closed_metric(self, p):
        mu1, mu2 = self.chart(p, 1)
        c = 1 + mu1.value * mu2.value.conjugate()
        m1s = mu1.partial(1, 0)
        m2s, m2t = mu2.partial(1, 0), mu2.partial(0, 1)
        g_ss = 2 * (m1s * m2s.conjugate() / c**2).imag
        g_st = (m1s * m2t.conjugate() / c**2).imag
        if abs(g_st) < DEGENERATE_TOL:
            raise DegenerateRankOne(f"|g_st| = {abs(g_st):.3g} at {p}")
        return g_ss, g_st, 0.0


class GenericImmersion(Immersion):
    """Arbitrary (z1, z2) given by real/imaginary part expressions in two variables."""

    kind = "GenericImmersion"

    def __init__(self, z1, z2, space=EUC, variables=("u", "v"), params=None, domain=((-1.0, 1.0), (-1.0, 1.0))):
        self.params = dict(params or {})
        self.space = SpaceId(space)
        self.param_names = tuple(variables)
        self.z1 = tuple(_as_expr(e, self.param_names, self.params) for e in z1)
        self.z2 = tuple(_as_expr(e, self.param_names, self.params) for e in z2)
        self.domain = domain

    def _pair(self, pair, a, b):
        out = []
        n1, n2 = self.param_names
        for e in pair:
            bind = {k: v for k, v in ((n1, a), (n2, b)) if k in e.names}
            out.append(e.eval_jet(bind or {n1: a}, self.params))
        return out[0] + 1j * out[1]

    def chart(self, p, order=DEFAULT_ORDER):
        a, b = Jet.lift("u", p, order), Jet.lift("v", p, order)
        z1, z2 = self._pair(self.z1, a, b), self._pair(self.z2, a, b)
        check_point(self.space, z1, z2)
        return z1, z2


# ---------------------------------------------------------------------------
# declarative family specs

KINDS = {
    "EucSection": {"exprs": ["r"], "params": [], "variables": list(EuclideanSection.VARIABLES)},
    "EucTorus": {"exprs": ["L"], "params": ["r0"], "variables": ["theta"]},
    "EucRankOne": {"exprs": ["a", "b", "curve_re?", "curve_im?"], "params": ["curve?", "R0?"], "variables": ["s", "t"]},
    "HypGraph": {"exprs": ["h"], "params": [], "variables": list(HyperbolicGraph.VARIABLES)},
    "HypProfileGraph": {"exprs": ["f"], "params": [], "variables": ["x"]},
    "HypWeingartenFamily": {"exprs": [], "params": ["kind", "c0", "d0"], "variables": []},
    "HypSphereFamily": {"exprs": [], "params": ["n", "c"], "variables": []},
    "HypRankOne": {"exprs": ["mu1_re", "mu1_im", "mu2_re", "mu2_im"], "params": [], "variables": ["s", "t"]},
    "GenericImmersion": {"exprs": ["z1_re", "z1_im", "z2_re", "z2_im"], "params": ["space", "variables"], "variables": ["u", "v"]},
}


@dataclass
class FamilySpec:
    kind: str
    exprs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tau: complex = 1.0
    orientation_sign: int = 1

    @classmethod
    def from_dict(cls, d):
        tau = d.get("tau", [1.0, 0.0])
        if isinstance(tau, (list, tuple)):
            tau = complex(tau[0], tau[1])
        return cls(
            kind=d["kind"],
            exprs=dict(d.get("exprs", {})),
            params=dict(d.get("params", {})),
            tau=complex(tau),
            orientation_sign=int(d.get("orientation_sign", 1)),
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "exprs": dict(self.exprs),
            "params": dict(self.params),
            "tau": [self.tau.real, self.tau.imag],
            "orientation_sign": self.orientation_sign,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def _numeric_params(self, skip=()):
        out = {}
        for k, v in self.params.items():
            if k in skip:
                continue
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise FamilySpecError(f"parameter {k!r} must be a real number")
            out[k] = float(v)
        return out

    def build(self):
        """Construct the immersion described by this spec."""
        if abs(abs(self.tau) - 1) > 1e-12:
            raise FamilySpecError("tau must lie on the unit circle")
        k, ex = self.kind, self.exprs
        try:
            if k == "EucSection":
                return EuclideanSection(ex["r"], self._numeric_params())
            if k == "EucTorus":
                pars = self._numeric_params()
                r0 = pars.pop("r0", 0.0)
                return EuclideanTorus(ex["L"], r0, pars, self.orientation_sign)
            if k == "EucRankOne":
                curve = self.params.get("curve")
                if curve is None:
                    curve = (ex["curve_re"], ex["curve_im"])
                return EuclideanRankOne(curve, ex["a"], ex["b"], self._numeric_params(skip=("curve",)))
            if k == "HypGraph":
                return HyperbolicGraph(ex["h"], self._numeric_params(), tau=self.tau)
            if k == "HypProfileGraph":
                return HyperbolicProfileGraph(ex["f"], tau=self.tau, params=self._numeric_params())
            if k == "HypWeingartenFamily":
                p = self.params
                return HyperbolicWeingartenFamily(p["kind"], p["c0"], p.get("d0", 0.0), tau=self.tau)
            if k == "HypSphereFamily":
                return HyperbolicSphereFamily(self.params["n"], self.params["c"], tau=self.tau)
            if k == "HypRankOne":
                return HyperbolicRankOne((ex["mu1_re"], ex["mu1_im"]), (ex["mu2_re"], ex["mu2_im"]), self._numeric_params())
            if k == "GenericImmersion":
                space = self.params.get("space", "EucLines")
                variables = self.params.get("variables", ["u", "v"])
                return GenericImmersion(
                    (ex["z1_re"], ex["z1_im"]),
                    (ex["z2_re"], ex["z2_im"]),
                    space=space,
                    variables=variables,
                    params=self._numeric_params(skip=("space", "variables")),
                )
        except KeyError as exc:
            raise FamilySpecError(f"{k}: missing slot {exc.args[0]!r}") from exc
        raise FamilySpecError(f"unknown family kind {k!r}")


# functional spellings -------------------------------------------------------


def euclidean_section(r, params=None):
    return EuclideanSection(r, params)


def euclidean_torus(L, r0=0.0, params=None, orientation_sign=1):
    return EuclideanTorus(L, r0, params, orientation_sign)


def euclidean_rank_one(curve, a, b, params=None):
    return EuclideanRankOne(curve, a, b, params)


def hyperbolic_graph(h, params=None, tau=None, r0=0.0):
    return HyperbolicGraph(h, params, tau, r0)


def hyperbolic_profile_graph(f, tau=1.0, params=None, r0=0.0):
    return HyperbolicProfileGraph(f, tau, params, r0)


def hyperbolic_weingarten_family(kind, c0, d0=0.0, tau=1.0, r0=0.0):
    return HyperbolicWeingartenFamily(kind, c0, d0, tau, r0)


def hyperbolic_sphere_family(n, c, tau=1.0, quadrature=True):
    return HyperbolicSphereFamily(n, c, tau, quadrature)


def hyperbolic_rank_one(mu1, mu2, params=None):
    return HyperbolicRankOne(mu1, mu2, params)


def generic_immersion(z1, z2, space=EUC, variables=("u", "v"), params=None):
    return GenericImmersion(z1, z2, space, variables, params)
