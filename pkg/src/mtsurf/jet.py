"""Truncated bivariate jets with Wirtinger derivative extraction.

A :class:`Jet` carries the Taylor expansion of a complex valued function of
two real variables (u, v) about a base point, truncated at total order N.
Coefficients are stored in the Wirtinger monomial basis

    f = sum a[p, q] (z - z0)**p (conj(z) - conj(z0))**q,   z = u + i v,

so that the holomorphic and antiholomorphic derivatives are index shifts:
``d^p dbar^q f (z0) = p! q! a[p, q]``.  The real partials are recovered from
``d_u = d + dbar`` and ``d_v = i (d - dbar)``.

The product and the univariate composition kernels are compiled when the
extension is available; set ``MTSURF_PURE_PYTHON=1`` to force numpy.
"""
import cmath
import math
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_kern = _kernels_py
if not os.environ.get("MTSURF_PURE_PYTHON"):
    try:
        from . import _kernels as _kern  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _kern = _kernels_py

MAX_ORDER = 6
DEFAULT_ORDER = 4

_size = _kernels_py.size
_index = _kernels_py.index


class JetError(ArithmeticError):
    pass


class OrderMismatch(JetError):
    pass


class DivisionByZeroJet(JetError, ZeroDivisionError):
    pass


class BranchPointError(JetError):
    pass


class InsufficientOrder(JetError):
    pass


def set_backend(name):
    """Switch kernels at runtime ("compiled" or "python"); returns the old name."""
    global _kern, BACKEND
    old = BACKEND
    if name == "python":
        _kern = _kernels_py
    elif name == "compiled":
        from . import _kernels

        _kern = _kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return old


def _shift_tables(n):
    """Source slots and integer factors for d (holo) and dbar (anti)."""
    pq = _kernels_py.exponents(n - 1)
    holo = np.array([_index(p + 1, q) for p, q in pq], dtype=np.intp)
    anti = np.array([_index(p, q + 1) for p, q in pq], dtype=np.intp)
    return holo, pq[:, 0] + 1.0, anti, pq[:, 1] + 1.0


_SHIFT = {n: _shift_tables(n) for n in range(1, MAX_ORDER + 1)}
_SWAP = {
    n: np.array([_index(q, p) for p, q in _kernels_py.exponents(n)], dtype=np.intp)
    for n in range(MAX_ORDER + 1)
}


class Jet:
    """Immutable truncated jet; see the module docstring for the layout."""

    __slots__ = ("c", "order", "base")
    __array_priority__ = 100  # numpy scalars defer to Jet operators

    def __init__(self, coeffs, order, base=(0.0, 0.0)):
        if order < 0:
            raise ValueError("jet order must be non-negative")
        if order > MAX_ORDER:
            raise ValueError(f"jet order {order} exceeds the supported maximum {MAX_ORDER}")
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (_size(order),):
            raise ValueError(f"expected {_size(order)} coefficients, got {c.shape}")
        self.c = c
        self.order = order
        self.base = (float(base[0]), float(base[1]))

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, order, base=(0.0, 0.0)):
        c = np.zeros(_size(order), dtype=complex)
        c[0] = value
        return cls(c, order, base)

    @classmethod
    def lift(cls, which, base, order):
        """Jet of a coordinate function: one of "u", "v", "z", "zbar".

        ``"xi"``/``"xibar"`` and ``"mu"``/``"mubar"`` are accepted as aliases of the
        complex coordinate and its conjugate.
        """
        if order < 0:
            raise ValueError("jet order must be non-negative")
        u0, v0 = float(base[0]), float(base[1])
        z0 = complex(u0, v0)
        which = {"xi": "z", "mu": "z", "xibar": "zbar", "mubar": "zbar"}.get(which, which)
        c = np.zeros(_size(order), dtype=complex)
        if which == "z":
            c[0], d1, d2 = z0, 1.0, 0.0
        elif which == "zbar":
            c[0], d1, d2 = z0.conjugate(), 0.0, 1.0
        elif which == "u":
            c[0], d1, d2 = u0, 0.5, 0.5
        elif which == "v":
            c[0], d1, d2 = v0, -0.5j, 0.5j
        else:
            raise ValueError(f"unknown coordinate {which!r}")
        if order >= 1:
            c[1], c[2] = d1, d2
        return cls(c, order, (u0, v0))

    # basic accessors ------------------------------------------------------
    @property
    def value(self):
        return complex(self.c[0])

    def coeff(self, p, q):
        if p + q > self.order:
            raise InsufficientOrder(f"coefficient ({p},{q}) beyond order {self.order}")
        return complex(self.c[_index(p, q)])

    def wirtinger(self, p, q):
        """``d^p dbar^q f`` at the base point."""
        if p < 0 or q < 0:
            raise ValueError("derivative counts must be non-negative")
        if p + q > self.order:
            raise InsufficientOrder(f"d^{p} dbar^{q} needs order {p + q}, jet has {self.order}")
        return complex(self.c[_index(p, q)]) * (math.factorial(p) * math.factorial(q))

    def partial(self, i, j):
        """Real partial ``d_u^i d_v^j f`` at the base point."""
        if i + j > self.order:
            raise InsufficientOrder(f"partial of order {i + j} beyond jet order {self.order}")
        # (d + dbar)^i (i d - i dbar)^j expanded in d^p dbar^q; poly[p] weighs d^p
        poly = np.array([1.0 + 0j])
        for factor in [(1.0, 1.0)] * i + [(1j, -1j)] * j:
            nxt = np.zeros(len(poly) + 1, dtype=complex)
            nxt[1:] += poly * factor[0]  # one more d
            nxt[:-1] += poly * factor[1]  # one more dbar
            poly = nxt
        n = i + j
        return complex(sum(poly[p] * self.wirtinger(p, n - p) for p in range(n + 1)))

    def is_real(self, tol=1e-12):
        scale = max(1.0, float(np.max(np.abs(self.c))))
        return bool(np.max(np.abs(self.c - self.c[_SWAP[self.order]].conj())) <= tol * scale)

    def truncate(self, order):
        if order > self.order:
            raise InsufficientOrder(f"cannot raise order {self.order} to {order}")
        return Jet(self.c[: _size(order)], order, self.base)

    def __repr__(self):
        return f"Jet(value={self.value:.6g}, order={self.order}, base={self.base})"

    # differentiation ------------------------------------------------------
    def d(self):
        """Holomorphic Wirtinger derivative as a jet of order N-1."""
        if self.order < 1:
            raise InsufficientOrder("cannot differentiate an order-0 jet")
        src, fac, _, _ = _SHIFT[self.order]
        return Jet(self.c[src] * fac, self.order - 1, self.base)

    def dbar(self):
        """Antiholomorphic Wirtinger derivative as a jet of order N-1."""
        if self.order < 1:
            raise InsufficientOrder("cannot differentiate an order-0 jet")
        _, _, src, fac = _SHIFT[self.order]
        return Jet(self.c[src] * fac, self.order - 1, self.base)

    def du(self):
        return self.d() + self.dbar()

    def dv(self):
        return 1j * (self.d() - self.dbar())

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.order != self.order:
                raise OrderMismatch(f"orders {self.order} and {other.order} differ")
            if other.base != self.base:
                raise OrderMismatch(f"base points {self.base} and {other.base} differ")
            return other.c
        if isinstance(other, (int, float, complex, np.number)):
            c = np.zeros_like(self.c)
            c[0] = other
            return c
        return None

    def _new(self, c):
        return Jet(c, self.order, self.base)

    def __add__(self, other):
        oc = self._coerce(other)
        if oc is None:
            return NotImplemented
        return self._new(self.c + oc)

    __radd__ = __add__

    def __sub__(self, other):
        oc = self._coerce(other)
        if oc is None:
            return NotImplemented
        return self._new(self.c - oc)

    def __rsub__(self, other):
        oc = self._coerce(other)
        if oc is None:
            return NotImplemented
        return self._new(oc - self.c)

    def __neg__(self):
        return self._new(-self.c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._new(self.c * other)
        oc = self._coerce(other)
        if oc is None:
            return NotImplemented
        return self._new(_kern.mul(self.c, oc, self.order))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if other == 0:
                raise DivisionByZeroJet("division by zero scalar")
            return self._new(self.c / other)
        if not isinstance(other, Jet):
            return NotImplemented
        self._coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        if not isinstance(other, (int, float, complex, np.number)):
            return NotImplemented
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, float) and k.is_integer():
            k = int(k)
        if not isinstance(k, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        k = int(k)
        if k < 0:
            return self.reciprocal() ** (-k)
        result = Jet.constant(1.0, self.order, self.base)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def conj(self):
        return self._new(self.c[_SWAP[self.order]].conj())

    conjugate = conj

    @property
    def real(self):
        return (self + self.conj()) * 0.5

    @property
    def imag(self):
        return (self - self.conj()) * (-0.5j)

    # univariate composition --------------------------------------------------
    def compose(self, series):
        """Apply a univariate function given by its Taylor coefficients at the value.

        ``series[k] = g^(k)(value) / k!`` for k = 0..order.
        """
        s = np.asarray(series, dtype=complex)
        if len(s) < self.order + 1:
            raise InsufficientOrder("series shorter than the jet order")
        s = s[: self.order + 1]
        if self.order == 0:
            return self._new(s[:1].copy())
        d = self.c.copy()
        d[0] = 0.0
        return self._new(_kern.compose(d, s, self.order))

    def reciprocal(self):
        a = self.value
        if a == 0:
            raise DivisionByZeroJet("reciprocal of a jet with zero value")
        inv = 1.0 / a
        return self.compose([(-1) ** k * inv ** (k + 1) for k in range(self.order + 1)])

    def exp(self):
        e = cmath.exp(self.value)
        return self.compose([e / math.factorial(k) for k in range(self.order + 1)])

    def log(self):
        a = self.value
        _check_branch(a, "ln")
        series = [cmath.log(a)] + [(-1) ** (k + 1) / (k * a**k) for k in range(1, self.order + 1)]
        return self.compose(series)

    def sqrt(self):
        a = self.value
        _check_branch(a, "sqrt")
        return self._sqrt_from_root(cmath.sqrt(a))

    def sqrt_near(self, root):
        """Square root continued from the given square root of the value.

        Avoids the principal branch cut when the caller knows which of the two
        roots is wanted (angle fields, half angles).
        """
        a = self.value
        if a == 0:
            raise BranchPointError("sqrt at zero")
        if abs(root * root - a) > 1e-8 * abs(a):
            raise ValueError("root is not a square root of the jet value")
        return self._sqrt_from_root(root)

    def _sqrt_from_root(self, r):
        a = self.value
        series = [r * _binom_half(k) / a**k for k in range(self.order + 1)]
        return self.compose(series)

    def sin(self):
        a = self.value
        s, c = cmath.sin(a), cmath.cos(a)
        cyc = [s, c, -s, -c]
        return self.compose([cyc[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def cos(self):
        a = self.value
        s, c = cmath.sin(a), cmath.cos(a)
        cyc = [c, -s, -c, s]
        return self.compose([cyc[k % 4] / math.factorial(k) for k in range(self.order + 1)])

    def sinh(self):
        a = self.value
        s, c = cmath.sinh(a), cmath.cosh(a)
        return self.compose([(s if k % 2 == 0 else c) / math.factorial(k) for k in range(self.order + 1)])

    def cosh(self):
        a = self.value
        s, c = cmath.sinh(a), cmath.cosh(a)
        return self.compose([(c if k % 2 == 0 else s) / math.factorial(k) for k in range(self.order + 1)])

    def tan(self):
        return self.sin() / self.cos()

    def atan(self):
        if not self.is_real():
            raise JetError("atan is only defined for real-valued jets")
        a = self.value.real
        n = self.order
        # 1 / (1 + (a+s)^2) as a power series in s, then integrate termwise
        den = [1.0 + a * a, 2.0 * a, 1.0] + [0.0] * n
        inv = [0.0] * (n + 1)
        inv[0] = 1.0 / den[0]
        for k in range(1, n + 1):
            inv[k] = -sum(den[j] * inv[k - j] for j in range(1, min(k, 2) + 1)) / den[0]
        series = [math.atan(a)] + [inv[k - 1] / k for k in range(1, n + 1)]
        return self.compose(series)

    def abs(self):
        """|f| for a real-valued jet with nonzero value."""
        if not self.is_real():
            raise JetError("abs is only differentiable here for real-valued jets")
        a = self.value.real
        if a == 0:
            raise JetError("abs is not differentiable at zero")
        return self if a > 0 else -self

    def modulus(self):
        """|f| = sqrt(f conj f) for complex jets with nonzero value."""
        sq = self * self.conj()
        if sq.value.real <= 0:
            raise BranchPointError("modulus of a jet with zero value")
        sq = Jet(sq.c.copy(), sq.order, sq.base)
        return sq._sqrt_from_root(math.sqrt(sq.value.real))


def _check_branch(a, name):
    if a.imag == 0 and a.real <= 0:
        raise BranchPointError(f"{name} at {a} lies on the principal branch cut")


def _binom_half(k):
    out = 1.0
    for j in range(k):
        out *= (0.5 - j) / (j + 1)
    return out


def lift_coordinate(which, base, order=DEFAULT_ORDER):
    return Jet.lift(which, base, order)


def wirtinger(a, holo, anti):
    return a.wirtinger(holo, anti)


# functional spellings used by code that is generic over jets and numbers
def _dispatch(name, fn):
    def f(x):
        if isinstance(x, Jet):
            return getattr(x, name)()
        return fn(x)

    f.__name__ = name
    return f


exp = _dispatch("exp", cmath.exp)
log = _dispatch("log", cmath.log)
sin = _dispatch("sin", cmath.sin)
cos = _dispatch("cos", cmath.cos)
sinh = _dispatch("sinh", cmath.sinh)
cosh = _dispatch("cosh", cmath.cosh)
tan = _dispatch("tan", cmath.tan)
sqrt = _dispatch("sqrt", cmath.sqrt)


def conj(x):
    if isinstance(x, Jet):
        return x.conj()
    return complex(x).conjugate()


def value(x):
    return x.value if isinstance(x, Jet) else complex(x)
