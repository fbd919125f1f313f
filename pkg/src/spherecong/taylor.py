"""Truncated bivariate Taylor arithmetic.

A :class:`Taylor` holds the coefficients ``c[a, b]`` of ``du**a * dv**b``
(``a + b <= order``) of a smooth map around a chart point.  Coefficients are
stored densely in a triangular layout, ordered by total degree and then by
the power of ``dv``, so truncating to a lower order is a prefix slice.

The value part may carry a trailing shape: an ambient vector field is one
``Taylor`` with shape ``(n,)`` rather than ``n`` scalar objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivisionNearZero, DomainError, OrderError, OrderMismatch

MAX_ORDER = 6
SINGULAR_THRESHOLD = 1e-12


def ncoef(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def index(a: int, b: int) -> int:
    d = a + b
    return d * (d + 1) // 2 + b


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int], ...]:
    return tuple((d - b, b) for d in range(order + 1) for b in range(d + 1))


@lru_cache(maxsize=None)
def _product_table(order: int):
    mons = monomials(order)
    left, right, target = [], [], []
    for i, (a1, b1) in enumerate(mons):
        for j, (a2, b2) in enumerate(mons):
            if a1 + b1 + a2 + b2 <= order:
                left.append(i)
                right.append(j)
                target.append(index(a1 + a2, b1 + b2))
    scatter = np.zeros((ncoef(order), len(left)))
    scatter[target, np.arange(len(left))] = 1.0
    return np.array(left), np.array(right), scatter


@lru_cache(maxsize=None)
def _derivative_table(order: int, axis: int):
    src, fac = [], []
    for a, b in monomials(order - 1):
        if axis == 0:
            src.append(index(a + 1, b))
            fac.append(a + 1)
        else:
            src.append(index(a, b + 1))
            fac.append(b + 1)
    return np.array(src), np.array(fac, dtype=float)


@lru_cache(maxsize=None)
def _factorials(order: int) -> np.ndarray:
    return np.array([math.factorial(a) * math.factorial(b) for a, b in monomials(order)], dtype=float)


def _check_order(order: int) -> None:
    if not isinstance(order, (int, np.integer)) or not 0 <= order <= MAX_ORDER:
        raise OrderError(f"order {order!r} outside 0..{MAX_ORDER}")


class Taylor:
    """Truncated Taylor expansion in two chart variables."""

    __slots__ = ("coeffs", "order")
    __array_priority__ = 100

    def __init__(self, coeffs, order: int):
        _check_order(order)
        coeffs = np.asarray(coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        if coeffs.shape[0] != ncoef(order):
            raise OrderMismatch(f"{coeffs.shape[0]} coefficients do not match order {order}")
        self.coeffs = coeffs
        self.order = order

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Taylor":
        value = np.asarray(value)
        dtype = value.dtype if value.dtype.kind in "fc" else float
        c = np.zeros((ncoef(order),) + value.shape, dtype=dtype)
        c[0] = value
        return cls(c, order)

    @classmethod
    def variable(cls, value, axis: int, order: int) -> "Taylor":
        t = cls.constant(value, order)
        if order >= 1:
            t.coeffs[1 + axis] = 1.0
        return t

    # basic attributes -------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        return self.coeffs[0]

    @property
    def real(self) -> "Taylor":
        return Taylor(self.coeffs.real.copy(), self.order)

    @property
    def imag(self) -> "Taylor":
        return Taylor(self.coeffs.imag.copy(), self.order)

    def conj(self) -> "Taylor":
        return Taylor(self.coeffs.conj(), self.order)

    def __len__(self):
        return self.shape[0]

    def __getitem__(self, key) -> "Taylor":
        if not isinstance(key, tuple):
            key = (key,)
        return Taylor(self.coeffs[(slice(None),) + key], self.order)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self):
        return f"Taylor(order={self.order}, shape={self.shape}, value={self.value!r})"

    def truncate(self, order: int) -> "Taylor":
        if order > self.order:
            raise OrderError(f"cannot raise order {self.order} to {order}")
        if order == self.order:
            return self
        return Taylor(self.coeffs[: ncoef(order)], order)

    def coefficient(self, a: int, b: int):
        if a < 0 or b < 0 or a + b > self.order:
            raise OrderError(f"monomial ({a},{b}) beyond order {self.order}")
        return self.coeffs[index(a, b)]

    def derivative(self, a: int, b: int):
        """Partial derivative d^(a+b)/du^a dv^b at the base point."""
        return self.coefficient(a, b) * (math.factorial(a) * math.factorial(b))

    def partials(self):
        """All partial derivatives, in coefficient order."""
        f = _factorials(self.order).reshape((-1,) + (1,) * len(self.shape))
        return self.coeffs * f

    def d(self, axis: int) -> "Taylor":
        """Derivative field along chart axis 0 (u) or 1 (v), one order lower."""
        if self.order == 0:
            raise OrderError("cannot differentiate an order-0 expansion")
        src, fac = _derivative_table(self.order, axis)
        fac = fac.reshape((-1,) + (1,) * len(self.shape))
        return Taylor(self.coeffs[src] * fac, self.order - 1)

    def sum(self, axis=-1) -> "Taylor":
        if axis >= 0:
            axis += 1
        return Taylor(self.coeffs.sum(axis=axis), self.order)

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        """Return (a, b) coefficient arrays at a common order."""
        if isinstance(other, Taylor):
            order = min(self.order, other.order)
            return self.coeffs[: ncoef(order)], other.coeffs[: ncoef(order)], order
        other = np.asarray(other)
        c = np.zeros((ncoef(self.order),) + other.shape, dtype=np.result_type(other, float))
        c[0] = other
        return self.coeffs, c, self.order

    @staticmethod
    def _pad(a, b):
        # align trailing value shapes for numpy broadcasting
        na, nb = a.ndim, b.ndim
        if na < nb:
            a = a.reshape(a.shape[:1] + (1,) * (nb - na) + a.shape[1:])
        elif nb < na:
            b = b.reshape(b.shape[:1] + (1,) * (na - nb) + b.shape[1:])
        return a, b

    def __add__(self, other):
        a, b, k = self._lift(other)
        a, b = self._pad(a, b)
        return Taylor(a + b, k)

    __radd__ = __add__

    def __sub__(self, other):
        a, b, k = self._lift(other)
        a, b = self._pad(a, b)
        return Taylor(a - b, k)

    def __rsub__(self, other):
        a, b, k = self._lift(other)
        a, b = self._pad(a, b)
        return Taylor(b - a, k)

    def __neg__(self):
        return Taylor(-self.coeffs, self.order)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            other = np.asarray(other)
            a, b = self._pad(self.coeffs, other[None, ...])
            return Taylor(a * b, self.order)
        a, b, k = self._lift(other)
        a, b = self._pad(a, b)
        if k == 0:
            return Taylor(a * b, 0)
        left, right, scatter = _product_table(k)
        prod = a[left] * b[right]
        out = scatter @ prod.reshape(prod.shape[0], -1)
        return Taylor(out.reshape((ncoef(k),) + prod.shape[1:]), k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            other = np.asarray(other)
            if np.any(np.abs(other) <= SINGULAR_THRESHOLD):
                raise DivisionNearZero(f"division by {other!r}")
            return self * (1.0 / other)
        return self * recip(other)

    def __rtruediv__(self, other):
        return recip(self) * other

    def __pow__(self, p):
        return power(self, p)


def _poly_shift(x: Taylor):
    """Split x into its base value and its nilpotent part."""
    c0 = x.coeffs[0]
    t = Taylor(x.coeffs.copy(), x.order)
    t.coeffs[0] = 0
    return c0, t


def compose(x: Taylor, derivs) -> Taylor:
    """Compose a univariate function with x given its derivatives at x's value.

    ``derivs[m]`` is the m-th derivative of the function at ``x.value``.
    """
    c0, t = _poly_shift(x)
    dtype = np.result_type(x.coeffs, *[np.asarray(d) for d in derivs])
    out = np.zeros(x.coeffs.shape, dtype=dtype)
    out[0] = derivs[0]
    power_ = t
    for m in range(1, x.order + 1):
        out = out + power_.coeffs * (np.asarray(derivs[m]) / math.factorial(m))
        if m < x.order:
            power_ = power_ * t
    return Taylor(out, x.order)




def recip(x: Taylor) -> Taylor:
    if not isinstance(x, Taylor):
        x = np.asarray(x)
        if np.any(np.abs(x) <= SINGULAR_THRESHOLD):
            raise DivisionNearZero(f"reciprocal of {x!r}")
        return 1.0 / x
    c0 = x.coeffs[0]
    if np.any(np.abs(c0) <= SINGULAR_THRESHOLD):
        raise DivisionNearZero(f"reciprocal of series with base value {c0!r}")
    inv = 1.0 / c0
    derivs = [inv]
    for m in range(1, x.order + 1):
        derivs.append(derivs[-1] * (-m) * inv)
    return compose(x, derivs)


def exp(x):
    if not isinstance(x, Taylor):
        return np.exp(x)
    e = np.exp(x.coeffs[0])
    return compose(x, [e] * (x.order + 1))


def sin(x):
    if not isinstance(x, Taylor):
        return np.sin(x)
    s, c = np.sin(x.coeffs[0]), np.cos(x.coeffs[0])
    cycle = [s, c, -s, -c]
    return compose(x, [cycle[m % 4] for m in range(x.order + 1)])


def cos(x):
    if not isinstance(x, Taylor):
        return np.cos(x)
    s, c = np.sin(x.coeffs[0]), np.cos(x.coeffs[0])
    cycle = [c, -s, -c, s]
    return compose(x, [cycle[m % 4] for m in range(x.order + 1)])


def log(x):
    if not isinstance(x, Taylor):
        x = np.asarray(x)
        if np.any(x <= 0):
            raise DomainError("log", x)
        return np.log(x)
    c0 = x.coeffs[0]
    if np.iscomplexobj(c0) or np.any(c0 <= 0):
        raise DomainError("log", c0)
    derivs = [np.log(c0)]
    for m in range(1, x.order + 1):
        derivs.append((-1) ** (m - 1) * math.factorial(m - 1) / c0**m)
    return compose(x, derivs)


def _falling(p: float, m: int) -> float:
    out = 1.0
    for k in range(m):
        out *= p - k
    return out


def power(x, p):
    """x**p; integer exponents by repeated multiplication, otherwise needs x > 0."""
    if isinstance(p, Taylor):
        return exp(p * log(x))
    if not isinstance(x, Taylor):
        return np.power(x, p)
    if float(p).is_integer():
        n = int(p)
        if n < 0:
            return recip(power(x, -n))
        out = Taylor.constant(np.ones(x.shape), x.order)
        base = x
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out
    c0 = x.coeffs[0]
    if np.iscomplexobj(c0) or np.any(c0 <= 0):
        raise DomainError(f"pow(., {p})", c0)
    return compose(x, [_falling(p, m) * c0 ** (p - m) for m in range(x.order + 1)])


def sqrt(x):
    if not isinstance(x, Taylor):
        x = np.asarray(x)
        if np.any(x < 0):
            raise DomainError("sqrt", x)
        return np.sqrt(x)
    c0 = x.coeffs[0]
    if np.iscomplexobj(c0) or np.any(c0 <= 0):
        raise DomainError("sqrt", c0)
    return compose(x, [_falling(0.5, m) * c0 ** (0.5 - m) for m in range(x.order + 1)])


def atan(x):
    if not isinstance(x, Taylor):
        return np.arctan(x)
    c0 = x.coeffs[0]
    n = x.order
    # univariate series of 1/(1 + (c0 + t)^2) = 1/(q0 + q1 t + t^2)
    q = [1 + c0 * c0, 2 * c0, np.ones_like(c0)]
    inv = [1.0 / q[0]]
    for m in range(1, n):
        acc = sum(q[k] * inv[m - k] for k in range(1, min(m, 2) + 1))
        inv.append(-acc / q[0])
    derivs = [np.arctan(c0)] + [math.factorial(m - 1) * inv[m - 1] for m in range(1, n + 1)]
    return compose(x, derivs)


def dot(x, y):
    """Euclidean inner product over the last axis (Taylor or ndarray)."""
    if isinstance(x, Taylor) or isinstance(y, Taylor):
        if not isinstance(x, Taylor):
            x, y = y, x
        return (x * y).sum(-1)
    return np.sum(np.asarray(x) * np.asarray(y), axis=-1)


def stack(items, order: int | None = None) -> Taylor:
    """Stack Taylor scalars (or constants) into a vector along a new last axis."""
    tay = [t for t in items if isinstance(t, Taylor)]
    if order is None:
        order = min(t.order for t in tay)
    cols = []
    for t in items:
        if isinstance(t, Taylor):
            cols.append(t.truncate(order).coeffs)
        else:
            cols.append(Taylor.constant(t, order).coeffs)
    dtype = np.result_type(*cols)
    return Taylor(np.stack([c.astype(dtype) for c in cols], axis=-1), order)


def lift(value: float, which_variable: str, order: int) -> Taylor:
    """Expansion of a chart coordinate ('u', 'v') or a constant ('const')."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_ORDER:
        raise OrderError(f"order {order!r} outside 1..{MAX_ORDER}")
    if which_variable == "const":
        return Taylor.constant(float(value), order)
    if which_variable in ("u", "v"):
        return Taylor.variable(float(value), 0 if which_variable == "u" else 1, order)
    raise ValueError(f"unknown variable {which_variable!r}")


_BINARY = {
    "add": lambda x, y: x + y,
    "sub": lambda x, y: x - y,
    "mul": lambda x, y: x * y,
    "div": lambda x, y: x / y,
}
_UNARY = {
    "sin": sin, "cos": cos, "exp": exp, "log": log, "sqrt": sqrt, "atan": atan,
    "neg": lambda x: -x, "recip": recip,
}


def arith(x: Taylor, y, op: str) -> Taylor:
    """Strict binary or unary operation.

    Unlike the operator overloads (which truncate to the lower order), mixed
    orders raise :class:`OrderMismatch` here.  ``pow`` takes a real exponent
    as ``y``; unary operations ignore ``y``.
    """
    if op in _UNARY:
        return _UNARY[op](x)
    if op == "pow":
        return power(x, y)
    if op not in _BINARY:
        raise ValueError(f"unknown operation {op!r}")
    if isinstance(y, Taylor) and y.order != x.order:
        raise OrderMismatch(f"orders {x.order} and {y.order}")
    return _BINARY[op](x, y)


@dataclass(frozen=True)
class Jet:
    """Truncated Taylor expansion of an immersion at a chart point."""

    taylor: Taylor
    base_point: tuple[float, float]

    @property
    def ambient_dim(self) -> int:
        return self.taylor.shape[0]

    @property
    def order(self) -> int:
        return self.taylor.order

    @property
    def components(self) -> list[Taylor]:
        return list(self.taylor)

    @property
    def value(self) -> np.ndarray:
        return np.asarray(self.taylor.value)

    def truncate(self, order: int) -> "Jet":
        return Jet(self.taylor.truncate(order), self.base_point)


def extract_derivative(j: Jet, a: int, b: int) -> np.ndarray:
    """d^(a+b) f / du^a dv^b at the base point, as an ambient vector."""
    return np.asarray(j.taylor.derivative(a, b))
