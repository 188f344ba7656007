"""Differentiation oracle: forward-mode jets plus finite-difference cross-checks.

Every closed form in the package is adjudicated against derivatives produced
here.  The primary engine is second-order forward mode (value, gradient,
Hessian propagated together), which is exact to rounding; Richardson-
extrapolated central differences serve only as an independent cross-check.

x-derivatives are never taken numerically: scalar functions are small
expression trees whose d/dx^k is formed analytically by differentiating the
polynomial coefficient fields and rebuilding the tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonFiniteResult
from .fields import CoefficientField, OneFormField

_EPS = float(np.finfo(float).eps)


# ---------------------------------------------------------------------------
# second-order forward mode
# ---------------------------------------------------------------------------

class Jet2:
    """Truncated second-order Taylor value: f, grad f, hess f.

    The Hessian stays exactly symmetric through every operation because each
    rule only ever adds symmetric matrices and symmetrised outer products.
    """

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    @staticmethod
    def constant(value: float, nvars: int) -> "Jet2":
        return Jet2(value, np.zeros(nvars), np.zeros((nvars, nvars)))

    def _lift(self, other):
        if isinstance(other, Jet2):
            return other
        if isinstance(other, (int, float, np.floating)):
            return Jet2.constant(float(other), self.grad.shape[0])
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Jet2(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Jet2(self.val - o.val, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        cross = np.outer(self.grad, o.grad)
        cross = cross + cross.T  # group first: keeps the Hessian exactly symmetric
        return Jet2(
            self.val * o.val,
            self.val * o.grad + o.val * self.grad,
            (self.val * o.hess + o.val * self.hess) + cross,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.__pow__(-1.0)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.__pow__(-1.0)

    def __pow__(self, exponent):
        p = float(exponent)
        v = self.val
        if v == 0.0 or (v < 0.0 and not p.is_integer()):
            raise NonFiniteResult(f"power {p} undefined at base {v}")
        f = v ** p
        d1 = p * v ** (p - 1.0)
        d2 = p * (p - 1.0) * v ** (p - 2.0)
        return Jet2(f, d1 * self.grad, d1 * self.hess + d2 * np.outer(self.grad, self.grad))


def jet_variables(values) -> list:
    """Seed a vector of floats as independent jet variables."""
    values = [float(v) for v in values]
    n = len(values)
    jets = []
    for i, v in enumerate(values):
        g = np.zeros(n)
        g[i] = 1.0
        jets.append(Jet2(v, g, np.zeros((n, n))))
    return jets


def _pow_scalar(value, p: float):
    if isinstance(value, Jet2):
        return value ** p
    v = float(value)
    if v == 0.0 or (v < 0.0 and not float(p).is_integer()):
        raise NonFiniteResult(f"power {p} undefined at base {v}")
    return v ** p


# ---------------------------------------------------------------------------
# expression trees with analytic x-derivatives
# ---------------------------------------------------------------------------

class Expr:
    """Scalar in (x, y): evaluable with jet-valued y, analytic in x."""

    def eval(self, x, y):
        raise NotImplementedError

    def dx(self, k: int) -> "Expr":
        raise NotImplementedError


class Const(Expr):
    def __init__(self, value: float):
        self.value = float(value)

    def eval(self, x, y):
        return self.value

    def dx(self, k):
        return Const(0.0)


class FormValue(Expr):
    """The degree-m form of a coefficient field."""

    def __init__(self, field: CoefficientField):
        self.field = field

    def eval(self, x, y):
        return self.field.tensor_at(x).eval(y)

    def dx(self, k):
        return FormValue(self.field.dx_field(k))


class OneFormValue(Expr):
    """The linear form b_i(x) y^i."""

    def __init__(self, field: OneFormField):
        self.field = field

    def eval(self, x, y):
        return self.field.beta(x, y)

    def dx(self, k):
        return OneFormValue(self.field.dx_field(k))


class Power(Expr):
    def __init__(self, base: Expr, exponent: float):
        self.base = base
        self.exponent = float(exponent)

    def eval(self, x, y):
        return _pow_scalar(self.base.eval(x, y), self.exponent)

    def dx(self, k):
        p = self.exponent
        if p == 0.0:
            return Const(0.0)
        return Product((Const(p), Power(self.base, p - 1.0), self.base.dx(k)))


class Product(Expr):
    def __init__(self, factors):
        self.factors = tuple(factors)

    def eval(self, x, y):
        total = 1.0
        for f in self.factors:
            total = total * f.eval(x, y)
        return total

    def dx(self, k):
        terms = []
        for i, f in enumerate(self.factors):
            rest = self.factors[:i] + self.factors[i + 1 :] + (f.dx(k),)
            terms.append(Product(rest))
        return Sum(terms)


class Sum(Expr):
    def __init__(self, terms):
        self.terms = tuple(terms)

    def eval(self, x, y):
        total = 0.0
        for t in self.terms:
            total = total + t.eval(x, y)
        return total

    def dx(self, k):
        return Sum(tuple(t.dx(k) for t in self.terms))


# ---------------------------------------------------------------------------
# guarded scalar functions
# ---------------------------------------------------------------------------

@dataclass
class ScalarFunction:
    """Evaluable f(x, y) with its smooth-domain predicate attached."""

    name: str
    expr: Expr
    guards: tuple = ()

    def check_domain(self, x, y) -> None:
        for guard in self.guards:
            guard(x, y)

    def __call__(self, x, y) -> float:
        self.check_domain(x, y)
        value = self.expr.eval(x, [float(v) for v in y])
        value = float(value)
        if not math.isfinite(value):
            raise NonFiniteResult(f"{self.name} evaluated to {value}")
        return value


def form_positive_guard(field: CoefficientField, m: int) -> Callable:
    """Root argument must clear a scale-aware positive floor."""

    def guard(x, y):
        tensor = field.tensor_at(x)
        value = tensor.eval([float(v) for v in y])
        floor = 1e-12 * float(np.linalg.norm(y)) ** m * max(tensor.max_abs(), 1e-300)
        if value <= floor:
            raise DomainError(f"form value {value:.3e} at or below floor {floor:.3e}")

    return guard


def oneform_guard(field: OneFormField) -> Callable:
    def guard(x, y):
        field.beta_checked(x, y)

    return guard


def form_function(field: CoefficientField) -> ScalarFunction:
    return ScalarFunction("form", FormValue(field))


def mth_root_norm(field: CoefficientField, m: int) -> ScalarFunction:
    """F = (form)^(1/m) on the form > 0 domain."""
    return ScalarFunction(
        "F", Power(FormValue(field), 1.0 / m), (form_positive_guard(field, m),)
    )


def base_energy(field: CoefficientField, m: int) -> ScalarFunction:
    """F^2, the quantity whose half y-Hessian is the fundamental tensor."""
    return ScalarFunction(
        "F^2", Power(FormValue(field), 2.0 / m), (form_positive_guard(field, m),)
    )


def kropina_norm(field: CoefficientField, oneform: OneFormField, m: int) -> ScalarFunction:
    """Fbar = F^2 / beta."""
    expr = Product((Power(FormValue(field), 2.0 / m), Power(OneFormValue(oneform), -1.0)))
    return ScalarFunction(
        "Fbar", expr, (form_positive_guard(field, m), oneform_guard(oneform))
    )


def kropina_energy(field: CoefficientField, oneform: OneFormField, m: int) -> ScalarFunction:
    """Fbar^2 = F^4 / beta^2."""
    expr = Product((Power(FormValue(field), 4.0 / m), Power(OneFormValue(oneform), -2.0)))
    return ScalarFunction(
        "Fbar^2", expr, (form_positive_guard(field, m), oneform_guard(oneform))
    )


# ---------------------------------------------------------------------------
# derivative drivers
# ---------------------------------------------------------------------------

def value_grad_hess_y(f: ScalarFunction, x, y):
    """One forward pass: f, df/dy, d2f/dydy at (x, y)."""
    f.check_domain(x, y)
    x = [float(v) for v in x]
    result = f.expr.eval(x, jet_variables(y))
    if isinstance(result, Jet2):
        if not math.isfinite(result.val):
            raise NonFiniteResult(f"{f.name} evaluated to {result.val}")
        return result.val, result.grad, result.hess
    n = len(y)
    return float(result), np.zeros(n), np.zeros((n, n))


def grad_y(f: ScalarFunction, x, y) -> np.ndarray:
    return value_grad_hess_y(f, x, y)[1]


def hess_y(f: ScalarFunction, x, y) -> np.ndarray:
    return value_grad_hess_y(f, x, y)[2]


def grad_x(f: ScalarFunction, x, y) -> np.ndarray:
    """Analytic x-gradient via the differentiated expression tree."""
    f.check_domain(x, y)
    x = [float(v) for v in x]
    yf = [float(v) for v in y]
    out = np.array([float(f.expr.dx(k).eval(x, yf)) for k in range(1, len(x) + 1)])
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult(f"x-gradient of {f.name} is not finite")
    return out


def mixed_xy(f: ScalarFunction, x, y) -> np.ndarray:
    """Matrix [k, l] = d2 f / dx^k dy^l: analytic in x, forward mode in y."""
    f.check_domain(x, y)
    x = [float(v) for v in x]
    n = len(x)
    out = np.zeros((n, len(y)))
    for k in range(1, n + 1):
        row = f.expr.dx(k).eval(x, jet_variables(y))
        if isinstance(row, Jet2):
            out[k - 1] = row.grad
    if not np.all(np.isfinite(out)):
        raise NonFiniteResult(f"mixed derivative of {f.name} is not finite")
    return out


# ---------------------------------------------------------------------------
# Richardson central differences (cross-check only)
# ---------------------------------------------------------------------------

def _richardson(samples):
    """Collapse a ladder of h, h/2, ... central-difference estimates."""
    level = list(samples)
    power = 4.0
    while len(level) > 1:
        level = [
            (power * level[i + 1] - level[i]) / (power - 1.0)
            for i in range(len(level) - 1)
        ]
        power *= 4.0
    return level[0]


def fd_gradient(fn, v, rel_step=None, levels: int = 2) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    step0 = rel_step if rel_step is not None else _EPS ** (1.0 / 3.0)
    out = np.zeros(v.size)
    for i in range(v.size):
        h0 = step0 * (1.0 + abs(v[i]))
        ladder = []
        for lv in range(levels + 1):
            h = h0 / 2 ** lv
            vp = v.copy(); vp[i] += h
            vm = v.copy(); vm[i] -= h
            ladder.append((fn(vp) - fn(vm)) / (2 * h))
        out[i] = _richardson(ladder)
    return out

def fd_hessian(fn, v, rel_step=None, levels: int = 2) -> np.ndarray:
    # Second differences lose ~eps/h^2 to roundoff, so the step is much wider
    # than the first-order cbrt(eps) choice.
    v = np.asarray(v, dtype=float)
    step0 = rel_step if rel_step is not None else _EPS ** 0.2
    n = v.size
    out = np.zeros((n, n))
    f0 = fn(v)
    for i in range(n):
        hi0 = step0 * (1.0 + abs(v[i]))
        ladder = []
        for lv in range(levels + 1):
            h = hi0 / 2 ** lv
            vp = v.copy(); vp[i] += h
            vm = v.copy(); vm[i] -= h
            ladder.append((fn(vp) - 2.0 * f0 + fn(vm)) / (h * h))
        out[i, i] = _richardson(ladder)
        for j in range(i + 1, n):
            hj0 = step0 * (1.0 + abs(v[j]))
            ladder = []
            for lv in range(levels + 1):
                hi = hi0 / 2 ** lv
                hj = hj0 / 2 ** lv
                vpp = v.copy(); vpp[i] += hi; vpp[j] += hj
                vpm = v.copy(); vpm[i] += hi; vpm[j] -= hj
                vmp = v.copy(); vmp[i] -= hi; vmp[j] += hj
                vmm = v.copy(); vmm[i] -= hi; vmm[j] -= hj
                ladder.append((fn(vpp) - fn(vpm) - fn(vmp) + fn(vmm)) / (4 * hi * hj))
            out[i, j] = out[j, i] = _richardson(ladder)
    return out


@dataclass
class FdReport:
    """Deviation of the forward-mode derivatives from the finite-difference ones."""

    order: int
    max_abs: float
    max_rel: float


def fd_check(f: ScalarFunction, x, y, order: int) -> FdReport:
    """Compare forward-mode derivatives against Richardson central differences.

    order 1 checks grad_y and grad_x, order 2 checks hess_y and the mixed
    block.  Report-only: nothing is asserted here.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    diffs = []
    scales = []
    if order == 1:
        fd = fd_gradient(lambda yy: f(x, yy), y)
        ad = grad_y(f, x, y)
        diffs.append(np.abs(ad - fd)); scales.append(np.abs(fd))
        fdx = fd_gradient(lambda xx: f(xx, y), x)
        adx = grad_x(f, x, y)
        diffs.append(np.abs(adx - fdx)); scales.append(np.abs(fdx))
    elif order == 2:
        fd = fd_hessian(lambda yy: f(x, yy), y)
        ad = hess_y(f, x, y)
        diffs.append(np.abs(ad - fd).ravel()); scales.append(np.abs(fd).ravel())
        fdm = _fd_mixed(f, x, y)
        adm = mixed_xy(f, x, y)
        diffs.append(np.abs(adm - fdm).ravel()); scales.append(np.abs(fdm).ravel())
    else:
        raise ValueError(f"unsupported order {order}")
    diff = np.concatenate(diffs)
    scale = np.concatenate(scales)
    max_abs = float(diff.max()) if diff.size else 0.0
    rel = diff / (1.0 + scale)
    return FdReport(order, max_abs, float(rel.max()) if rel.size else 0.0)


def _fd_mixed(f: ScalarFunction, x, y, rel_step=None, levels: int = 2) -> np.ndarray:
    step0 = rel_step if rel_step is not None else _EPS ** 0.2
    nx, ny = len(x), len(y)
    out = np.zeros((nx, ny))
    for k in range(nx):
        hk0 = step0 * (1.0 + abs(x[k]))
        for l in range(ny):
            hl0 = step0 * (1.0 + abs(y[l]))
            ladder = []
            for lv in range(levels + 1):
                hk = hk0 / 2 ** lv
                hl = hl0 / 2 ** lv
                xp = x.copy(); xp[k] += hk
                xm = x.copy(); xm[k] -= hk
                yp = y.copy(); yp[l] += hl
                ym = y.copy(); ym[l] -= hl
                ladder.append(
                    (f(xp, yp) - f(xp, ym) - f(xm, yp) + f(xm, ym)) / (4 * hk * hl)
                )
            out[k, l] = _richardson(ladder)
    return out
