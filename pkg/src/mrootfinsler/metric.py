"""Base-metric quantities of the m-th root norm F = (form)^(1/m) at one point.

The closed forms for the fundamental tensor and its inverse are evaluated
here; `verify_base_forms` measures them against the differentiation oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import calculus
from .errors import DomainError, RiemannianOrderWarning, SingularMatrix
from .fields import CoefficientField

COND_LIMIT = 1e12

ORDER_MIN = 2
ORDER_MAX = 8


def _invert_guarded(matrix: np.ndarray, label: str) -> np.ndarray:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrix(f"{label} has condition number {cond:.3e}")
    return np.linalg.inv(matrix)


@dataclass
class MetricPoint:
    """Immutable snapshot of every base-metric quantity at (x, y)."""

    n: int
    m: int
    x: np.ndarray
    y: np.ndarray
    A: float            # degree-m form value
    A_i: np.ndarray     # first y-saturated contraction
    A_ij: np.ndarray    # second contraction
    A_ijk: np.ndarray   # third contraction; None when m == 2
    F: float            # m-th root norm
    l: np.ndarray       # normalized supporting covector dF/dy
    g: np.ndarray       # fundamental tensor, closed form
    g_inv: np.ndarray   # closed-form inverse
    A_inv: np.ndarray   # inverse of the second contraction
    field: CoefficientField
    order_flag: str = ""


def metric_point(field: CoefficientField, m: int, x, y) -> MetricPoint:
    """Assemble the base-metric snapshot; closed forms for g and its inverse.

    g_ij  = (m-1) A_ij / F^(m-2) - (m-2) A_i A_j / F^(2(m-1))
    g^ij  = F^(m-2) A^ij / (m-1) + (m-2) y^i y^j / ((m-1) F^2)
    with A^ij the numerically inverted second contraction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tensor = field.tensor_at(x)
    A = tensor.contract(y, 0)
    floor = 1e-12 * float(np.linalg.norm(y)) ** m * max(tensor.max_abs(), 1e-300)
    if A <= floor:
        raise DomainError(f"form value {A:.3e} at or below floor {floor:.3e}")

    order_flag = ""
    if m == 2:
        order_flag = "order 2 is Riemannian: closed forms target m > 2"
        warnings.warn(order_flag, RiemannianOrderWarning, stacklevel=2)

    A_i = tensor.contract(y, 1)
    A_ij = tensor.contract(y, 2)
    A_ijk = tensor.contract(y, 3) if m >= 3 else None
    F = A ** (1.0 / m)

    l = A_i / F ** (m - 1)
    g = (m - 1) * A_ij / F ** (m - 2) - (m - 2) * np.outer(A_i, A_i) / F ** (2 * (m - 1))
    A_inv = _invert_guarded(A_ij, "second contraction")
    g_inv = F ** (m - 2) * A_inv / (m - 1) + (m - 2) * np.outer(y, y) / ((m - 1) * F ** 2)

    return MetricPoint(
        n=field.n, m=m, x=x, y=y, A=A, A_i=A_i, A_ij=A_ij, A_ijk=A_ijk,
        F=F, l=l, g=g, g_inv=g_inv, A_inv=A_inv, field=field, order_flag=order_flag,
    )


def angular_tensor(point: MetricPoint) -> np.ndarray:
    """F times the y-Hessian of F, built from the oracle; annihilates y."""
    norm_fn = calculus.mth_root_norm(point.field, point.m)
    return point.F * calculus.hess_y(norm_fn, point.x, point.y)


@dataclass
class BaseFormReport:
    """Closed forms versus the oracle at one point."""

    g_residual: float        # max |g_closed - half hessian of F^2|
    inverse_residual: float  # max |g_inv_closed @ g_closed - identity|


def verify_base_forms(point: MetricPoint) -> BaseFormReport:
    energy = calculus.base_energy(point.field, point.m)
    oracle = 0.5 * calculus.hess_y(energy, point.x, point.y)
    g_res = float(np.max(np.abs(point.g - oracle)))
    eye_res = float(np.max(np.abs(point.g_inv @ point.g - np.eye(point.n))))
    return BaseFormReport(g_res, eye_res)
