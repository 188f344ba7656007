"""Spray coefficients, the closed-form decomposition, and geodesic integration.

Sprays come from G^i = (1/4) g^il ( [E]_{x^k y^l} y^k - [E]_{x^l} ) with E the
squared norm, using the oracle's derivatives and a numeric inverse of the
oracle Hessian; the same routine serves the base and the transformed metric.
Projective relatedness is decided by the wedge of the spray difference with y,
which is zero exactly when the difference is proportional to y.  The closed-
form P/Q split is evaluated verbatim (both readings of its ambiguous scalar)
and only ever reported.

Geodesic convention: the integrated system is x'' = -G(x, x') with G as above,
i.e. the normalization that pairs the quarter-factor spray with a coefficient-
free second-order equation.  Any factor-2 convention only reparametrises paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import calculus
from .errors import DomainError, NonFiniteResult, SingularMatrix
from .fields import CoefficientField, OneFormField
from .kropina import AuxScalars, aux_scalars_from
from .metric import COND_LIMIT, metric_point

NAN = float("nan")


def spray_coeffs(energy: calculus.ScalarFunction, x, y) -> np.ndarray:
    """Quarter g-inverse of the standard spray bracket for the given energy."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = 0.5 * calculus.hess_y(energy, x, y)
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrix(f"fundamental tensor condition number {cond:.3e}")
    mixed = calculus.mixed_xy(energy, x, y)
    rhs = y @ mixed - calculus.grad_x(energy, x, y)
    return 0.25 * np.linalg.solve(g, rhs)


# ---------------------------------------------------------------------------
# analytic x-derivative bundle for the closed-form split
# ---------------------------------------------------------------------------

@dataclass
class _Bundle:
    """Contractions and their exact x-derivatives at one (x, y)."""

    A: float
    A_i: np.ndarray
    A_ij: np.ndarray
    A_x: np.ndarray      # [k] = dA/dx^k
    A_i_x: np.ndarray    # [k, i] = dA_i/dx^k
    A_ij_x: np.ndarray   # [k, i, j]
    b: np.ndarray
    b_jac: np.ndarray    # [i, k] = db_i/dx^k
    beta: float
    beta_x: np.ndarray   # [k] = dbeta/dx^k


def _bundle(field: CoefficientField, oneform: OneFormField, x, y) -> _Bundle:
    n = field.n
    tensor = field.tensor_at(x)
    A = tensor.contract(y, 0)
    A_i = tensor.contract(y, 1)
    A_ij = tensor.contract(y, 2)
    A_x = np.zeros(n)
    A_i_x = np.zeros((n, n))
    A_ij_x = np.zeros((n, n, n))
    for k in range(1, n + 1):
        dtensor = field.tensor_dx(x, k)
        A_x[k - 1] = dtensor.contract(y, 0)
        A_i_x[k - 1] = dtensor.contract(y, 1)
        A_ij_x[k - 1] = dtensor.contract(y, 2)
    b = oneform.values_at(x)
    b_jac = oneform.jacobian_at(x)
    beta = float(b @ np.asarray(y, dtype=float))
    beta_x = b_jac.T @ np.asarray(y, dtype=float)
    return _Bundle(A, A_i, A_ij, A_x, A_i_x, A_ij_x, b, b_jac, beta, beta_x)


def base_metric_x_derivatives(bundle: _Bundle, m: int) -> np.ndarray:
    """Exact [k, j, l] = d g_jl / dx^k via the chain rule on the closed form."""
    A, A_i, A_ij = bundle.A, bundle.A_i, bundle.A_ij
    pa = (2.0 - m) / m
    pb = (2.0 - 2.0 * m) / m
    Apa, Apb = A ** pa, A ** pb
    aa = np.outer(A_i, A_i)
    n = A_i.size
    out = np.zeros((n, n, n))
    for k in range(n):
        aa_x = np.outer(bundle.A_i_x[k], A_i) + np.outer(A_i, bundle.A_i_x[k])
        out[k] = (m - 1) * (
            bundle.A_ij_x[k] * Apa + A_ij * pa * A ** (pa - 1) * bundle.A_x[k]
        ) - (m - 2) * (aa_x * Apb + aa * pb * A ** (pb - 1) * bundle.A_x[k])
    return out


def transform_tail(bundle: _Bundle, m: int) -> np.ndarray:
    """The non-base tail of the split transformed tensor, evaluated verbatim."""
    A, A_i, b, beta = bundle.A, bundle.A_i, bundle.b, bundle.beta
    qa = (4.0 - m) / m
    qc = (4.0 - 2.0 * m) / m
    cross = np.outer(A_i, b) + np.outer(b, A_i)
    return (
        -4 * A ** qa * cross / beta ** 3
        + (2 + A ** (4.0 / m)) * np.outer(b, b) / beta ** 4
        + 4 * A ** qc * np.outer(A_i, A_i) / beta ** 2
    )


def transform_tail_x_derivatives(bundle: _Bundle, m: int) -> np.ndarray:
    """Exact [k, j, l] = d X_jl / dx^k for the verbatim tail above."""
    A, A_i, b, beta = bundle.A, bundle.A_i, bundle.b, bundle.beta
    qa = (4.0 - m) / m
    qb = 4.0 / m
    qc = (4.0 - 2.0 * m) / m
    cross = np.outer(A_i, b) + np.outer(b, A_i)
    bb = np.outer(b, b)
    aa = np.outer(A_i, A_i)
    n = A_i.size
    out = np.zeros((n, n, n))
    for k in range(n):
        Ax = bundle.A_x[k]
        Aix = bundle.A_i_x[k]
        bx = bundle.b_jac[:, k]
        betax = bundle.beta_x[k]
        cross_x = (
            np.outer(Aix, b) + np.outer(A_i, bx) + np.outer(bx, A_i) + np.outer(b, Aix)
        )
        bb_x = np.outer(bx, b) + np.outer(b, bx)
        aa_x = np.outer(Aix, A_i) + np.outer(A_i, Aix)
        out[k] = (
            -4 * (qa * A ** (qa - 1) * Ax * cross + A ** qa * cross_x) / beta ** 3
            + 12 * A ** qa * cross * betax / beta ** 4
            + qb * A ** (qb - 1) * Ax * bb / beta ** 4
            + (2 + A ** qb) * bb_x / beta ** 4
            - 4 * (2 + A ** qb) * bb * betax / beta ** 5
            + 4 * (qc * A ** (qc - 1) * Ax * aa + A ** qc * aa_x) / beta ** 2
            - 8 * A ** qc * aa * betax / beta ** 3
        )
    return out


def scale_gradient(bundle: _Bundle, m: int) -> np.ndarray:
    """omega_k: exact x-gradient of twice the squared norm ratio (2 tau^2)."""
    A, beta = bundle.A, bundle.beta
    return (
        (4.0 / m) * A ** (2.0 / m - 1) * bundle.A_x / beta ** 2
        - 4 * A ** (2.0 / m) * bundle.beta_x / beta ** 3
    )


# ---------------------------------------------------------------------------
# closed-form decomposition
# ---------------------------------------------------------------------------

@dataclass
class SprayPoint:
    """Oracle sprays plus the verbatim closed-form split at one (x, y)."""

    G: np.ndarray             # base spray
    Gbar: np.ndarray          # transformed spray
    D: np.ndarray             # Gbar - G
    X: np.ndarray             # verbatim tail of the split tensor
    omega: np.ndarray         # x-gradient of twice the squared norm ratio
    P_closed: float           # verbatim scalar part (NaN when degenerate)
    Q_closed: np.ndarray      # verbatim vector part, printed scalar reading
    Q_closed_alt: np.ndarray  # same with the alternative scalar reading
    Q_lead: np.ndarray        # first half of Q (one-form direction, printed reading)
    Q_inv: np.ndarray         # second half of Q (inverse-contraction part)
    aux: AuxScalars
    degenerate_order4: bool


def pq_decomposition(
    field: CoefficientField, oneform: OneFormField, m: int, x, y
) -> SprayPoint:
    """Oracle sprays always; closed-form P and Q verbatim where defined.

    The closed Q is printed with a scalar that collides with the one defined
    by the inverse-tensor rewrite; both readings are returned (`Q_closed` uses
    the scalar as printed in the decomposition, `Q_closed_alt` the one from
    the expansion it descends from).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = metric_point(field, m, x, y)
    beta = oneform.beta_checked(x, y)

    G = spray_coeffs(calculus.base_energy(field, m), x, y)
    Gbar = spray_coeffs(calculus.kropina_energy(field, oneform, m), x, y)
    D = Gbar - G

    bundle = _bundle(field, oneform, x, y)
    X = transform_tail(bundle, m)
    omega = scale_gradient(bundle, m)

    b2 = float(bundle.b @ base.A_inv @ bundle.b)
    aux = aux_scalars_from(base.F, beta, b2, m)

    if aux.degenerate_order4:
        nanv = np.full(base.n, NAN)
        return SprayPoint(
            G, Gbar, D, X, omega, NAN,
            nanv, nanv.copy(), nanv.copy(), nanv.copy(), aux, True,
        )

    dg = base_metric_x_derivatives(bundle, m)
    dX = transform_tail_x_derivatives(bundle, m)
    g = base.g
    tau = aux.tau
    n = base.n

    # W_l = sum_jk [2 w_k g_jl - w_l g_jk + 2 dX_jl/dx^k - dX_jk/dx^l] y^j y^k
    # V_l = sum_jk [dg_jl/dx^k - dg_jk/dx^l] y^j y^k
    gy = g @ y
    ygy = float(y @ gy)
    W = np.zeros(n)
    V = np.zeros(n)
    for l in range(n):
        dX_contr = sum(y[k] * (y @ dX[k][:, l]) for k in range(n))
        dX_swap = float(y @ dX[l] @ y)
        dg_contr = sum(y[k] * (y @ dg[k][:, l]) for k in range(n))
        dg_swap = float(y @ dg[l] @ y)
        W[l] = 2 * float(omega @ y) * gy[l] - omega[l] * ygy + 2 * dX_contr - dX_swap
        V[l] = dg_contr - dg_swap
    S = 2 * tau ** 2 * V + W

    b_up = base.A_inv @ bundle.b
    P_closed = 0.25 * float((aux.p1 * b_up + aux.p3 * y) @ S) + (
        (m - 2) / (4 * tau ** 2 * base.F ** 2 * (m - 1))
    ) * float(y @ W)
    q_lead = 0.25 * b_up * float((aux.p2 * b_up + aux.p1 * y) @ S)
    q_lead_alt = 0.25 * b_up * float((aux.p0 * b_up + aux.p1 * y) @ S)
    q_inv = (base.F ** (m - 2) / (8 * tau ** 2 * (m - 1))) * (base.A_inv @ W)

    return SprayPoint(
        G, Gbar, D, X, omega, P_closed,
        q_lead + q_inv, q_lead_alt + q_inv, q_lead, q_inv, aux, False,
    )


def projective_residual(
    field: CoefficientField, oneform: OneFormField, m: int, x, y
) -> float:
    """Max wedge component of the spray difference with y; zero iff D ~ y.

    Evaluated at y/||y|| so the result is invariant under rescaling y; the
    wedge itself is normalised by 1 + ||D|| ||y||.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    y_unit = y / np.linalg.norm(y)
    G = spray_coeffs(calculus.base_energy(field, m), x, y_unit)
    Gbar = spray_coeffs(calculus.kropina_energy(field, oneform, m), x, y_unit)
    D = Gbar - G
    wedge = 0.0
    for i in range(len(y_unit)):
        for j in range(i + 1, len(y_unit)):
            wedge = max(wedge, abs(D[i] * y_unit[j] - D[j] * y_unit[i]))
    return wedge / (1.0 + float(np.linalg.norm(D)) * float(np.linalg.norm(y_unit)))


def split_defect(point: SprayPoint, y) -> dict:
    """How far the closed split is from reproducing the oracle difference.

    Returns max |D - (P y + Q)| for both scalar readings, the tangential
    comparison (component orthogonal to y, insensitive to P), and the verbatim
    relatedness balance, which equates the two halves of Q as printed.
    """
    y = np.asarray(y, dtype=float)
    if point.degenerate_order4:
        return {
            "split_defect": NAN, "split_defect_alt": NAN,
            "tangential_defect": NAN, "tangential_defect_alt": NAN,
            "balance_defect": NAN,
        }

    def tangential(v):
        return v - (float(v @ y) / float(y @ y)) * y

    recon = point.P_closed * y + point.Q_closed
    recon_alt = point.P_closed * y + point.Q_closed_alt
    t_d = tangential(point.D)
    return {
        "split_defect": float(np.max(np.abs(point.D - recon))),
        "split_defect_alt": float(np.max(np.abs(point.D - recon_alt))),
        "tangential_defect": float(np.max(np.abs(t_d - tangential(point.Q_closed)))),
        "tangential_defect_alt": float(
            np.max(np.abs(t_d - tangential(point.Q_closed_alt)))
        ),
        "balance_defect": float(np.max(np.abs(point.Q_lead - point.Q_inv))),
    }


# ---------------------------------------------------------------------------
# geodesic integration
# ---------------------------------------------------------------------------

@dataclass
class GeodesicPath:
    """Fixed-step trajectory; truncated=True when the domain was exhausted."""

    samples: list          # (t, x array, v array)
    step: float
    metric: str            # "base" | "kropina"
    truncated: bool = False
    reason: str = ""


def integrate_geodesic(
    energy: calculus.ScalarFunction, x0, y0, t_end: float, steps: int,
    metric: str = "base",
) -> GeodesicPath:
    """Classical fixed-step RK4 on (x' = v, v' = -G(x, v))."""
    if steps < 1:
        raise ValueError("steps must be positive")
    h = float(t_end) / steps
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(y0, dtype=float).copy()
    samples = [(0.0, x.copy(), v.copy())]
    truncated = False
    reason = ""

    def acc(xs, vs):
        return -spray_coeffs(energy, xs, vs)

    for i in range(1, steps + 1):
        try:
            k1x, k1v = v, acc(x, v)
            k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
        except (DomainError, SingularMatrix, NonFiniteResult) as exc:
            truncated = True
            reason = str(exc)
            break
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NonFiniteResult(f"non-finite state at step {i}")
        samples.append((i * h, x.copy(), v.copy()))

    return GeodesicPath(samples, h, metric, truncated, reason)
