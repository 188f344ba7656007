"""Position-dependent coefficients: polynomials in x with exact derivatives.

Restricting the x-dependence to polynomials keeps every x-derivative analytic,
so closed forms are adjudicated against an oracle with no extra noise from the
coefficient side.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, DomainError
from .symtensor import SymmetricTensor, canonicalize

# |beta| below this multiple of ||y|| * max|b_i| counts as a vanishing one-form.
BETA_FLOOR = 1e-12


class Polynomial:
    """Multivariate polynomial: tuple of (exponent tuple, coefficient) terms."""

    __slots__ = ("n", "monomials")

    def __init__(self, n: int, monomials):
        terms = []
        seen = set()
        for exps, coeff in monomials:
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise DimensionMismatch(f"exponent tuple {exps} does not have length {n}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if exps in seen:
                raise ValueError(f"duplicate exponent tuple {exps}")
            seen.add(exps)
            terms.append((exps, float(coeff)))
        self.n = int(n)
        self.monomials = tuple(terms)

    @staticmethod
    def constant(n: int, value: float) -> "Polynomial":
        if value == 0.0:
            return Polynomial(n, [])
        return Polynomial(n, [((0,) * n, value)])

    def __call__(self, x) -> float:
        if len(x) != self.n:
            raise DimensionMismatch(f"point has length {len(x)}, expected {self.n}")
        total = 0.0
        for exps, coeff in self.monomials:
            term = coeff
            for i, e in enumerate(exps):
                for _ in range(e):
                    term *= x[i]
            total += term
        return total

    def deriv(self, axis: int) -> "Polynomial":
        """Exact partial derivative along the 1-based axis."""
        if axis < 1 or axis > self.n:
            raise DimensionMismatch(f"axis {axis} outside 1..{self.n}")
        a = axis - 1
        terms = []
        for exps, coeff in self.monomials:
            e = exps[a]
            if e == 0:
                continue
            new = list(exps)
            new[a] = e - 1
            terms.append((tuple(new), coeff * e))
        return Polynomial(self.n, terms)

    def is_zero(self) -> bool:
        return all(c == 0.0 for _, c in self.monomials)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for _, c in self.monomials), default=0.0)


class CoefficientField:
    """Symmetric coefficient tensor whose entries are polynomials in x."""

    def __init__(self, n: int, m: int, entries):
        canon = {}
        for key, poly in entries.items():
            ms = canonicalize(key, n)
            if len(ms.indices) != m:
                raise DimensionMismatch(f"index {key} does not have order {m}")
            if ms.indices != tuple(key):
                raise ValueError(f"index {tuple(key)} is not canonical (sorted)")
            if ms.indices in canon:
                raise ValueError(f"duplicate canonical index {ms.indices}")
            canon[ms.indices] = poly
        self.n = int(n)
        self.m = int(m)
        self.entries = canon
        self._dx_cache = {}

    @staticmethod
    def constant(n: int, m: int, values) -> "CoefficientField":
        return CoefficientField(
            n, m, {key: Polynomial.constant(n, v) for key, v in values.items()}
        )

    def _check_point(self, x):
        if len(x) != self.n:
            raise DimensionMismatch(f"point has length {len(x)}, expected {self.n}")

    def tensor_at(self, x) -> SymmetricTensor:
        """Materialise the coefficient tensor at the point x."""
        self._check_point(x)
        return SymmetricTensor(
            self.n, self.m, {key: poly(x) for key, poly in self.entries.items()}
        )

    def dx_field(self, k: int) -> "CoefficientField":
        """Field of entrywise partial derivatives along x^k (cached)."""
        if k not in self._dx_cache:
            self._dx_cache[k] = CoefficientField(
                self.n, self.m, {key: poly.deriv(k) for key, poly in self.entries.items()}
            )
        return self._dx_cache[k]

    def tensor_dx(self, x, k: int) -> SymmetricTensor:
        """Entrywise analytic d/dx^k of the coefficient tensor, evaluated at x."""
        return self.dx_field(k).tensor_at(x)

    def is_constant(self) -> bool:
        return all(
            self.dx_field(k).tensor_at((0.0,) * self.n).is_zero()
            for k in range(1, self.n + 1)
        )


class OneFormField:
    """One-form b_i(x) with polynomial components."""

    def __init__(self, n: int, components):
        components = tuple(components)
        if len(components) != n:
            raise DimensionMismatch(f"{len(components)} components for dimension {n}")
        for poly in components:
            if poly.n != n:
                raise DimensionMismatch("component polynomial has wrong arity")
        self.n = int(n)
        self.components = components
        self._dx_cache = {}

    @staticmethod
    def constant(n: int, values) -> "OneFormField":
        return OneFormField(n, [Polynomial.constant(n, v) for v in values])

    def _check_point(self, x):
        if len(x) != self.n:
            raise DimensionMismatch(f"point has length {len(x)}, expected {self.n}")

    def values_at(self, x) -> np.ndarray:
        self._check_point(x)
        return np.array([poly(x) for poly in self.components])

    def jacobian_at(self, x) -> np.ndarray:
        """Matrix [i, j] = db_i/dx^j (1-based axes collapse to 0-based storage)."""
        self._check_point(x)
        jac = np.zeros((self.n, self.n))
        for i, poly in enumerate(self.components):
            for j in range(1, self.n + 1):
                jac[i, j - 1] = poly.deriv(j)(x)
        return jac

    def dx_field(self, k: int) -> "OneFormField":
        if k not in self._dx_cache:
            self._dx_cache[k] = OneFormField(
                self.n, [poly.deriv(k) for poly in self.components]
            )
        return self._dx_cache[k]

    def beta(self, x, y):
        """The scalar b_i(x) y^i; generic over the scalar type of y."""
        self._check_point(x)
        if len(y) != self.n:
            raise DimensionMismatch(f"vector has length {len(y)}, expected {self.n}")
        total = 0.0
        for i, poly in enumerate(self.components):
            total = total + poly(x) * y[i]
        return total

    def beta_checked(self, x, y) -> float:
        """beta with the degeneracy guard: near-zero values are a domain error."""
        b = self.values_at(x)
        value = float(b @ np.asarray(y, dtype=float))
        floor = BETA_FLOOR * float(np.linalg.norm(y)) * float(np.max(np.abs(b)))
        if abs(value) <= floor:
            raise DomainError(
                f"one-form value {value:.3e} below degeneracy floor {floor:.3e}"
            )
        return value

    def is_constant(self) -> bool:
        zero = (0.0,) * self.n
        return all(
            self.dx_field(k).values_at(zero).tolist() == [0.0] * self.n
            for k in range(1, self.n + 1)
        )
