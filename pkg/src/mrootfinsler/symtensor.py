"""Canonical multiset storage for fully symmetric coefficient tensors.

An order-m symmetric tensor over n variables keeps one value per sorted index
tuple together with the multiset multiplicity (the number of distinct
permutations), so evaluation and the y-saturated contractions reproduce the
full dense tensor without ever materialising n**m entries.  Indices are
1-based in every public signature.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, OrderOutOfRange


def index_multiplicity(indices) -> int:
    """Distinct permutations of an index multiset: m! / prod(count_i!)."""
    mult = math.factorial(len(indices))
    for c in Counter(indices).values():
        mult //= math.factorial(c)
    return mult


@dataclass(frozen=True)
class MultisetIndex:
    """Sorted index tuple plus its permutation multiplicity."""

    indices: tuple
    multiplicity: int


def canonicalize(raw_indices, n: int) -> MultisetIndex:
    """Sort an index tuple and attach its multiplicity.

    Idempotent on already-sorted input; raises IndexOutOfRange for entries
    outside 1..n.
    """
    idx = tuple(int(i) for i in raw_indices)
    for i in idx:
        if i < 1 or i > n:
            raise IndexOutOfRange(f"index {i} outside 1..{n}")
    srt = tuple(sorted(idx))
    return MultisetIndex(srt, index_multiplicity(srt))


class SymmetricTensor:
    """Order-m symmetric tensor; entries map sorted index tuples to values.

    Instances are immutable by convention: nothing in the package mutates
    `entries` after construction, so concurrent evaluation is safe.
    """

    __slots__ = ("n", "m", "entries")

    def __init__(self, n: int, m: int, entries: Mapping):
        if n < 1:
            raise DimensionMismatch(f"dimension must be positive, got {n}")
        if m < 1:
            raise OrderOutOfRange(f"order must be positive, got {m}")
        canon = {}
        for key, value in entries.items():
            key = tuple(int(i) for i in key)
            if len(key) != m:
                raise IndexOutOfRange(f"index {key} does not have order {m}")
            if tuple(sorted(key)) != key:
                raise IndexOutOfRange(f"index {key} is not sorted non-decreasing")
            for i in key:
                if i < 1 or i > n:
                    raise IndexOutOfRange(f"index {i} outside 1..{n}")
            canon[key] = float(value)
        self.n = int(n)
        self.m = int(m)
        self.entries = canon

    def __repr__(self):
        return f"SymmetricTensor(n={self.n}, m={self.m}, {len(self.entries)} entries)"

    def value(self, raw_indices) -> float:
        """Full-tensor component at any permuted index (canonical lookup)."""
        key = canonicalize(raw_indices, self.n)
        if len(key.indices) != self.m:
            raise IndexOutOfRange(f"index {raw_indices} does not have order {self.m}")
        return self.entries.get(key.indices, 0.0)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.entries.values())

    def _check_vector(self, y):
        if len(y) != self.n:
            raise DimensionMismatch(f"vector has length {len(y)}, expected {self.n}")

    def eval(self, y):
        """Evaluate the degree-m homogeneous form at y.

        Works for any scalar type supporting arithmetic (floats or forward-mode
        jets), which is how the calculus layer differentiates through it.
        """
        self._check_vector(y)
        total = 0.0
        for idx, c in self.entries.items():
            term = index_multiplicity(idx) * c
            for i in idx:
                term = term * y[i - 1]
            total = total + term
        return total

    def contract(self, y, k: int):
        """Saturate m-k slots with y, returning the order-k coefficient array.

        k = 0 gives the form value; k = 1, 2, 3 give the arrays whose scaled
        y-derivatives reproduce the first three derivative orders of the form
        (factor 1/m, 1/(m(m-1)), 1/(m(m-1)(m-2))).
        """
        if k < 0 or k > min(3, self.m):
            raise OrderOutOfRange(f"contraction order {k} not in 0..{min(3, self.m)}")
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise DimensionMismatch(f"vector has shape {y.shape}, expected ({self.n},)")
        if k == 0:
            return float(self.eval(y))

        out = np.zeros((self.n,) * k)
        for idx, c in self.entries.items():
            base = index_multiplicity(idx) * c
            if base == 0.0:
                continue
            counts = Counter(idx)
            if k == 1:
                for i, ci in counts.items():
                    rest = list(idx)
                    rest.remove(i)
                    out[i - 1] += base * ci * _prod(y, rest)
            elif k == 2:
                for i, ci in counts.items():
                    for j, cj in counts.items():
                        coef = ci * (cj - (i == j))
                        if coef == 0:
                            continue
                        rest = list(idx)
                        rest.remove(i)
                        rest.remove(j)
                        out[i - 1, j - 1] += base * coef * _prod(y, rest)
            else:
                for i, ci in counts.items():
                    for j, cj in counts.items():
                        cij = cj - (j == i)
                        if ci * cij == 0:
                            continue
                        for l, cl in counts.items():
                            coef = ci * cij * (cl - (l == i) - (l == j))
                            if coef == 0:
                                continue
                            rest = list(idx)
                            rest.remove(i)
                            rest.remove(j)
                            rest.remove(l)
                            out[i - 1, j - 1, l - 1] += base * coef * _prod(y, rest)

        scale = 1.0
        for r in range(k):
            scale /= self.m - r
        return out * scale


def _prod(y, indices) -> float:
    p = 1.0
    for i in indices:
        p *= y[i - 1]
    return p
