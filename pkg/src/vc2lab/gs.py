"""Membership oracles for the linear and quadratic Green-Sanders sets.

GS(p, n) contains the vectors whose first nonzero coordinate equals 1.
QGS(p, n) contains the vectors whose first nonzero value in the sequence
Q_1(x), ..., Q_n(x) equals 1, where Q_t(x) = x^T M_t x for a basis
M_1, ..., M_n of symmetric matrices with the full-rank-combination property.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fp import FieldCtx, FpVector, digits_to_ranks, iter_group_chunks
from .highrank import HighRankBasis


def fnz(x: FpVector) -> int:
    """1-based index of the first nonzero coordinate; n + 1 for the zero vector."""
    for i, c in enumerate(x.coords):
        if c != 0:
            return i + 1
    return x.n + 1


@dataclass(frozen=True)
class GsSet:
    """The linear Green-Sanders set in F_p^n."""

    ctx: FieldCtx
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def p(self) -> int:
        return self.ctx.p

    def contains(self, x: FpVector) -> bool:
        if x.n != self.n:
            raise ValueError("dimension mismatch")
        i = fnz(x)
        return i <= self.n and x.coords[i - 1] == 1

    def contains_digits(self, digits: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (m, n) coordinate block."""
        nz = digits != 0
        has = nz.any(axis=1)
        first = np.argmax(nz, axis=1)
        vals = digits[np.arange(digits.shape[0]), first]
        return has & (vals == 1)

    def membership_table(self) -> np.ndarray:
        out = np.empty(self.p ** self.n, dtype=bool)
        for start, block in iter_group_chunks(self.p, self.n):
            out[start:start + block.shape[0]] = self.contains_digits(block)
        return out


@dataclass(frozen=True)
class QgsSet:
    """The quadratic Green-Sanders set determined by a high-rank basis."""

    basis: HighRankBasis

    @property
    def ctx(self) -> FieldCtx:
        return self.basis.ctx

    @property
    def p(self) -> int:
        return self.basis.ctx.p

    @property
    def n(self) -> int:
        return self.basis.n

    @cached_property
    def _mats(self) -> np.ndarray:
        m = self.basis.mats_array()
        m.flags.writeable = False
        return m

    def eval_q(self, t: int, x: FpVector) -> int:
        """Q_t(x) = x^T M_t x mod p, with t in [1, n]."""
        if not 1 <= t <= self.n:
            raise ValueError(f"form index {t} out of range [1, {self.n}]")
        v = x.as_array()
        return int(v @ self._mats[t - 1] @ v % self.p)

    def q_values(self, x: FpVector) -> tuple[int, ...]:
        v = x.as_array()
        return tuple(int(v @ m @ v % self.p) for m in self._mats)

    def cross_term(self, t: int, x: FpVector, y: FpVector) -> int:
        """2 x^T M_t y mod p."""
        if not 1 <= t <= self.n:
            raise ValueError(f"form index {t} out of range [1, {self.n}]")
        return int(2 * (x.as_array() @ self._mats[t - 1] @ y.as_array()) % self.p)

    def contains(self, x: FpVector) -> bool:
        if x.n != self.n:
            raise ValueError("dimension mismatch")
        v = x.as_array()
        for m in self._mats:
            q = int(v @ m @ v % self.p)
            if q != 0:
                return q == 1
        return False

    def contains_digits(self, digits: np.ndarray) -> np.ndarray:
        """Vectorized membership: scan Q_1, Q_2, ... short-circuiting per row."""
        m = digits.shape[0]
        member = np.zeros(m, dtype=bool)
        undecided = np.ones(m, dtype=bool)
        for mat in self._mats:
            if not undecided.any():
                break
            rows = digits[undecided]
            q = np.einsum("ij,jk,ik->i", rows, mat, rows) % self.p
            hit = q != 0
            idx = np.flatnonzero(undecided)
            member[idx[hit]] = q[hit] == 1
            undecided[idx[hit]] = False
        return member

    def membership_table(self) -> np.ndarray:
        out = np.empty(self.p ** self.n, dtype=bool)
        for start, block in iter_group_chunks(self.p, self.n):
            out[start:start + block.shape[0]] = self.contains_digits(block)
        return out


@dataclass(frozen=True, eq=False)
class ExplicitSet:
    """Membership oracle backed by an explicit bitset over group ranks."""

    ctx: FieldCtx
    n: int
    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=bool)
        if t.shape != (self.ctx.p ** self.n,):
            raise ValueError("table must cover the whole group")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def p(self) -> int:
        return self.ctx.p

    def contains(self, x: FpVector) -> bool:
        r = 0
        for c in x.coords:
            r = r * self.p + c
        return bool(self.table[r])

    def contains_digits(self, digits: np.ndarray) -> np.ndarray:
        return self.table[digits_to_ranks(digits, self.p)]

    def membership_table(self) -> np.ndarray:
        return self.table


# Thin functional aliases matching the oracle-style call signatures.

def gs_contains(a: GsSet, x: FpVector) -> bool:
    return a.contains(x)


def qgs_contains(a: QgsSet, x: FpVector) -> bool:
    return a.contains(x)


def eval_q(a: QgsSet, t: int, x: FpVector) -> int:
    return a.eval_q(t, x)


def cross_term(a: QgsSet, t: int, x: FpVector, y: FpVector) -> int:
    return a.cross_term(t, x, y)
