"""Arithmetic and dense linear algebra over the prime field F_p, p an odd prime.

Residues live in the canonical range [0, p).  Row reduction uses
leftmost-pivot / first-nonzero-row tie-breaking and null-space vectors are
scaled so their first nonzero coordinate is 1, which makes solved systems,
orthogonal complements and every downstream certificate bit-identical
across runs and platforms.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


def _is_prime(m: int) -> bool:
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class FieldCtx:
    """The prime field F_p.  Validated eagerly: p must be an odd prime."""

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or self.p < 3 or not _is_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p!r}")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ValueError(f"not invertible: 0 mod {self.p}")
        return pow(a, self.p - 2, self.p)


def scalar_inverse(ctx: FieldCtx, a: int) -> int:
    """Multiplicative inverse of a modulo ctx.p.  Raises for a = 0 mod p."""
    return ctx.inv(a)


@dataclass(frozen=True)
class FpVector:
    """Immutable dense vector of residues mod p.  Coordinates are normalized."""

    ctx: FieldCtx
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(int(c) % self.ctx.p for c in self.coords))

    @property
    def n(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other: "FpVector") -> "FpVector":
        self._check_compatible(other)
        return FpVector(self.ctx, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "FpVector") -> "FpVector":
        self._check_compatible(other)
        return FpVector(self.ctx, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "FpVector":
        return FpVector(self.ctx, tuple(-a for a in self.coords))

    def scale(self, c: int) -> "FpVector":
        return FpVector(self.ctx, tuple(c * a for a in self.coords))

    def dot(self, other: "FpVector") -> int:
        self._check_compatible(other)
        return sum(a * b for a, b in zip(self.coords, other.coords)) % self.ctx.p

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def _check_compatible(self, other: "FpVector") -> None:
        if self.ctx != other.ctx or self.n != other.n:
            raise ValueError("vectors from different spaces")

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "coords": list(self.coords)}

    @staticmethod
    def from_json(doc: dict) -> "FpVector":
        return FpVector(FieldCtx(int(doc["p"])), tuple(int(c) for c in doc["coords"]))


def vector(ctx: FieldCtx, coords: Iterable[int]) -> FpVector:
    return FpVector(ctx, tuple(coords))


def zero_vector(ctx: FieldCtx, n: int) -> FpVector:
    return FpVector(ctx, (0,) * n)


def basis_vector(ctx: FieldCtx, n: int, i: int) -> FpVector:
    """Standard basis vector with a 1 in (0-based) position i."""
    return FpVector(ctx, tuple(1 if j == i else 0 for j in range(n)))


@dataclass(frozen=True)
class FpMatrix:
    """Immutable dense matrix of residues mod p, stored row-major."""

    ctx: FieldCtx
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        p = self.ctx.p
        norm = tuple(tuple(int(e) % p for e in row) for row in self.rows)
        if norm and any(len(r) != len(norm[0]) for r in norm):
            raise ValueError("ragged matrix")
        object.__setattr__(self, "rows", norm)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def is_symmetric(self) -> bool:
        return self.n_rows == self.n_cols and all(
            self.rows[i][j] == self.rows[j][i] for i in range(self.n_rows) for j in range(i)
        )

    def mul_vec(self, v: FpVector) -> FpVector:
        if v.n != self.n_cols or v.ctx != self.ctx:
            raise ValueError("dimension mismatch")
        p = self.ctx.p
        return FpVector(self.ctx, tuple(sum(r * c for r, c in zip(row, v.coords)) % p for row in self.rows))

    def transpose(self) -> "FpMatrix":
        return FpMatrix(self.ctx, tuple(zip(*self.rows)) if self.rows else ())

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.int64).reshape(self.n_rows, self.n_cols)

    @staticmethod
    def from_array(ctx: FieldCtx, arr: np.ndarray) -> "FpMatrix":
        return FpMatrix(ctx, tuple(tuple(int(e) for e in row) for row in np.asarray(arr)))

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "rows": [list(r) for r in self.rows]}

    @staticmethod
    def from_json(doc: dict) -> "FpMatrix":
        return FpMatrix(FieldCtx(int(doc["p"])), tuple(tuple(int(e) for e in r) for r in doc["rows"]))


def identity_matrix(ctx: FieldCtx, n: int) -> FpMatrix:
    return FpMatrix(ctx, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))


# ---------------------------------------------------------------------------
# Row reduction and derived solvers.
# ---------------------------------------------------------------------------

def _rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p.

    Pivots are chosen leftmost-column-first and, within a column, the first
    row (top to bottom) with a nonzero entry.  Deterministic by design.
    """
    a = np.array(a, dtype=np.int64) % p
    n_rows, n_cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = (a[r] * pow(int(a[r, c]), p - 2, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _rank_array(a: np.ndarray, p: int) -> int:
    """Rank mod p by plain forward elimination (no back substitution)."""
    a = np.array(a, dtype=np.int64) % p
    n_rows, n_cols = a.shape
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r, c:] = (a[r, c:] * inv) % p
        below = a[r + 1:, c]
        if below.size:
            a[r + 1:, c:] = (a[r + 1:, c:] - np.outer(below, a[r, c:])) % p
        r += 1
    return r


def mat_rank(m: FpMatrix) -> int:
    """Rank of m over F_p."""
    if m.n_rows == 0 or m.n_cols == 0:
        return 0
    return _rank_array(m.as_array(), m.ctx.p)


def _null_basis_from_rref(rref: np.ndarray, pivots: list[int], n_cols: int, p: int) -> list[np.ndarray]:
    """One canonical null-space vector per free column.

    Each vector is scaled so that its first nonzero coordinate equals 1.
    """
    pivot_set = set(pivots)
    out = []
    for f in range(n_cols):
        if f in pivot_set:
            continue
        v = np.zeros(n_cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-rref[i, f]) % p
        first = int(np.nonzero(v)[0][0])
        v = (v * pow(int(v[first]), p - 2, p)) % p
        out.append(v)
    return out


@dataclass(frozen=True)
class AffineSolution:
    """Full parametrization of the solution set of A x = b.

    The solution set is particular + span(null_basis); it has exactly
    p**len(null_basis) elements.
    """

    particular: FpVector
    null_basis: tuple[FpVector, ...]


def solve_affine(a: FpMatrix, b: FpVector) -> AffineSolution | None:
    """Solve A x = b over F_p.  Returns None when the system is inconsistent."""
    if a.n_rows != b.n:
        raise ValueError("dimension mismatch: A has %d rows, b has %d coordinates" % (a.n_rows, b.n))
    if a.ctx != b.ctx:
        raise ValueError("mixed field contexts")
    p = a.ctx.p
    n_cols = a.n_cols
    aug = np.concatenate([a.as_array(), b.as_array().reshape(-1, 1)], axis=1)
    rref, pivots = _rref(aug, p)
    if n_cols in pivots:
        return None
    x = np.zeros(n_cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = rref[i, n_cols]
    nulls = _null_basis_from_rref(rref[:, :n_cols], pivots, n_cols, p)
    return AffineSolution(
        FpVector(a.ctx, tuple(int(e) for e in x)),
        tuple(FpVector(a.ctx, tuple(int(e) for e in v)) for v in nulls),
    )


def orth_complement(vs: Sequence[FpVector], ctx: FieldCtx | None = None, n: int | None = None) -> list[FpVector]:
    """Basis of {u : <u, v> = 0 for all v in vs}.

    For an empty vs the ambient space must be given via ctx and n.
    """
    if not vs:
        if ctx is None or n is None:
            raise ValueError("empty input: pass ctx and n explicitly")
        return [basis_vector(ctx, n, i) for i in range(n)]
    ctx = vs[0].ctx
    n = vs[0].n
    if any(v.ctx != ctx or v.n != n for v in vs):
        raise ValueError("vectors from different spaces")
    a = np.stack([v.as_array() for v in vs])
    rref, pivots = _rref(a, ctx.p)
    nulls = _null_basis_from_rref(rref, pivots, n, ctx.p)
    return [FpVector(ctx, tuple(int(e) for e in v)) for v in nulls]


def null_space(a: FpMatrix) -> list[FpVector]:
    """Basis of {x : A x = 0}, canonically scaled."""
    rref, pivots = _rref(a.as_array(), a.ctx.p)
    nulls = _null_basis_from_rref(rref, pivots, a.n_cols, a.ctx.p)
    return [FpVector(a.ctx, tuple(int(e) for e in v)) for v in nulls]


# ---------------------------------------------------------------------------
# Group-element enumeration: vectors of F_p^n <-> integer ranks.
#
# rank(x) = sum_i x_i * p**(n-1-i), so rank order equals lexicographic order
# on coordinate tuples, with the first coordinate most significant.
# ---------------------------------------------------------------------------

def rank_powers(p: int, n: int) -> np.ndarray:
    return np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)


def ranks_to_digits(ranks: np.ndarray, p: int, n: int) -> np.ndarray:
    """Decode integer ranks into an (m, n) array of coordinates."""
    ranks = np.asarray(ranks, dtype=np.int64)
    out = np.empty((ranks.shape[0], n), dtype=np.int64)
    rem = ranks.copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = rem % p
        rem //= p
    return out


def digits_to_ranks(digits: np.ndarray, p: int) -> np.ndarray:
    digits = np.asarray(digits, dtype=np.int64)
    return digits @ rank_powers(p, digits.shape[1])


def vector_rank(v: FpVector) -> int:
    r = 0
    for c in v.coords:
        r = r * v.ctx.p + c
    return r


def vector_from_rank(ctx: FieldCtx, n: int, rank: int) -> FpVector:
    coords = []
    for _ in range(n):
        coords.append(rank % ctx.p)
        rank //= ctx.p
    return FpVector(ctx, tuple(reversed(coords)))


def iter_group_chunks(p: int, n: int, chunk: int = 1 << 16):
    """Yield (start_rank, digit_block) over all of F_p^n in rank order."""
    total = p ** n
    start = 0
    while start < total:
        stop = min(start + chunk, total)
        yield start, ranks_to_digits(np.arange(start, stop, dtype=np.int64), p, n)
        start = stop


# ---------------------------------------------------------------------------
# Deterministic per-module PRNG streams.
# ---------------------------------------------------------------------------

def derive_rng(seed: int, *key: object) -> np.random.Generator:
    """A PRNG stream keyed by (seed, *key); strings are hashed stably."""
    parts = [int(seed) & 0xFFFFFFFF]
    for k in key:
        if isinstance(k, str):
            parts.append(zlib.crc32(k.encode("utf-8")))
        else:
            parts.append(int(k) & 0xFFFFFFFF)
    return np.random.default_rng(np.random.SeedSequence(parts))


def random_vector(ctx: FieldCtx, n: int, rng: np.random.Generator, nonzero: bool = False) -> FpVector:
    while True:
        v = FpVector(ctx, tuple(int(x) for x in rng.integers(0, ctx.p, size=n)))
        if not nonzero or not v.is_zero():
            return v
