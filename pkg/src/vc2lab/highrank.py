"""Bases of symmetric matrices over F_p whose nonzero combinations all have full rank.

The construction goes through the field extension F_{p^n} = F_p[theta]/(f):
M_t is the Gram matrix of the bilinear form (u, v) -> Tr(theta^(t-1) * u * v)
in the power basis {1, theta, ..., theta^(n-1)}.  A nonzero combination of
the M_t is the Gram matrix of Tr(a * u * v) for some a != 0, which is
nondegenerate in odd characteristic, hence of rank n.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fp import (
    FieldCtx,
    FpMatrix,
    FpVector,
    _rank_array,
    derive_rng,
    ranks_to_digits,
)

# Polynomials are little-endian coefficient lists: coeffs[i] multiplies x**i.


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pmod(a: list[int], f: list[int], p: int) -> list[int]:
    a = list(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= df and a:
        a = _ptrim(a)
        if len(a) - 1 < df:
            break
        coef = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - coef * fi) % p
        a = _ptrim(a)
    return a


def _pmulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    return _pmod(_pmul(a, b, p), f, p)


def _ppowmod(base: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    acc = _pmod(list(base), f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, acc, f, p)
        acc = _pmulmod(acc, acc, f, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
        b = _ptrim(b)
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [(c * inv) % p for c in a]
    return a


def _peval(coeffs, x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# Trial division is exact and transparent but needs p**(n//2) candidate
# divisors; beyond this budget switch to the x**(p**n) == x criterion.
_TRIAL_BUDGET = 30_000


def _is_irreducible_trial(coeffs: tuple[int, ...], p: int) -> bool:
    n = len(coeffs) - 1
    if n == 1:
        return True
    if any(_peval(coeffs, x, p) == 0 for x in range(p)):
        return False
    f = list(coeffs)
    for d in range(2, n // 2 + 1):
        for idx in range(p ** d):
            g = []
            rem = idx
            for _ in range(d):
                g.append(rem % p)
                rem //= p
            g.append(1)
            if not _pmod(f, g, p):
                return False
    return True


def _is_irreducible_frobenius(coeffs: tuple[int, ...], p: int) -> bool:
    n = len(coeffs) - 1
    if n == 1:
        return True
    f = list(coeffs)
    # x**(p**k) mod f, computed by iterating k Frobenius steps
    t = [0, 1]
    frob_powers = {}
    for k in range(1, n + 1):
        t = _ppowmod(t, p, f, p)
        frob_powers[k] = t
    x_pn = frob_powers[n]
    if _ptrim([(a - b) % p for a, b in _zip_pad(x_pn, [0, 1], p)]):
        return False
    for q in _prime_factors(n):
        diff = _ptrim([(a - b) % p for a, b in _zip_pad(frob_powers[n // q], [0, 1], p)])
        g = _pgcd(f, diff, p)
        if len(g) - 1 != 0:
            return False
    return True


def _zip_pad(a: list[int], b: list[int], p: int):
    m = max(len(a), len(b))
    a = a + [0] * (m - len(a))
    b = b + [0] * (m - len(b))
    return zip(a, b)


def _is_irreducible(coeffs: tuple[int, ...], p: int) -> bool:
    n = len(coeffs) - 1
    candidates = sum(p ** d for d in range(2, n // 2 + 1))
    if candidates <= _TRIAL_BUDGET:
        return _is_irreducible_trial(coeffs, p)
    return _is_irreducible_frobenius(coeffs, p)


@dataclass(frozen=True)
class IrreduciblePoly:
    """Monic irreducible polynomial over F_p, little-endian coefficients."""

    ctx: FieldCtx
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(int(c) % self.ctx.p for c in self.coeffs))
        if len(self.coeffs) < 2 or self.coeffs[-1] != 1:
            raise ValueError("polynomial must be monic of degree >= 1")
        if not _is_irreducible(self.coeffs, self.ctx.p):
            raise ValueError("polynomial is reducible")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def build_irreducible(ctx: FieldCtx, n: int) -> IrreduciblePoly:
    """Smallest monic irreducible of degree n, enumerating low coefficients fastest.

    Candidates are ordered by the integer sum(c_i * p**i) over the non-leading
    coefficients, so x**2 + 2 precedes x**2 + x + 1 for p = 5.
    """
    if n < 1:
        raise ValueError("degree must be >= 1")
    p = ctx.p
    for idx in range(p ** n):
        coeffs = []
        rem = idx
        for _ in range(n):
            coeffs.append(rem % p)
            rem //= p
        coeffs.append(1)
        if _is_irreducible(tuple(coeffs), p):
            return IrreduciblePoly(ctx, tuple(coeffs))
    raise AssertionError("unreachable: irreducibles exist in every degree")


@dataclass(frozen=True)
class HighRankBasis:
    """n symmetric n x n matrices, every nonzero combination of full rank n."""

    ctx: FieldCtx
    n: int
    poly: IrreduciblePoly
    mats: tuple[FpMatrix, ...]

    def __post_init__(self) -> None:
        if len(self.mats) != self.n:
            raise ValueError("expected n matrices")
        for m in self.mats:
            if m.n_rows != self.n or m.n_cols != self.n or not m.is_symmetric():
                raise ValueError("matrices must be symmetric n x n")
        flat = np.stack([m.as_array().reshape(-1) for m in self.mats])
        if _rank_array(flat, self.ctx.p) != self.n:
            raise ValueError("matrices are linearly dependent")

    def mats_array(self) -> np.ndarray:
        """Stacked (n, n, n) int64 view of the matrices."""
        return np.stack([m.as_array() for m in self.mats])

    def to_json(self) -> dict:
        return {
            "p": self.ctx.p,
            "n": self.n,
            "poly": list(self.poly.coeffs),
            "mats": [m.to_json() for m in self.mats],
        }

    @staticmethod
    def from_json(doc: dict) -> "HighRankBasis":
        ctx = FieldCtx(int(doc["p"]))
        return HighRankBasis(
            ctx,
            int(doc["n"]),
            IrreduciblePoly(ctx, tuple(int(c) for c in doc["poly"])),
            tuple(FpMatrix.from_json(m) for m in doc["mats"]),
        )


@lru_cache(maxsize=64)
def build_trace_basis(ctx: FieldCtx, n: int) -> HighRankBasis:
    """Gram matrices of (u, v) -> Tr(theta^(t-1) u v) in the power basis.

    Deterministic: the extension uses the polynomial from build_irreducible,
    so two runs produce identical matrices.  Results are cached; everything
    returned is immutable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = ctx.p
    poly = build_irreducible(ctx, n)
    f = list(poly.coeffs)

    # theta^k mod f as coefficient vectors, k = 0 .. 4n-4
    powers = [[1]]
    for _ in range(max(4 * n - 4, 0)):
        nxt = _pmod([0] + powers[-1], f, p)
        powers.append(nxt)

    def coeff(vec: list[int], i: int) -> int:
        return vec[i] if i < len(vec) else 0

    # s[k] = Tr(theta^k) = trace of the multiplication-by-theta^k matrix
    s = [sum(coeff(powers[k + i], i) for i in range(n)) % p for k in range(3 * n - 2)]

    mats = []
    for t in range(n):
        rows = tuple(tuple(s[t + i + j] for j in range(n)) for i in range(n))
        mats.append(FpMatrix(ctx, rows))
    return HighRankBasis(ctx, n, poly, tuple(mats))


def _combo_rank(mats: np.ndarray, lam: np.ndarray, p: int) -> int:
    combo = np.tensordot(lam, mats, axes=(0, 0)) % p
    return _rank_array(combo, p)


def check_high_rank(
    basis: HighRankBasis,
    mode: str = "exhaustive",
    count: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> FpVector | None:
    """Verify that every checked nonzero combination has rank n.

    Returns None on pass, or the offending coefficient vector on failure
    (the lexicographically smallest one among the failures found).
    Exhaustive mode requires p**n <= 10**6.
    """
    p, n = basis.ctx.p, basis.n
    mats = basis.mats_array()
    if mode == "exhaustive":
        total = p ** n
        if total > 10 ** 6:
            raise ValueError("exhaustive check infeasible: p**n > 1e6")
        lams = ranks_to_digits(np.arange(1, total, dtype=np.int64), p, n)
        for lam in lams:
            if _combo_rank(mats, lam, p) != n:
                return FpVector(basis.ctx, tuple(int(x) for x in lam))
        return None
    if mode != "sampled":
        raise ValueError("mode must be 'exhaustive' or 'sampled'")

    def run_stream(stream_idx: int, stream_count: int) -> list[tuple[int, ...]]:
        rng = derive_rng(seed, "high-rank-check", stream_idx)
        bad = []
        done = 0
        while done < stream_count:
            lam = rng.integers(0, p, size=n)
            if not lam.any():
                continue
            done += 1
            if _combo_rank(mats, lam.astype(np.int64), p) != n:
                bad.append(tuple(int(x) for x in lam))
        return bad

    threads = max(1, threads)
    per = [count // threads + (1 if i < count % threads else 0) for i in range(threads)]
    failures: list[tuple[int, ...]] = []
    if threads == 1:
        failures = run_stream(0, count)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for res in ex.map(run_stream, range(threads), per):
                failures.extend(res)
    if failures:
        return FpVector(basis.ctx, min(failures))
    return None
