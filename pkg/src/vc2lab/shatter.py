"""Shattering search: VC-dimension by translates, quadratic shattering by shifts.

The linear search enumerates every translate y once per candidate set,
collects the achieved pattern bitmasks, and tests completeness; candidate
sets are grown only from already-shattered sets (shattering is monotone
under subsets), with the representative fixed to contain 0 (shattering is
translation invariant).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .fp import FieldCtx, FpVector, digits_to_ranks, iter_group_chunks, ranks_to_digits, vector_from_rank


class MembershipOracle(Protocol):
    """Total membership predicate on F_p^n."""

    ctx: FieldCtx

    @property
    def p(self) -> int: ...

    @property
    def n(self) -> int: ...

    def contains(self, x: FpVector) -> bool: ...

    def contains_digits(self, digits: np.ndarray) -> np.ndarray: ...

    def membership_table(self) -> np.ndarray: ...


MAX_SET_SIZE = 20
MAX_GROUP_ENUM = 10 ** 8
# vc_dim materializes an N x N translate table; keep it modest.
MAX_VCDIM_GROUP = 6000


@dataclass(frozen=True)
class ContainmentMap:
    """Verdict grid on [0, k]^2; True means the cell lands in the set.

    None marks an unassigned cell of a partial map.
    """

    k: int
    verdicts: tuple[tuple[bool | None, ...], ...]

    def __post_init__(self) -> None:
        if len(self.verdicts) != self.k + 1 or any(len(r) != self.k + 1 for r in self.verdicts):
            raise ValueError("verdict grid must be (k+1) x (k+1)")

    def is_total(self) -> bool:
        return all(v is not None for row in self.verdicts for v in row)

    def assign(self, i: int, j: int, verdict: bool) -> "ContainmentMap":
        rows = [list(r) for r in self.verdicts]
        rows[i][j] = verdict
        return ContainmentMap(self.k, tuple(tuple(r) for r in rows))

    def to_index(self) -> int:
        """Bit (i*(k+1)+j) set means the cell (i, j) is a complement cell.

        Index 0 is therefore the all-in-set map.
        """
        if not self.is_total():
            raise ValueError("partial map has no index")
        side = self.k + 1
        idx = 0
        for i in range(side):
            for j in range(side):
                if not self.verdicts[i][j]:
                    idx |= 1 << (i * side + j)
        return idx

    @staticmethod
    def from_index(k: int, idx: int) -> "ContainmentMap":
        side = k + 1
        rows = tuple(
            tuple(not (idx >> (i * side + j)) & 1 for j in range(side))
            for i in range(side)
        )
        return ContainmentMap(k, rows)


def all_maps(k: int):
    """All total containment maps on [0, k]^2, in index order."""
    for idx in range(1 << ((k + 1) ** 2)):
        yield ContainmentMap.from_index(k, idx)


@dataclass(frozen=True)
class ShatterCertificate:
    """One translate witness per subset bitmask; bit i covers S[i]."""

    S: tuple[FpVector, ...]
    witnesses: tuple[FpVector, ...]

    def __post_init__(self) -> None:
        if len(self.witnesses) != 1 << len(self.S):
            raise ValueError("need one witness per subset")


@dataclass(frozen=True)
class NotShattered:
    missing: int  # smallest unachieved bitmask


@dataclass(frozen=True)
class QuadShatterCertificate:
    """One shift witness per containment map index on the [0, k-1]^2 grid."""

    X: tuple[FpVector, ...]
    Y: tuple[FpVector, ...]
    witnesses: tuple[FpVector, ...]

    def __post_init__(self) -> None:
        k = len(self.X)
        if len(self.Y) != k:
            raise ValueError("X and Y must have equal size")
        if len(self.witnesses) != 1 << (k * k):
            raise ValueError("need one witness per containment map")


@dataclass(frozen=True)
class Vc2Failure:
    map_index: int
    phi: ContainmentMap


@dataclass(frozen=True)
class VcDimResult:
    dim: int
    certificate: ShatterCertificate | None


def pattern_signature(a: MembershipOracle, s: Sequence[FpVector], y: FpVector) -> int:
    """Bitmask with bit i set iff s[i] + y lands in the set."""
    if len(s) > MAX_SET_SIZE:
        raise ValueError("set too large")
    mask = 0
    for i, v in enumerate(s):
        if a.contains(v + y):
            mask |= 1 << i
    return mask


def _pattern_scan(
    a: MembershipOracle,
    s_digits: np.ndarray,
    threads: int = 1,
    chunk: int = 1 << 15,
) -> np.ndarray:
    """First translate rank achieving each bitmask (-1 where unachieved)."""
    p, n = a.p, a.n
    k = s_digits.shape[0]
    first = np.full(1 << k, -1, dtype=np.int64)

    def scan_block(args):
        start, block = args
        pat = np.zeros(block.shape[0], dtype=np.int64)
        for i in range(k):
            pat |= a.contains_digits((block + s_digits[i]) % p).astype(np.int64) << i
        uniq, idx = np.unique(pat, return_index=True)
        return start, uniq, idx

    blocks = iter_group_chunks(p, n, chunk)
    if threads <= 1:
        results = map(scan_block, blocks)
        for start, uniq, idx in results:
            for u, i in zip(uniq, idx):
                if first[u] < 0:
                    first[u] = start + i
            if (first >= 0).all():
                break
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for start, uniq, idx in ex.map(scan_block, blocks):
                for u, i in zip(uniq, idx):
                    if first[u] < 0:
                        first[u] = start + i
    return first


def shatters(
    a: MembershipOracle,
    s: Sequence[FpVector],
    threads: int = 1,
) -> ShatterCertificate | NotShattered:
    """Find a translate witness per subset of s, or the smallest missing bitmask."""
    s = tuple(s)
    if not s:
        raise ValueError("empty candidate set")
    if len(s) > MAX_SET_SIZE:
        raise ValueError(f"|S| must be <= {MAX_SET_SIZE}")
    if a.p ** a.n > MAX_GROUP_ENUM:
        raise ValueError("group too large to enumerate translates")
    s_digits = np.stack([v.as_array() for v in s])
    first = _pattern_scan(a, s_digits, threads=threads)
    missing = np.flatnonzero(first < 0)
    if missing.size:
        return NotShattered(int(missing[0]))
    ctx, n = s[0].ctx, s[0].n
    witnesses = tuple(vector_from_rank(ctx, n, int(r)) for r in first)
    return ShatterCertificate(s, witnesses)


def _translate_table(table: np.ndarray, p: int, n: int) -> np.ndarray:
    """T[v, y] = table[rank(v + y)], as a uint8 0/1 matrix."""
    total = table.shape[0]
    digits = ranks_to_digits(np.arange(total, dtype=np.int64), p, n)
    out = np.empty((total, total), dtype=np.uint8)
    block = max(1, (1 << 20) // max(total, 1))
    for v0 in range(0, total, block):
        v1 = min(v0 + block, total)
        sums = (digits[v0:v1, None, :] + digits[None, :, :]) % p
        out[v0:v1] = table[sums.reshape(-1, n) @ _powers(p, n)].reshape(v1 - v0, total)
    return out


def _powers(p: int, n: int) -> np.ndarray:
    return np.array([p ** (n - 1 - i) for i in range(n)], dtype=np.int64)


def _distinct_count_rows(ext: np.ndarray, width: int) -> np.ndarray:
    rows = ext.shape[0]
    offsets = (np.arange(rows, dtype=np.int64) * width)[:, None]
    counts = np.bincount((ext + offsets).ravel(), minlength=rows * width)
    return (counts.reshape(rows, width) > 0).sum(axis=1)


def vc_dim(a: MembershipOracle, k_max: int = 4, threads: int = 1) -> VcDimResult:
    """Largest k <= k_max with a shattered k-set, plus a certificate for it.

    Only candidate sets containing 0 are searched (any shattered set has a
    shattered translate through 0), and a set is extended only while its
    achieved-pattern count stays complete.
    """
    p, n = a.p, a.n
    total = p ** n
    if total > MAX_VCDIM_GROUP:
        raise ValueError(f"group too large for the vc_dim table search (p**n > {MAX_VCDIM_GROUP})")
    if not 1 <= k_max <= 14:
        raise ValueError("k_max out of range")
    table = a.membership_table()
    if not table.any() or table.all():
        return VcDimResult(0, None)
    tt = _translate_table(table, p, n)

    ctx = a.ctx

    def certificate_for(ranks: tuple[int, ...]) -> ShatterCertificate:
        s = tuple(vector_from_rank(ctx, n, r) for r in ranks)
        cert = shatters(a, s, threads=threads)
        assert isinstance(cert, ShatterCertificate)
        return cert

    frontier: list[tuple[tuple[int, ...], np.ndarray]] = [((0,), tt[0].astype(np.int16))]
    level = 1
    while level < k_max:
        prev_keys = {frozenset(s) for s, _ in frontier}
        bit = np.int16(1 << level)
        nxt: list[tuple[tuple[int, ...], np.ndarray]] = []
        width = 1 << (level + 1)
        for s, pat in frontier:
            base = frozenset(s)
            cands = []
            for v in range(s[-1] + 1, total):
                # every (level)-subset through 0 of the extension must already be shattered
                if level >= 2 and any(frozenset((base - {e}) | {v}) not in prev_keys for e in s[1:]):
                    continue
                cands.append(v)
            if not cands:
                continue
            cands = np.array(cands, dtype=np.int64)
            ext = pat[None, :] + bit * tt[cands].astype(np.int16)
            full = _distinct_count_rows(ext, width) == width
            for row in np.flatnonzero(full):
                nxt.append((s + (int(cands[row]),), ext[row]))
        if not nxt:
            return VcDimResult(level, certificate_for(frontier[0][0]))
        frontier = nxt
        level += 1
    return VcDimResult(level, certificate_for(frontier[0][0]))


def vc_dim_naive(a: MembershipOracle) -> int:
    """Reference oracle: test every subset of the group against every translate.

    Exponential; intended only for tiny groups in cross-checks.
    """
    from itertools import combinations

    p, n = a.p, a.n
    total = p ** n
    if total > 16:
        raise ValueError("naive oracle limited to groups of size <= 16")
    ctx = a.ctx
    elems = [vector_from_rank(ctx, n, r) for r in range(total)]
    patterns_by_y = {}
    best = 0
    for k in range(1, total + 1):
        found = False
        for s in combinations(elems, k):
            achieved = set()
            for y in elems:
                achieved.add(pattern_signature(a, s, y))
                if len(achieved) == 1 << k:
                    break
            if len(achieved) == 1 << k:
                found = True
                break
        if not found:
            break
        best = k
    return best


def vc2_realizes(
    a: MembershipOracle,
    x: Sequence[FpVector],
    y: Sequence[FpVector],
    phi: ContainmentMap,
    z: FpVector,
) -> bool:
    """True iff membership of x_i + y_j + z matches phi on every assigned cell."""
    x, y = tuple(x), tuple(y)
    if len(x) != phi.k + 1 or len(y) != phi.k + 1:
        raise ValueError("grid size mismatch between X, Y and phi")
    for i in range(phi.k + 1):
        for j in range(phi.k + 1):
            want = phi.verdicts[i][j]
            if want is None:
                continue
            if a.contains(x[i] + y[j] + z) != want:
                return False
    return True


def exhaustive_z_finder(
    a: MembershipOracle,
    x: Sequence[FpVector],
    y: Sequence[FpVector],
) -> Callable[[ContainmentMap], FpVector | None]:
    """Shift finder scanning the whole group in rank order (small groups only)."""
    p, n = a.p, a.n
    if p ** n > 10 ** 6:
        raise ValueError("group too large for exhaustive shift search")
    table = a.membership_table()
    x, y = tuple(x), tuple(y)
    cells = [(i, j, ((xi + yj).as_array())) for i, xi in enumerate(x) for j, yj in enumerate(y)]
    ctx = x[0].ctx

    def find(phi: ContainmentMap) -> FpVector | None:
        ok = np.ones(p ** n, dtype=bool)
        for start, block in iter_group_chunks(p, n):
            stop = start + block.shape[0]
            for i, j, off in cells:
                want = phi.verdicts[i][j]
                if want is None:
                    continue
                memb = table[digits_to_ranks((block + off) % p, p)]
                ok[start:stop] &= memb == want
        hits = np.flatnonzero(ok)
        if hits.size == 0:
            return None
        return vector_from_rank(ctx, n, int(hits[0]))

    return find


def vc2_shatters(
    a: MembershipOracle,
    x: Sequence[FpVector],
    y: Sequence[FpVector],
    z_finder: Callable[[ContainmentMap], FpVector | None],
) -> QuadShatterCertificate | Vc2Failure:
    """Witness every containment map on the [0, k-1]^2 grid, or report the first failure.

    X and Y have size k with x_0 = y_0 = 0; maps are tried in index order, so
    a failure reports the first unrealizable map in that order.
    """
    x, y = tuple(x), tuple(y)
    k = len(x)
    if len(y) != k:
        raise ValueError("X and Y must have equal size")
    if not 1 <= k <= 3:
        raise ValueError("grid size k must be between 1 and 3")
    if not (x[0].is_zero() and y[0].is_zero()):
        raise ValueError("x_0 and y_0 must both be 0")
    witnesses = []
    for idx in range(1 << (k * k)):
        phi = ContainmentMap.from_index(k - 1, idx)
        z = z_finder(phi)
        if z is None or not vc2_realizes(a, x, y, phi, z):
            return Vc2Failure(idx, phi)
        witnesses.append(z)
    return QuadShatterCertificate(x, y, tuple(witnesses))
