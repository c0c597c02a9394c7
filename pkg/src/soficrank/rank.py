"""Exact rank over Q and over F_p, and Smith normal form, for sparse integer
matrices.

rank_mod_p runs sparse Gaussian elimination with Markowitz-style pivoting:
at each step the active column with the fewest nonzeros is selected (ties
broken by lowest column index), and within it the entry whose row has the
fewest nonzeros (ties broken by lowest row index), which minimizes the
Markowitz fill bound (r-1)(c-1) for that column.  Deterministic given the
prime.

rank_over_rationals runs rank_mod_p for k random large primes and certifies
on agreement; on disagreement it escalates with fresh primes (the maximum
observed value is always a valid lower bound) and finally falls back to
exact fraction-free (Bareiss) elimination when the matrix is small enough.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from heapq import heappush, heappop

from sympy import isprime, nextprime

__all__ = [
    "RankPolicy",
    "RankResult",
    "rank_mod_p",
    "rank_over_rationals",
    "rank_dense_bareiss",
    "smith_normal_form",
    "DEFAULT_POLICY",
]

_MACHINE_WORD = 1 << 63


def rank_mod_p(M, p, stats=None):
    """Rank of M over F_p; always a lower bound for the rank over Q.

    ``stats``, if a dict, receives ``initial_nnz``, ``peak_nnz`` and
    ``pivots`` (fill-in is peak minus initial).
    """
    p = int(p)
    if p >= _MACHINE_WORD:
        raise ValueError("prime must fit in a machine word")
    if not isprime(p):
        raise ValueError("%d is not prime" % p)
    rows = {}
    for r, c, v in M.triplets:
        v %= p
        if v:
            rows.setdefault(r, {})[c] = v
    cols = {}
    for r, row in rows.items():
        for c in row:
            cols.setdefault(c, set()).add(r)
    nnz = sum(len(row) for row in rows.values())
    initial_nnz = nnz
    peak_nnz = nnz
    heap = []
    for c, s in cols.items():
        heappush(heap, (len(s), c))
    rank = 0
    while heap:
        cnt, c = heappop(heap)
        colset = cols.get(c)
        if colset is None or len(colset) != cnt:
            continue  # stale entry
        # pivot row: fewest nonzeros, then lowest index
        pr = min(colset, key=lambda r: (len(rows[r]), r))
        prow = rows.pop(pr)
        a = prow[c]
        inv = pow(a, -1, p)
        # detach the pivot row from the column index
        touched = set()
        for cc in prow:
            s = cols[cc]
            s.discard(pr)
            if s:
                touched.add(cc)
            else:
                del cols[cc]
        nnz -= len(prow)
        piv = [(cc, v * inv % p) for cc, v in prow.items() if cc != c]
        colset = cols.get(c)
        if colset:
            for r in list(colset):
                row = rows[r]
                f = row.pop(c)
                nnz -= 1
                for cc, v in piv:
                    nv = (row.get(cc, p) - f * v) % p
                    if nv:
                        if cc not in row:
                            cols.setdefault(cc, set()).add(r)
                            nnz += 1
                        row[cc] = nv
                    elif cc in row:
                        del row[cc]
                        cols[cc].discard(r)
                        nnz -= 1
                        if not cols[cc]:
                            del cols[cc]
                if not row:
                    del rows[r]
            del cols[c]
            touched.discard(c)
            for cc, _ in piv:
                touched.add(cc)
        if nnz > peak_nnz:
            peak_nnz = nnz
        for cc in touched:
            s = cols.get(cc)
            if s:
                heappush(heap, (len(s), cc))
        rank += 1
    if stats is not None:
        stats["initial_nnz"] = initial_nnz
        stats["peak_nnz"] = peak_nnz
        stats["pivots"] = rank
    return rank


def rank_dense_bareiss(dense_rows):
    """Exact rank by fraction-free (Bareiss) elimination on a dense copy."""
    A = [list(map(int, r)) for r in dense_rows]
    m = len(A)
    n = len(A[0]) if m else 0
    prev = 1
    r = 0
    for j in range(n):
        if r == m:
            break
        pivot = next((i for i in range(r, m) if A[i][j]), None)
        if pivot is None:
            continue
        if pivot != r:
            A[r], A[pivot] = A[pivot], A[r]
        Ar = A[r]
        pj = Ar[j]
        for i in range(r + 1, m):
            Ai = A[i]
            aij = Ai[j]
            if aij:
                for k in range(j + 1, n):
                    Ai[k] = (Ai[k] * pj - aij * Ar[k]) // prev
                Ai[j] = 0
            elif prev != 1 or pj != 1:
                for k in range(j + 1, n):
                    if Ai[k]:
                        Ai[k] = Ai[k] * pj // prev
        prev = pj
        r += 1
    return r


@dataclass(frozen=True)
class RankPolicy:
    """Multi-modular certification policy for rank_over_rationals."""

    primes_count: int = 3
    prime_bits: tuple = (50, 62)
    dense_threshold: int = 500
    max_rounds: int = 3
    seed: int = 0
    explicit_primes: tuple = None


DEFAULT_POLICY = RankPolicy()


@dataclass(frozen=True)
class RankResult:
    rank: int
    method: str  # sparse_mod_p | dense_fraction_free | snf
    primes_used: tuple
    certified: bool


def _draw_primes(rng, bits, count, used):
    lo, hi = 1 << bits[0], 1 << bits[1]
    out = []
    attempts = 0
    while len(out) < count and attempts < 64 * count:
        attempts += 1
        p = int(nextprime(rng.randrange(lo, hi) - 1))
        if p >= hi:
            p = int(nextprime(lo))
        if p in used or p in out:
            continue
        out.append(p)
    return out


def rank_over_rationals(M, policy=None):
    """Certified rank over Q of a sparse integer matrix.

    Certification condition: the maximum observed mod-p rank is attained by
    at least ``primes_count`` distinct random large primes (any smaller
    value is a bad-reduction artifact, since rank mod p never exceeds the
    rational rank).  Falls back to Bareiss for small matrices; policy
    exhaustion returns the best lower bound uncertified.
    """
    if policy is None:
        policy = DEFAULT_POLICY
    if min(M.rows, M.cols) == 0 or M.is_zero():
        return RankResult(0, "dense_fraction_free", (), True)
    rng = random.Random(policy.seed)
    used = []
    ranks = {}
    k = max(1, policy.primes_count)

    def attained(value):
        return sum(1 for p in used if ranks[p] == value)

    explicit = list(policy.explicit_primes or ())
    for _ in range(max(1, policy.max_rounds)):
        if explicit:
            batch, explicit = explicit[:k], explicit[k:]
        else:
            batch = _draw_primes(rng, policy.prime_bits, k, used)
        if not batch:
            break
        for p in batch:
            used.append(p)
            ranks[p] = rank_mod_p(M, p)
        best = max(ranks.values())
        if attained(best) >= k:
            return RankResult(best, "sparse_mod_p", tuple(used), True)
    best = max(ranks.values()) if ranks else 0
    if M.total_dimension <= policy.dense_threshold:
        exact = rank_dense_bareiss(M.to_dense())
        return RankResult(exact, "dense_fraction_free", tuple(used), True)
    return RankResult(best, "sparse_mod_p", tuple(used), False)


def _xgcd(a, b):
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


def smith_normal_form(M, max_total_dim=200):
    """Invariant factors d_1 | d_2 | ... of a sparse integer matrix.

    Returns a tuple of length min(rows, cols); the number of nonzero
    entries equals the rank over Q.  Dense computation, guarded by
    ``max_total_dim``.  Clearing uses 2x2 unimodular (extended-gcd)
    transforms, which land the gcd in the pivot in one step and keep the
    clear-column/clear-row alternation logarithmic.
    """
    if M.total_dimension > max_total_dim:
        raise ValueError(
            "matrix total dimension %d exceeds SNF threshold %d"
            % (M.total_dimension, max_total_dim)
        )
    A = M.to_dense()
    m = M.rows
    n = M.cols
    size = min(m, n)

    def clear_column(k):
        Ak = A[k]
        for i in range(k + 1, m):
            Ai = A[i]
            b = Ai[k]
            if not b:
                continue
            a = Ak[k]
            if b % a == 0:
                q = b // a
                for j in range(k, n):
                    Ai[j] -= q * Ak[j]
            else:
                x, y, g = _xgcd(a, b)
                ca, cb = a // g, b // g
                for j in range(k, n):
                    u, v = Ak[j], Ai[j]
                    Ak[j] = x * u + y * v
                    Ai[j] = ca * v - cb * u

    def clear_row(k):
        changed_pivot_column = False
        for j in range(k + 1, n):
            b = A[k][j]
            if not b:
                continue
            a = A[k][k]
            if b % a == 0:
                q = b // a
                for row in A:
                    row[j] -= q * row[k]
            else:
                x, y, g = _xgcd(a, b)
                ca, cb = a // g, b // g
                for row in A:
                    u, v = row[k], row[j]
                    row[k] = x * u + y * v
                    row[j] = ca * v - cb * u
                changed_pivot_column = True
        return changed_pivot_column

    for k in range(size):
        pivot = None
        best = None
        for i in range(k, m):
            Ai = A[i]
            for j in range(k, n):
                v = Ai[j]
                if v:
                    a = abs(v)
                    if best is None or a < best:
                        best = a
                        pivot = (i, j)
                        if a == 1:
                            break
            if best == 1:
                break
        if pivot is None:
            break
        pi, pj = pivot
        if pi != k:
            A[k], A[pi] = A[pi], A[k]
        if pj != k:
            for row in A:
                row[k], row[pj] = row[pj], row[k]
        while True:
            clear_column(k)
            # exact column steps leave column k alone; gcd steps shrink the
            # pivot by at least half, so this loop runs O(log |pivot|) times
            if not clear_row(k):
                break
            if all(A[i][k] == 0 for i in range(k + 1, m)):
                break
    diag = [abs(A[i][i]) for i in range(size)]
    # enforce the divisibility chain on the diagonal
    from math import gcd

    changed = True
    while changed:
        changed = False
        for i in range(size):
            for j in range(i + 1, size):
                a, b = diag[i], diag[j]
                if a and b % a == 0:
                    continue
                if a == 0 and b == 0:
                    continue
                g = gcd(a, b)
                l = a * b // g if g else 0
                if (g, l) != (a, b):
                    diag[i], diag[j] = g, l
                    changed = True
    nz = sorted(x for x in diag if x)
    return tuple(nz + [0] * (size - len(nz)))
