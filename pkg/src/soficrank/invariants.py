"""Finite-scale approximants of the rank invariants of ZG chain complexes.

Every pipeline reduces to exact ranks of linearized differentials at finite
permutation models: at a genuine stage of degree d the homology rank in
degree j is n_j*d - rank L(d_j) - rank L(d_{j+1}), so the emitted value
(that quantity over d) is an exact rational.  Heuristic (non-genuine)
models are rejected by the homology pipelines, because the image need not
sit inside the kernel there; model_diagnostics exposes the raw ranks and
the composite check for such models instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

from .groups import FiniteQuotient, FiniteTable, QuotientSequence, extend_to_word, regular_quotient
from .linearize import DEFAULT_SIZE_CAP, SparseIntMatrix, linearize
from .rank import DEFAULT_POLICY, rank_dense_bareiss, rank_over_rationals
from .ring import RingElement, RingMatrix

__all__ = [
    "SeriesPoint",
    "ApproximantSeries",
    "ModulePresentation",
    "FiniteSubgroupSpec",
    "betti_approximants",
    "vrk_approximants",
    "relative_vrk_approximants",
    "mrk_j_approximants",
    "euler_characteristic",
    "euler_identity_check",
    "juzvinskii_defect",
    "finite_group_exact_betti",
    "literal_mean_rank",
    "model_diagnostics",
    "series_to_csv",
    "clear_rank_cache",
]


@dataclass(frozen=True)
class SeriesPoint:
    degree: int
    value: Fraction
    certified: bool


@dataclass(frozen=True)
class ApproximantSeries:
    """A sequence of (model degree, exact rational) approximant values.

    ``chain`` is inherited from the quotient sequence; only under chain=True
    does the series approximate the limiting invariant.
    """

    invariant_label: str
    points: tuple
    chain: bool

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        degrees = [p.degree for p in pts]
        if any(a >= b for a, b in zip(degrees, degrees[1:])):
            raise ValueError("point degrees must strictly increase")
        for p in pts:
            if not isinstance(p.value, Fraction):
                raise TypeError("series values must be exact rationals")

    def values(self):
        return [p.value for p in self.points]

    def last(self):
        return self.points[-1]

    def __iter__(self):
        return iter(self.points)


def series_to_csv(series_list, f):
    """Write series rows: invariant_label, degree, value_num, value_den, certified."""
    close = False
    if isinstance(f, str):
        f = open(f, "w", newline="")
        close = True
    try:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["invariant_label", "degree", "value_num", "value_den", "certified"])
        for s in series_list:
            for p in s.points:
                w.writerow(
                    [
                        s.invariant_label,
                        p.degree,
                        p.value.numerator,
                        p.value.denominator,
                        "true" if p.certified else "false",
                    ]
                )
    finally:
        if close:
            f.close()


@dataclass(frozen=True)
class ModulePresentation:
    """Cokernel presentation: free rank n, relation rows spanning the
    relation submodule (relations may be None for a free module)."""

    family: object
    free_rank: int
    relations: object = None  # RingMatrix or None

    def __post_init__(self):
        if self.free_rank < 1:
            raise ValueError("free rank must be positive")
        rel = self.relations
        if rel is not None:
            if not isinstance(rel, RingMatrix):
                raise TypeError("relations must be a RingMatrix or None")
            if rel.family != self.family:
                raise ValueError("relation matrix family mismatch")
            if rel.cols != self.free_rank:
                raise ValueError(
                    "relation matrix has %d columns, expected %d"
                    % (rel.cols, self.free_rank)
                )


@dataclass(frozen=True)
class FiniteSubgroupSpec:
    """Finitely many generators of an abelian subgroup of a presented module;
    each generator is a length-n vector of ring elements."""

    family: object
    length: int
    generators: tuple

    def __post_init__(self):
        gens = tuple(tuple(v) for v in self.generators)
        object.__setattr__(self, "generators", gens)
        for vec in gens:
            if len(vec) != self.length:
                raise ValueError("generator vectors must have length %d" % self.length)
            for x in vec:
                if not isinstance(x, RingElement) or x.family != self.family:
                    raise ValueError("generator entries must be ring elements")


# ---------------------------------------------------------------------------
# certified ranks with a small content-addressed cache

_rank_cache = {}
_RANK_CACHE_MAX = 128


def clear_rank_cache():
    _rank_cache.clear()


def _certified_rank(M, policy):
    key = (M.rows, M.cols, M.triplets, policy)
    hit = _rank_cache.get(key)
    if hit is None:
        hit = rank_over_rationals(M, policy)
        if len(_rank_cache) >= _RANK_CACHE_MAX:
            _rank_cache.clear()
        _rank_cache[key] = hit
    return hit.rank, hit.certified


def _require_genuine(Q):
    for q in Q:
        if not q.genuine:
            raise ValueError(
                "homology pipelines require genuine quotients; "
                "got heuristic model %r" % q.label
            )


def _differential_rank(C, j, q, policy, size_cap):
    d = C.differential(j)
    if d is None:
        return 0, True
    return _certified_rank(linearize(d, q, size_cap), policy)


# ---------------------------------------------------------------------------
# pipelines

def betti_approximants(C, Q, j, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Homology-rank density series in degree j along a genuine sequence.

    Stage value at degree d: (n_j*d - rank L(d_j) - rank L(d_{j+1})) / d.
    """
    policy = policy or DEFAULT_POLICY
    if not isinstance(Q, QuotientSequence):
        Q = QuotientSequence(tuple(Q))
    _require_genuine(Q)
    if not 0 <= j <= C.top_degree:
        raise ValueError("degree index %d outside the complex" % j)
    if C.family != Q.family:
        raise ValueError("complex and quotient families differ")
    nj = C.rank_of(j)
    points = []
    for q in Q:
        d = q.degree
        r_low, cert1 = _differential_rank(C, j, q, policy, size_cap)
        r_high, cert2 = _differential_rank(C, j + 1, q, policy, size_cap)
        value = Fraction(nj * d - r_low - r_high, d)
        points.append(SeriesPoint(d, value, cert1 and cert2))
    return ApproximantSeries("betti[j=%d]" % j, tuple(points), Q.chain)


def vrk_approximants(M, Q, policy=None, size_cap=DEFAULT_SIZE_CAP, label="vrk"):
    """Rank density of a presented module: (n*d - rank L(relations)) / d."""
    policy = policy or DEFAULT_POLICY
    if not isinstance(Q, QuotientSequence):
        Q = QuotientSequence(tuple(Q))
    _require_genuine(Q)
    if M.family != Q.family:
        raise ValueError("module and quotient families differ")
    points = []
    for q in Q:
        d = q.degree
        if M.relations is None:
            r, cert = 0, True
        else:
            r, cert = _certified_rank(linearize(M.relations, q, size_cap), policy)
        points.append(SeriesPoint(d, Fraction(M.free_rank * d - r, d), cert))
    return ApproximantSeries(label, tuple(points), Q.chain)


def _append_generators(M, gens):
    rows = [list(vec) for vec in gens.generators]
    if not rows:
        return M
    extra = RingMatrix(M.family, rows)
    rel = extra if M.relations is None else M.relations.vstack(extra)
    return ModulePresentation(M.family, M.free_rank, rel)


def relative_vrk_approximants(M2, gens, Q, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Rank density of a submodule relative to its ambient module.

    The submodule is given by generating vectors inside the presented
    module; the value is vrk(M2) - vrk(M2/M1) stage by stage, where M2/M1
    appends the generators as extra relation rows.
    """
    if gens.family != M2.family or gens.length != M2.free_rank:
        raise ValueError("generators do not live in the ambient module")
    outer = vrk_approximants(M2, Q, policy, size_cap)
    quotient = vrk_approximants(_append_generators(M2, gens), Q, policy, size_cap)
    points = tuple(
        SeriesPoint(a.degree, a.value - b.value, a.certified and b.certified)
        for a, b in zip(outer.points, quotient.points)
    )
    return ApproximantSeries("relative_vrk", points, outer.chain)


def mrk_j_approximants(C, Q, j, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Mean-rank route to the degree-j series, via the two cokernel
    presentations; cross-checked pointwise against betti_approximants."""
    policy = policy or DEFAULT_POLICY
    if not isinstance(Q, QuotientSequence):
        Q = QuotientSequence(tuple(Q))
    if not 0 <= j <= C.top_degree:
        raise ValueError("degree index %d outside the complex" % j)
    coker_high = ModulePresentation(C.family, C.rank_of(j), C.differential(j + 1))
    term1 = vrk_approximants(coker_high, Q, policy, size_cap)
    if j >= 1:
        coker_low = ModulePresentation(C.family, C.rank_of(j - 1), C.differential(j))
        term2 = vrk_approximants(coker_low, Q, policy, size_cap)
        n_low = C.rank_of(j - 1)
        points = tuple(
            SeriesPoint(a.degree, a.value - (n_low - b.value), a.certified and b.certified)
            for a, b in zip(term1.points, term2.points)
        )
    else:
        points = term1.points
    series = ApproximantSeries("mrk[j=%d]" % j, points, Q.chain)
    check = betti_approximants(C, Q, j, policy, size_cap)
    for a, b in zip(series.points, check.points):
        if a.value != b.value:
            raise RuntimeError(
                "mean-rank/betti cross-check failed at degree %d: %s vs %s"
                % (a.degree, a.value, b.value)
            )
    return series


def euler_characteristic(C):
    """Alternating sum of the free ranks."""
    return sum((-1) ** j * C.rank_of(j) for j in range(C.top_degree + 1))


def euler_identity_check(C, Q, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Per-stage residual of the alternating Betti sum against chi.

    Telescoping of rank-nullity makes the residual exactly 0 at every
    finite stage for every valid bounded complex.
    """
    chi = euler_characteristic(C)
    all_series = [
        betti_approximants(C, Q, j, policy, size_cap)
        for j in range(C.top_degree + 1)
    ]
    residuals = []
    for i, q in enumerate(Q):
        total = sum(
            (-1) ** j * all_series[j].points[i].value
            for j in range(C.top_degree + 1)
        )
        residuals.append((q.degree, total - chi))
    return residuals


def juzvinskii_defect(C, Q, kernel_rows=None, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Additivity-defect series of a two-term complex (n_1, n_0) with d_1.

    ``kernel_rows`` is a caller-supplied matrix whose rows generate
    ker d_1 (kernels of ZG-matrices are not algorithmically presentable in
    general); None means the kernel is zero.  The value at each stage is
    the rank density of the image presented absolutely (coker of the
    kernel rows) minus its density relative to the target module; zero
    defect is the additivity of the rank under d_1.
    """
    if C.top_degree != 1:
        raise ValueError("juzvinskii_defect expects a two-term complex")
    d1 = C.differential(1)
    n1, n0 = C.rank_of(1), C.rank_of(0)
    if kernel_rows is not None:
        if not isinstance(kernel_rows, RingMatrix) or kernel_rows.family != C.family:
            raise ValueError("kernel rows must be a RingMatrix over the same family")
        if kernel_rows.cols != n1:
            raise ValueError("kernel rows must have %d columns" % n1)
        if not (kernel_rows * d1).is_zero():
            raise ValueError("kernel rows are not annihilated by d_1")
    image_abs = vrk_approximants(
        ModulePresentation(C.family, n1, kernel_rows), Q, policy, size_cap
    )
    target_coker = vrk_approximants(
        ModulePresentation(C.family, n0, d1), Q, policy, size_cap
    )
    points = tuple(
        SeriesPoint(
            a.degree,
            a.value - (n0 - b.value),
            a.certified and b.certified,
        )
        for a, b in zip(image_abs.points, target_coker.points)
    )
    return ApproximantSeries("juzvinskii_defect", points, image_abs.chain)


def finite_group_exact_betti(C, size_cap=DEFAULT_SIZE_CAP):
    """Exact homology-rank densities over a finite-table group.

    Uses the regular model of degree g = |G| and unconditional dense
    fraction-free ranks; a single exact stage, no limit involved.  Serves
    as the brute-force oracle for the approximant pipelines.
    """
    fam = C.family
    if not isinstance(fam, FiniteTable):
        raise ValueError("finite_group_exact_betti needs a FiniteTable family")
    q = regular_quotient(fam)
    g = fam.order
    ranks = {}
    for j in range(1, C.top_degree + 1):
        ranks[j] = rank_dense_bareiss(linearize(C.differential(j), q, size_cap).to_dense())
    out = []
    for j in range(C.top_degree + 1):
        r_low = ranks.get(j, 0)
        r_high = ranks.get(j + 1, 0)
        out.append(Fraction(C.rank_of(j) * g - r_low - r_high, g))
    return out


# ---------------------------------------------------------------------------
# literal mean rank on finite (or windowed) integer presentations

def _module_basis_finite(M):
    fam = M.family
    g = fam.order
    elems = list(range(g))
    index = {t: i for i, t in enumerate(elems)}
    return elems, index, M.free_rank * g


def _int_vector_finite(vec, M, index):
    g = M.family.order
    out = {}
    for comp, x in enumerate(vec):
        for el, c in x.terms.items():
            out[comp * g + index[el.payload]] = out.get(comp * g + index[el.payload], 0) + c
    return out


def _module_relation_rows_finite(M):
    """Integer rows spanning the relation submodule as an abelian group."""
    fam = M.family
    if M.relations is None:
        return []
    elems, index, _ = _module_basis_finite(M)
    rows = []
    for rel_row in M.relations.entries:
        for s in fam.elements():
            translated = tuple(RingElement.monomial(s) * x for x in rel_row)
            rows.append(_int_vector_finite(translated, M, index))
    return rows


def _window_order(window):
    fam = window[0].family
    return sorted(window, key=lambda w: fam.sort_key(w.payload))


def literal_mean_rank(M, A, B, F, q, window=None, policy=None):
    """Literal rank density of the measured subgroup at one finite model.

    Constructs the integer presentation of the d-fold sum of the module
    modulo the translation relations delta_v (x) b - delta_{sigma(s) v} (x) sb
    for b in B, s in F, v in [d], stacks the images of the A generators as
    extra rows, and returns (rank[A | relations] - rank[relations]) / d.

    Over an infinite family a finite ``window`` of group elements must be
    supplied; module elements are truncated to supports inside the window
    and relation instances leaving it are skipped.  The windowed value is a
    documented heuristic, not a certified bound.
    """
    policy = policy or DEFAULT_POLICY
    fam = M.family
    if not isinstance(q, FiniteQuotient) or q.family != fam:
        raise ValueError("model family mismatch")
    if A.family != fam or B.family != fam or A.length != M.free_rank or B.length != M.free_rank:
        raise ValueError("subgroup specs must live in the presented module")
    d = q.degree
    n = M.free_rank

    if isinstance(fam, FiniteTable):
        g = fam.order
        index = {i: i for i in range(g)}
        slot = g
        rel_rows = _module_relation_rows_finite(M)

        def vecify(vec):
            return _int_vector_finite(vec, M, index)

        def in_window(x):
            return True
    else:
        if window is None:
            raise ValueError(
                "literal_mean_rank over an infinite family needs a window"
            )
        worder = _window_order(list(window))
        windex = {w: i for i, w in enumerate(worder)}
        slot = len(worder)
        wset = set(worder)

        def vecify(vec):
            out = {}
            for comp, x in enumerate(vec):
                for el, c in x.terms.items():
                    out[comp * slot + windex[el]] = c
            return out

        def in_window(vec):
            return all(set(x.terms) <= wset for x in vec)

        rel_rows = []
        if M.relations is not None:
            for rel_row in M.relations.entries:
                supports = [el for x in rel_row for el in x.terms]
                if not supports:
                    continue
                u0 = supports[0]
                candidates = {w * ~u0 for w in worder}
                for s in candidates:
                    translated = tuple(RingElement.monomial(s) * x for x in rel_row)
                    if in_window(translated):
                        rel_rows.append(vecify(translated))

    N = n * slot
    big_cols = d * N

    def place(v, small):
        return {v * N + pos: c for pos, c in small.items()}

    rows = []
    # module relations, one copy per coordinate of the d-fold sum
    for small in rel_rows:
        for v in range(d):
            rows.append(place(v, small))
    # translation relations from B and F
    for b in B.generators:
        if not isinstance(fam, FiniteTable) and not in_window(b):
            continue
        bvec = vecify(b)
        for s in F:
            fam.check_member(s)
            sb = tuple(RingElement.monomial(s) * x for x in b)
            if not isinstance(fam, FiniteTable) and not in_window(sb):
                continue
            sbvec = vecify(sb)
            perm = extend_to_word(q, s)
            for v in range(d):
                row = place(v, bvec)
                target = perm[v]
                for pos, c in sbvec.items():
                    key = target * N + pos
                    nval = row.get(key, 0) - c
                    if nval:
                        row[key] = nval
                    else:
                        row.pop(key, None)
                if row:
                    rows.append(row)
    rel_count = len(rows)
    # measured generators from A
    for a in A.generators:
        if not isinstance(fam, FiniteTable) and not in_window(a):
            raise ValueError("A generator has support outside the window")
        avec = vecify(a)
        if not avec:
            continue
        for v in range(d):
            rows.append(place(v, avec))

    def matrix_of(row_dicts):
        trips = [
            (i, pos, c)
            for i, row in enumerate(row_dicts)
            for pos, c in row.items()
        ]
        return SparseIntMatrix(len(row_dicts), big_cols, trips)

    if rel_count:
        rank_rel, _ = _certified_rank(matrix_of(rows[:rel_count]), policy)
    else:
        rank_rel = 0
    if len(rows) > rel_count:
        rank_full, _ = _certified_rank(matrix_of(rows), policy)
    else:
        rank_full = rank_rel
    return Fraction(rank_full - rank_rel, d)


# ---------------------------------------------------------------------------
# diagnostics for heuristic models

@dataclass(frozen=True)
class ModelDiagnostics:
    degree: int
    differential_ranks: tuple  # (degree j, rank, certified) top-down
    composites_zero: tuple  # adjacency flags, top-down


def model_diagnostics(C, q, policy=None, size_cap=DEFAULT_SIZE_CAP):
    """Raw ranks plus composite-vanishing flags at any model (no genuineness
    required); for heuristic models the composite typically fails, which is
    exactly why homology ranks are undefined there."""
    policy = policy or DEFAULT_POLICY
    mats = [linearize(dm, q, size_cap) for dm in C.differentials]
    ranks = []
    k = C.top_degree
    for i, m in enumerate(mats):
        r, cert = _certified_rank(m, policy)
        ranks.append((k - i, r, cert))
    composites = tuple(
        (upper * lower).is_zero() for upper, lower in zip(mats, mats[1:])
    )
    return ModelDiagnostics(q.degree, tuple(ranks), composites)
