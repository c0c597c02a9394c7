import random

import pytest

from soficrank import (
    RankPolicy,
    SparseIntMatrix,
    grid_quotient,
    linearize,
    parse_ring_matrix,
    rank_dense_bareiss,
    rank_mod_p,
    rank_over_rationals,
    smith_normal_form,
)

from test_linearize import rational_rank


def random_sparse(rng, m, n, per_row=3, lo=-9, hi=9):
    trips = []
    for i in range(m):
        for j in rng.sample(range(n), min(per_row, n)):
            v = rng.randint(lo, hi)
            if v:
                trips.append((i, j, v))
    return SparseIntMatrix(m, n, trips)


# ---------------------------------------------------------------------------
# rank_mod_p

def test_zero_matrix():
    assert rank_mod_p(SparseIntMatrix(4, 5), 7) == 0


def test_proportional_rows_mod_5():
    m = SparseIntMatrix.from_dense([[2, 4], [1, 2]])
    assert rank_mod_p(m, 5) == 1


def test_mod_p_rank_drop():
    m = SparseIntMatrix.from_dense([[2]])
    assert rank_mod_p(m, 2) == 0
    assert rank_mod_p(m, 3) == 1


def test_p_must_be_prime():
    m = SparseIntMatrix.from_dense([[1]])
    with pytest.raises(ValueError):
        rank_mod_p(m, 6)
    with pytest.raises(ValueError):
        rank_mod_p(m, 1 << 63)


def test_mod_p_matches_oracle_on_randoms():
    rng = random.Random(23)
    for _ in range(30):
        m = random_sparse(rng, rng.randrange(1, 12), rng.randrange(1, 12))
        expected = rational_rank(m.to_dense())
        # large prime: no bad reduction for these small entries
        assert rank_mod_p(m, (1 << 61) - 1) == expected


def test_stats_reporting():
    stats = {}
    m = SparseIntMatrix.from_dense([[1, 1], [1, 0]])
    rank_mod_p(m, 5, stats)
    assert stats["pivots"] == 2
    assert stats["initial_nnz"] == 3
    assert stats["peak_nnz"] >= 3


# ---------------------------------------------------------------------------
# rank_over_rationals

def test_identity_certified():
    res = rank_over_rationals(SparseIntMatrix.identity(6))
    assert res.rank == 6
    assert res.certified
    assert len(res.primes_used) == 3


def test_circulant_rank(z1):
    L = linearize(parse_ring_matrix("t - 2", z1), grid_quotient(1, 3, z1))
    assert rank_over_rationals(L).rank == 3


def test_random_8x8_matches_bareiss():
    rng = random.Random(31)
    for _ in range(10):
        m = random_sparse(rng, 8, 8, per_row=4)
        res = rank_over_rationals(m)
        assert res.rank == rank_dense_bareiss(m.to_dense())
        assert res.certified


def test_bareiss_matches_fraction_gauss():
    rng = random.Random(37)
    for _ in range(40):
        rows = rng.randrange(1, 10)
        cols = rng.randrange(1, 10)
        m = random_sparse(rng, rows, cols, per_row=min(cols, 4))
        assert rank_dense_bareiss(m.to_dense()) == rational_rank(m.to_dense())


def test_rank_deficient_products():
    rng = random.Random(41)
    for _ in range(10):
        r = rng.randrange(1, 4)
        a = random_sparse(rng, 9, r, per_row=1)
        b = random_sparse(rng, r, 9, per_row=5)
        m = a * b
        expected = rational_rank(m.to_dense())
        assert expected <= r
        assert rank_over_rationals(m).rank == expected


def test_disagreement_falls_back_to_bareiss():
    # 2I has rank 0 mod 2 and rank 3 mod 3; tiny prime window forces the clash
    m = SparseIntMatrix.from_dense([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    policy = RankPolicy(primes_count=2, prime_bits=(1, 2), max_rounds=2, seed=0)
    res = rank_over_rationals(m, policy)
    assert res.rank == 3
    assert res.certified
    assert res.method == "dense_fraction_free"


def test_policy_exhaustion_returns_lower_bound_uncertified():
    m = SparseIntMatrix.from_dense([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    policy = RankPolicy(
        primes_count=2, prime_bits=(1, 2), max_rounds=2, seed=0, dense_threshold=0
    )
    res = rank_over_rationals(m, policy)
    assert res.rank == 3  # max over {rank mod 2 = 0, rank mod 3 = 3}
    assert not res.certified


def test_explicit_primes_honored():
    # with 2 and 3 both dividing every entry, the k-prime agreement rule
    # certifies a wrong rank: this is why the default window is 50-62 bits
    m = SparseIntMatrix.from_dense([[6]])
    policy = RankPolicy(primes_count=2, explicit_primes=(2, 3), dense_threshold=0, max_rounds=1)
    res = rank_over_rationals(m, policy)
    assert res.primes_used == (2, 3)
    assert res.rank == 0
    assert res.certified


def test_deterministic_under_seed():
    m = SparseIntMatrix.from_dense([[1, 2], [3, 4]])
    r1 = rank_over_rationals(m, RankPolicy(seed=5))
    r2 = rank_over_rationals(m, RankPolicy(seed=5))
    assert r1 == r2


# ---------------------------------------------------------------------------
# invariance properties

def test_mod_p_below_rational_rank_and_generic_equality():
    from sympy import nextprime

    rng = random.Random(43)
    for _ in range(15):
        m = random_sparse(rng, 7, 7, per_row=3)
        rq = rational_rank(m.to_dense())
        hits = 0
        for _ in range(5):
            p = int(nextprime(rng.randrange(1 << 50, 1 << 62)))
            rp = rank_mod_p(m, p)
            assert rp <= rq
            hits += rp == rq
        assert hits >= 1


def test_block_diag_additivity():
    rng = random.Random(47)
    a = random_sparse(rng, 6, 5)
    b = random_sparse(rng, 4, 7)
    ab = SparseIntMatrix.block_diag(a, b)
    assert (
        rank_over_rationals(ab).rank
        == rank_over_rationals(a).rank + rank_over_rationals(b).rank
    )


def test_rank_invariant_under_permutation_and_sign():
    rng = random.Random(53)
    m = random_sparse(rng, 6, 6)
    rows = list(range(6))
    cols = list(range(6))
    rng.shuffle(rows)
    rng.shuffle(cols)
    flipped = SparseIntMatrix(
        6, 6,
        [(rows[r], cols[c], -v if rows[r] == 0 else v) for r, c, v in m.triplets],
    )
    assert rank_over_rationals(flipped).rank == rank_over_rationals(m).rank


# ---------------------------------------------------------------------------
# Smith normal form

def test_snf_examples():
    assert smith_normal_form(SparseIntMatrix.from_dense([[2, 0], [0, 3]])) == (1, 6)
    assert smith_normal_form(SparseIntMatrix.from_dense([[2, 4], [1, 2]])) == (1, 0)
    assert smith_normal_form(SparseIntMatrix.zero(3, 2)) == (0, 0)


def test_snf_divisibility_chain_and_rank():
    rng = random.Random(59)
    for _ in range(25):
        m = random_sparse(rng, rng.randrange(1, 7), rng.randrange(1, 7))
        factors = smith_normal_form(m)
        nonzero = [x for x in factors if x]
        for a, b in zip(nonzero, nonzero[1:]):
            assert b % a == 0
        assert len(nonzero) == rank_over_rationals(m).rank


def test_snf_against_diagonal_products():
    # invariant factors of diag(4, 6) are (2, 12)
    assert smith_normal_form(SparseIntMatrix.from_dense([[4, 0], [0, 6]])) == (2, 12)


def test_snf_size_guard():
    big = SparseIntMatrix.identity(150)
    with pytest.raises(ValueError):
        smith_normal_form(big)
    assert smith_normal_form(SparseIntMatrix.identity(100)) == (1,) * 100


def test_snf_of_koszul_stage_matches_rank(z2grid):
    d1 = parse_ring_matrix("x - 1 ; y - 1", z2grid)
    L = linearize(d1, grid_quotient(2, 2, z2grid))
    factors = smith_normal_form(L)
    nonzero = [x for x in factors if x]
    assert len(nonzero) == rank_over_rationals(L).rank


def test_snf_dense_rectangular_terminates_quickly():
    # dense near-square matrices used to ping-pong between row and column
    # clearing with exploding coefficients; gcd transforms keep this fast
    import time

    rng = random.Random(66)
    t0 = time.time()
    for _ in range(5):
        dense = [[rng.randint(-40, 40) for _ in range(12)] for _ in range(13)]
        m = SparseIntMatrix.from_dense(dense)
        factors = smith_normal_form(m)
        assert len([x for x in factors if x]) == rank_over_rationals(m).rank
    assert time.time() - t0 < 10.0


def test_snf_matches_sympy_oracle():
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf

    rng = random.Random(71)
    for _ in range(15):
        rows = rng.randrange(1, 8)
        cols = rng.randrange(1, 8)
        dense = [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(rows)]
        ours = smith_normal_form(SparseIntMatrix.from_dense(dense))
        ref = sympy_snf(Matrix(dense))
        ref_diag = [abs(int(ref[i, i])) for i in range(min(rows, cols))]
        ref_nz = sorted(x for x in ref_diag if x)
        assert sorted(x for x in ours if x) == ref_nz
