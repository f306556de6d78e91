"""Row spans and kernels over Z/p^N against brute-force enumeration."""

import itertools
import random

from tiltlab.linalg import RowSpan, kernel_generators, matrix_rank_fp


def brute_span(rows, mod):
    """Every Z/mod-combination of the rows (small cases only)."""
    if not rows:
        return {()}
    out = set()
    for coeffs in itertools.product(range(mod), repeat=len(rows)):
        vec = [0] * len(rows[0])
        for c, row in zip(coeffs, rows):
            for i, x in enumerate(row):
                vec[i] = (vec[i] + c * x) % mod
        out.add(tuple(vec))
    return out


def test_membership_matches_brute_force_z4():
    rng = random.Random(0)
    p, nd = 2, 2
    mod = p**nd
    for _ in range(30):
        rows = [
            [rng.randrange(mod) for _ in range(3)]
            for _ in range(rng.randint(1, 3))
        ]
        span = RowSpan(rows, p, nd)
        want = brute_span(rows, mod)
        for vec in itertools.product(range(mod), repeat=3):
            assert span.contains(list(vec)) == (vec in want)


def test_membership_matches_brute_force_z9():
    rng = random.Random(1)
    p, nd = 3, 2
    mod = p**nd
    for _ in range(10):
        rows = [[rng.randrange(mod) for _ in range(2)] for _ in range(2)]
        span = RowSpan(rows, p, nd)
        want = brute_span(rows, mod)
        for vec in itertools.product(range(mod), repeat=2):
            assert span.contains(list(vec)) == (vec in want)


def test_torsion_span_needs_annihilator_rows():
    # span{(2,1)} over Z/4 contains (0,2) = 2*(2,1); plain echelon misses it.
    span = RowSpan([[2, 1]], 2, 2)
    assert span.contains([0, 2])
    assert not span.contains([0, 1])


def test_kernel_generators_match_brute_force():
    rng = random.Random(2)
    p, nd = 2, 2
    mod = p**nd
    for _ in range(20):
        ncols = rng.randint(1, 3)
        cols = [
            [rng.randrange(mod) for _ in range(2)] for _ in range(ncols)
        ]
        gens = kernel_generators(cols, p, nd)
        # brute force kernel
        want = set()
        for coeffs in itertools.product(range(mod), repeat=ncols):
            vec = [0, 0]
            for c, col in zip(coeffs, cols):
                vec = [(v + c * x) % mod for v, x in zip(vec, col)]
            if not any(vec):
                want.add(coeffs)
        got = brute_span(gens, mod) if gens else {(0,) * ncols}
        got = {tuple(g) for g in got} | {(0,) * ncols}
        assert got == want


def test_rank_fp():
    assert matrix_rank_fp([[1, 0], [0, 1]], 5) == 2
    assert matrix_rank_fp([[1, 2], [2, 4]], 5) == 1
    assert matrix_rank_fp([[0, 0]], 5) == 0
    assert matrix_rank_fp([], 5) == 0
