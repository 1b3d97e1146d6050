import itertools
import math

import numpy as np
import pytest

from hypertree_lab.faces import (
    boundary_matrix,
    CocycleGraph,
    Complex2,
    Hypertree,
    classify_faces,
    cycle_edges,
    cycle_triangles,
    edge_rank,
    enumerate_cycle_families,
    faces,
    reduced_boundary,
    triangle_rank,
)
from helpers import planted_hypertrees
from hypertree_lab.homology import (
    ReferenceDistribution,
    TorsionReport,
    cl_reference,
    cl_rank_pmf,
    cocycle_space_dim,
    count_valid_cycles,
    h1_dim,
    h1_group,
    is_cocycle,
    torsion_census,
    valid_cycles,
)
from hypertree_lab.linalg import det_exact, smith_diagonal, sylow_invariants


def oracle_trees(pmf):
    for ranks, d in pmf.entries:
        yield Hypertree(Complex2.from_ranks(pmf.n, ranks), 0), d


# ---------------------------------------------------------------- is_cocycle

def test_empty_graph_is_cocycle(get_samples):
    for T in get_samples(7, 200, 5):
        assert is_cocycle(T.base, CocycleGraph(7))


def test_single_edge_never_cocycle(get_samples):
    for T in get_samples(7, 200, 5):
        for e in [(1, 2), (3, 6), (2, 5)]:
            assert not is_cocycle(T.base, CocycleGraph.from_edges(7, [e]))


def test_is_cocycle_rejects_mismatched_n():
    with pytest.raises(ValueError):
        is_cocycle(Complex2.from_ranks(5, [0]), CocycleGraph(6))


def test_cocycle_matches_block_characterization_n6(get_pmf):
    """On every n=6 hypertree: the 5-cycle on [5] is a cocycle exactly when
    T = F2 plus triangles in F0 and the complementary block is nonsingular,
    in which case |det T| = 2 |det block|."""
    G = CocycleGraph.from_edges(6, cycle_edges((1, 2, 3, 4, 5)))
    fc = classify_faces(G)
    F2 = {triangle_rank(*t) for t in fc.F2}
    F0 = {triangle_rank(*t) for t in fc.F0}
    rows = [edge_rank(*e) for e in faces(5, 2) if e not in G.edges]
    hits = 0
    for T, d in oracle_trees(get_pmf(6)):
        ranks = set(T.ranks)
        lhs = is_cocycle(T.base, G)
        block_ok = F2 <= ranks and ranks <= F2 | F0
        if block_ok:
            M = boundary_matrix(6, 2)[np.ix_(rows, sorted(ranks - F2))]
            db = det_exact(M)
            block_ok = db != 0
            if block_ok:
                assert d == 2 * abs(db)
        assert lhs == block_ok
        hits += lhs
    assert hits > 0


# ---------------------------------------------------------------- H_1

def test_unimodular_trees_have_trivial_homology(get_pmf):
    for T, d in itertools.islice(oracle_trees(get_pmf(6)), 0, None, 97):
        if d == 1:
            assert all(h1_dim(T, p) == 0 for p in (2, 3, 5))
            assert h1_group(T).is_trivial()


def test_sum_of_squared_orders_n6(get_pmf):
    total = 0
    for T, d in oracle_trees(get_pmf(6)):
        if d == 1:
            total += 1
            continue
        inv = h1_group(T)
        assert inv.order == d
        total += inv.order ** 2
    assert total == 6**6


def test_h1_dim_counts_even_factors_n7(get_samples):
    for T in get_samples(7, 300, 77):
        diag = smith_diagonal(T.matrix())
        assert h1_dim(T, 2) == len(sylow_invariants(T.matrix(), 2))
        assert h1_dim(T, 2) == sum(1 for x in diag if x % 2 == 0)
        assert h1_group(T).order == abs(det_exact(T.matrix()))


def test_h1_dim_zero_iff_det_odd(get_samples):
    for n in (6, 7, 8):
        for T in get_samples(n, 300, 11):
            assert (h1_dim(T, 2) == 0) == (det_exact(T.matrix()) % 2 == 1)


def test_h1_group_cap(get_samples):
    T = get_samples(12, 1, 0)[0]
    with pytest.raises(ValueError):
        h1_group(T)


def test_cocycle_space_dimension(get_samples):
    for n in (5, 6, 7, 8):
        for T in get_samples(n, 100, 3):
            assert cocycle_space_dim(T.base) == (n - 1) + h1_dim(T, 2)


# ---------------------------------------------------------------- valid 5-cycles

def brute_valid_cycles(C):
    """Double loop over all 5-cycle families of [n]."""
    out = []
    for F in enumerate_cycle_families(C.n, 1):
        c = F.grid[0]
        if is_cocycle(C, CocycleGraph.from_edges(C.n, cycle_edges(c))):
            out.append(c)
    return sorted(out)


def test_no_pentagon_chain():
    C = Complex2.from_ranks(7, range(5))
    assert count_valid_cycles(C) == ([], 0)


def test_valid_cycles_match_brute_force_n10(get_samples):
    for T in get_samples(10, 150, 404):
        cyc, X = count_valid_cycles(T)
        assert cyc == brute_valid_cycles(T.base)
        assert X == len(cyc)


def test_valid_cycles_match_brute_force_planted_n10():
    positives = 0
    for T in planted_hypertrees(10, 12, 12):
        C = T.base
        assert det_exact(reduced_boundary(10)[:, list(C.ranks)]) != 0
        cyc, X = count_valid_cycles(C)
        assert cyc == brute_valid_cycles(C)
        positives += X > 0
    assert positives == 12


def test_valid_cycle_structure(get_samples):
    for T in get_samples(9, 300, 8):
        for c in valid_cycles(T.base):
            assert cycle_triangles(c) <= T.triangles
            assert is_cocycle(T.base, CocycleGraph.from_edges(9, cycle_edges(c)))


def test_planted_pentagon_found():
    c = (1, 2, 3, 4, 5)
    C = Complex2(8, frozenset(cycle_triangles(c)))
    assert valid_cycles(C) == [c]
    C2 = Complex2(8, frozenset(cycle_triangles(c)) | {(1, 2, 6)})
    assert valid_cycles(C2) == []


def test_disjoint_counts():
    a, b = (1, 2, 3, 4, 5), (6, 7, 8, 9, 10)
    C = Complex2(12, frozenset(cycle_triangles(a) | cycle_triangles(b)))
    assert count_valid_cycles(C, 1)[1] == 2
    assert count_valid_cycles(C, 2)[1] == 1
    assert count_valid_cycles(C, 3)[1] == 0


# ---------------------------------------------------------------- Cohen-Lenstra

def test_cl_rank_zero_p2():
    assert abs(cl_reference(2, "rank", 0) - 0.2887880951) < 1e-10
    assert cl_reference(2, "rank", 0) == math.prod(1 - 2.0**-j for j in range(1, 61))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_cl_rank_pmf_normalized(p):
    assert abs(ReferenceDistribution(p).rank_pmf().sum() - 1) < 1e-9
    assert cl_rank_pmf(p, -1) == 0.0


def test_cl_group_mode():
    eta2 = cl_reference(2, "rank", 0)
    assert cl_reference(2, "group", [1]) == eta2
    assert abs(cl_reference(2, "group", [1, 1]) - eta2 / 6) < 1e-15
    assert abs(ReferenceDistribution(3).group_prob([1]) - cl_reference(3, "rank", 0) / 2) < 1e-15
    with pytest.raises(ValueError):
        cl_reference(2, "group", [9])
    with pytest.raises(ValueError):
        cl_reference(2, "moment", 1)


def test_group_probs_sum_to_rank_prob():
    # p=2, rank 1: all cyclic 2-groups Z/2^e, e >= 1; orders up to 256 cover e <= 8
    eta = cl_reference(2, "rank", 0)
    partial = sum(cl_reference(2, "group", [e]) for e in range(1, 9))
    tail = eta * sum(2.0 ** -(e - 1) for e in range(9, 80))  # |Aut Z/2^e| = 2^(e-1)
    assert abs(partial + tail - cl_rank_pmf(2, 1)) < 1e-12


# ---------------------------------------------------------------- census

def test_census_report_basics(get_kernel):
    a = torsion_census(8, 2, 60, 9, groups=True, kernel=get_kernel(8))
    b = torsion_census(8, 2, 60, 9, groups=True, kernel=get_kernel(8))
    assert a == b
    assert a.trials == 60
    assert abs(sum(a.pmf().values()) - 1) < 1e-12
    assert abs(sum(a.group_pmf().values()) - 1) < 1e-12
    for dim, g in zip(a.dims, a.groups):
        assert dim == len(g)
    rows = a.rows()
    assert [r[0] for r in rows] == list(range(len(rows)))
    assert 0 <= a.tv_distance() <= 1


def test_census_merge():
    a = TorsionReport(6, 2, 0, [0, 1], [(), (1,)])
    b = TorsionReport(6, 2, 1, [0], [()])
    m = a.merge(b)
    assert m.dims == [0, 1, 0] and m.pmf() == {0: 2 / 3, 1: 1 / 3}
    with pytest.raises(ValueError):
        a.merge(TorsionReport(6, 3, 0))


def test_tv_distance_of_reference_itself():
    ref = ReferenceDistribution(2).rank_pmf()
    dims = []
    for k, q in enumerate(ref[:6]):
        dims += [k] * round(q * 10**6)
    rep = TorsionReport(10, 2, 0, dims)
    assert rep.tv_distance() < 1e-4
