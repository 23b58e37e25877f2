import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctkit.arith import PadicContext
from ctkit.cohomology import ct_definition_scan
from ctkit.group import from_label, subgroups
from ctkit.module import (Abelian, Element, FgModule, RankReport, augmentation_ideal,
                          build_schmid_module, coinvariants, direct_sum, fixed_points, from_element_matrices,
                          group_ring_quotient, lattice_order, norm_image, norm_kernel,
                          quotient_by_torsion, random_finite_module, ranks, regular_module,
                          restrict, torsion_submodule, trivial_module, twist, validate)

GROUPS = ["C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3"]


def swap():
    return np.array([[0, 1], [1, 0]])


def test_validate_examples():
    G = from_label("C2")
    assert validate(trivial_module(G, free_rank=1)) == []
    assert validate(regular_module(from_label("Q8"))) == []
    C4 = from_label("C4")
    g = C4.generators[0]
    ctx = PadicContext(2, 6)
    mats = [None] * 4
    mats[C4.identity] = [[1]]
    mats[g] = [[3]]
    mats[C4.power(g, 2)] = [[3]]
    mats[C4.power(g, 3)] = [[1]]
    problems = validate(from_element_matrices(ctx, C4, (2,), 0, mats))
    assert problems and all("homomorphism" in s for s in problems)


def test_validate_well_definedness():
    G = from_label("C2")
    ctx = PadicContext(2, 5)
    # torsion coordinate Z/2 sent into the free coordinate: not well defined
    A = FgModule(ctx, G, (1,), 1, (np.array([[1, 0], [1, 1]]),))
    assert any("well-definedness" in s for s in validate(A))


def test_regular_module_examples():
    A = regular_module(from_label("C2"))
    assert A.free_rank == 2 and np.array_equal(A.action[0], swap())
    assert regular_module(from_label("Q8")).free_rank == 8
    assert regular_module(from_label("C3"), d=2).free_rank == 6


@pytest.mark.parametrize("label", GROUPS)
def test_ranks_of_regular_module(label):
    G = from_label(label)
    assert ranks(regular_module(G)) == RankReport(G.order, 1, G.order)


def test_ranks_examples():
    G = from_label("C3")
    assert ranks(trivial_module(G, (1,))) == RankReport(1, 1, 0)
    assert ranks(augmentation_ideal(G)).r_R == 1
    assert ranks(augmentation_ideal(from_label("C2xC2"))).r_R == 2


def test_torsion_submodule_examples():
    G = from_label("C2")
    T, inc = torsion_submodule(regular_module(G))
    assert T.dim == 0 and inc.shape == (2, 0)
    T, _ = torsion_submodule(trivial_module(G, (1,), free_rank=1))
    assert T.torsion == (1,)
    A = group_ring_quotient(G, 2)
    T, _ = torsion_submodule(A)
    assert T.torsion == (1,) and all(np.array_equal(M, [[1]]) for M in T.action)
    F = quotient_by_torsion(A)
    assert F.torsion == () and F.free_rank == 1
    assert all(np.array_equal(M, [[1]]) for M in F.action)
    assert quotient_by_torsion(random_finite_module(G, seed=3)).dim == 0


def test_fixed_points_and_norms():
    G = from_label("C2")
    A = regular_module(G)
    # (Z_2 C_2)^G is spanned by 1+g, which is also the image of the norm
    assert lattice_order(fixed_points(A), A).orders == []
    assert lattice_order(fixed_points(A), A).free_at_precision == 1
    assert lattice_order(norm_image(A), A).free_at_precision == 1
    assert lattice_order(norm_kernel(A), A).free_at_precision == 1
    T = trivial_module(G, free_rank=1)
    # trivial Z_2: fixed points everything, norm image 2 Z_2
    assert lattice_order(fixed_points(T), T).free_at_precision == 0
    assert lattice_order(norm_image(T), T).orders == [2]
    C = coinvariants(regular_module(from_label("C3")))
    assert C.free_rank == 1 and C.torsion == ()


def test_restrict():
    G = from_label("D8")
    A = regular_module(G)
    for S in subgroups(G):
        B = restrict(A, S)
        assert validate(B) == []
        assert B.group.order == S.order and B.dim == 8
    assert restrict(A, G.trivial).group.order == 1
    C = from_label("C4")
    S = [s for s in subgroups(C) if s.order == 2][0]
    assert ct_definition_scan(restrict(regular_module(C), S)).all_zero


@pytest.mark.parametrize("label", GROUPS)
def test_random_finite_module(label):
    G = from_label(label)
    A = random_finite_module(G, seed=11, max_exp=2)
    B = random_finite_module(G, seed=11, max_exp=2)
    assert validate(A) == [] and A.is_finite
    assert A.torsion == B.torsion and all(np.array_equal(x, y) for x, y in zip(A.action, B.action))
    assert max(A.torsion) <= 2


def test_schmid_modules():
    A = build_schmid_module(from_label("D8"))
    assert A.torsion == (1,) and all(np.array_equal(M, [[1]]) for M in A.action)
    assert build_schmid_module(from_label("Q8")).torsion == (1,)
    B = build_schmid_module(from_label("D16"))
    assert B.group.order == 4 and not B.group.is_cyclic()
    with pytest.raises(Abelian):
        build_schmid_module(from_label("C4"))


def test_element_action():
    A = regular_module(from_label("C2"))
    x = Element(A, (1, 0))
    assert x.act(A.group.generators[0]).coords == (0, 1)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["C2", "C3", "C4", "C2xC2"]), st.integers(0, 10**6))
def test_twist_and_sum_stay_valid(label, seed):
    G = from_label(label)
    T = random_finite_module(G, seed=seed)
    A = direct_sum(T, regular_module(G, ctx=T.ctx))
    B = twist(A, seed)
    assert validate(A) == [] and validate(B) == []
    assert ranks(A) == ranks(B)
