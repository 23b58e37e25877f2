import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctkit.arith import PadicContext, inverse
from ctkit.cohomology import is_free_fpG
from ctkit.group import from_label
from ctkit.jordan import (JordanType, NotNilpotent, action_of, dual_type, hom_decompose,
                          hom_from_tensors, jordan_type, jordan_type_of_module, partitions,
                          sweep_lemma44, tensor_csv, tensor_decompose, tensor_rows, verify_lemma44)
from ctkit.module import FgModule, augmentation_ideal, free_group_ring_mod, trivial_module


def clebsch_gordan(r, s):
    # classical decomposition, valid when r + s - 1 <= p
    return tuple(sorted((r + s + 1 - 2 * i for i in range(1, min(r, s) + 1)), reverse=True))


def test_jordan_type_examples():
    G = from_label("C3")
    assert jordan_type_of_module(free_group_ring_mod(G, 1)).parts == (3,)
    assert jordan_type_of_module(trivial_module(G, (1, 1))).parts == (1, 1)
    # augmentation ideal mod p: a single block of size p - 1
    I = augmentation_ideal(G)
    N = I.action[0] - np.eye(I.dim, dtype=np.int64)
    assert jordan_type(N % 3, 3).parts == (2,)
    with pytest.raises(NotNilpotent):
        jordan_type(np.eye(2, dtype=np.int64), 3)


def test_tensor_examples():
    assert tensor_decompose(1, 4, 5).parts == (4,)
    assert tensor_decompose(3, 2, 3).parts == (3, 3)
    assert tensor_decompose(2, 2, 3).parts == (3, 1)
    assert tensor_decompose(2, 2, 2).parts == (2, 2)
    assert tensor_decompose(2, 3, 2, 2).parts == (4, 2)


def test_hom_examples():
    assert hom_decompose((1,), 2).parts == (1,)
    assert hom_decompose((3,), 3).parts == (3, 3, 3)
    assert hom_decompose((2,), 3).parts == tensor_decompose(2, 2, 3).parts


def test_lemma_examples():
    assert verify_lemma44((3,), 3)
    assert verify_lemma44((1,), 2)
    rep = sweep_lemma44(3, 9)
    assert rep.failures == [] and rep.checked == sum(1 for d in range(1, 10) for _ in partitions(d, 3))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_classical_range(p):
    for r in range(1, p + 1):
        for s in range(1, p + 2 - r):
            assert tensor_decompose(r, s, p).parts == clebsch_gordan(r, s)


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (5, 1), (2, 2), (2, 3), (3, 2)])
def test_tensor_symmetry_and_dimension(p, n):
    for _, _, r, s, jt in tensor_rows(p, n):
        assert jt.dim == r * s
        assert jt == tensor_decompose(s, r, p, n)
        if r == p**n or s == p**n:
            assert jt.is_free


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_conjugation_invariance(p, data):
    parts = data.draw(st.lists(st.integers(1, p), min_size=1, max_size=4))
    parts = tuple(sorted(parts, reverse=True))
    g = action_of(parts, p)
    d = g.shape[0]
    # unit upper times unit lower: always invertible
    U = np.triu(np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=d * d,
                                            max_size=d * d))).reshape(d, d), 1)
    P = ((np.eye(d, dtype=np.int64) + U) @ (np.eye(d, dtype=np.int64) + U.T)) % p
    Pi = inverse(P, PadicContext(p, 1))
    h = (P @ g @ Pi) % p
    assert jordan_type(h - np.eye(d, dtype=np.int64), p).parts == parts
    assert dual_type(parts, p).parts == parts


@pytest.mark.parametrize("p", [2, 3])
def test_hom_two_ways(p):
    for d in range(1, 7):
        for parts in partitions(d, p):
            assert hom_decompose(parts, p) == hom_from_tensors(parts, p)


def test_free_modules_agree_with_cohomology():
    for label, p in [("C2", 2), ("C3", 3)]:
        G = from_label(label)
        for k in range(1, 3):
            V = trivial_module(G, (1,) * k)
            assert jordan_type_of_module(V).is_free == is_free_fpG(V)
        V = free_group_ring_mod(G, 1, d=2)
        assert jordan_type_of_module(V).is_free and is_free_fpG(V)
        # the augmentation ideal mod p is a single block of size p - 1
        I = augmentation_ideal(G)
        V = FgModule(PadicContext(p, 3), G, (1,) * I.dim, 0, I.action)
        assert jordan_type_of_module(V).parts == (p - 1,)
        assert not is_free_fpG(V)


def test_csv_layout():
    text = tensor_csv(tensor_rows(3, 1, [2]))
    assert text == "p,n,r,s,parts\n3,1,2,2,3+1\n"
    assert JordanType((3, 1), 3).joined() == "3+1"
