"""Quick invariant suite behind ``ctkit selftest``.

Each check yields ``(name, passed, detail)``.  Details contain only counts
and exact values, so two runs with the same seed print identical reports.
"""

from __future__ import annotations

from .cohomology import DEGREES, ct_definition_scan, is_ct, is_ct_finite, tate
from .errors import InternalContradiction
from .group import from_label
from .jordan import sweep_lemma44
from .module import (build_schmid_module, direct_sum, free_group_ring_mod, group_ring_quotient,
                     random_finite_module, regular_module, twist)
from .structure import (NotCT, augmentation_ideal_rank, minimal_presentation, split_theorem_a,
                        verify_corollary, verify_theorem2)
from .zeta import fit_rational, predict_next, zeta_coefficients

SMALL = ("C2", "C4", "C3")


def _seeds(seed: int, k: int) -> list:
    return [seed * 1000 + i for i in range(k)]


def check_free(seed):
    groups = ("C2", "C3", "C2xC2")
    ok = all(ct_definition_scan(regular_module(from_label(g))).all_zero for g in groups)
    return "free-modules-ct", ok, f"RG scanned over {len(groups)} groups"


def check_gaschutz_uchida(seed):
    bad = n = ct = 0
    for g in SMALL:
        G = from_label(g)
        for s in _seeds(seed, 8):
            A = random_finite_module(G, seed=s)
            h0 = tate(A, None, 0).is_zero
            bad += h0 != ct_definition_scan(A).all_zero
            ct += h0
            n += 1
    return "gaschutz-uchida", bad == 0, f"{n} modules, {ct} CT, {bad} counterexamples"


def check_nakayama(seed):
    bad = n = 0
    for g in ("C2", "C3"):
        G = from_label(g)
        for s in _seeds(seed, 4):
            A = twist(direct_sum(random_finite_module(G, seed=s), regular_module(G)), s)
            two = tate(A, None, 0).is_zero and tate(A, None, 1).is_zero
            bad += two != ct_definition_scan(A).all_zero
            n += 1
    return "nakayama", bad == 0, f"{n} mixed modules, {bad} counterexamples"


def check_split(seed):
    split = refused = 0
    ok = True
    for g in ("C2", "C3"):
        G = from_label(g)
        for s in _seeds(seed, 3):
            A = twist(direct_sum(free_group_ring_mod(G, 1 + s % 2), regular_module(G)), s)
            res = split_theorem_a(A)
            good = not isinstance(res, NotCT) and res.checked and \
                ct_definition_scan(res.T).all_zero and ct_definition_scan(res.F).all_zero
            ok &= good
            split += good
        for n in (2, 3):
            res = split_theorem_a(group_ring_quotient(G, n))
            good = isinstance(res, NotCT) and not tate(res.certificate.module, None, 0).is_zero
            ok &= good
            refused += good
    return "torsion-split", ok, f"{split} splittings verified, {refused} counter-examples refused"


def check_relation_rank(seed):
    n = bad = cor = 0
    for g in SMALL:
        G = from_label(g)
        for s in _seeds(seed, 6):
            A = random_finite_module(G, seed=s)
            P = minimal_presentation(A)
            bad += not verify_theorem2(A, P).match
            cor += not verify_corollary(A, P)
            n += 1
    return "relation-rank", bad == 0 and cor == 0, f"{n} modules, {bad} formula failures, {cor} corollary failures"


def check_augmentation(seed):
    groups = ("C2", "C4", "C2xC2", "D8", "Q8", "C3", "C9", "C3xC3")
    try:
        vals = [augmentation_ideal_rank(from_label(g)) for g in groups]
    except InternalContradiction as exc:
        return "augmentation-rank", False, str(exc)
    return "augmentation-rank", True, " ".join(f"{g}:{v}" for g, v in zip(groups, vals))


def check_herbrand(seed):
    bad = n = 0
    for g in SMALL:
        G = from_label(g)
        for s in _seeds(seed, 8):
            A = random_finite_module(G, seed=s)
            size = {k: tate(A, None, k).size for k in DEGREES}
            bad += size[0] != size[-1] or size[-2] != size[0] or size[-1] != size[1] or size[0] != size[2]
            n += 1
    return "herbrand-periodicity", bad == 0, f"{n} modules over cyclic groups, {bad} failures"


def check_hom_free(seed):
    reps = [sweep_lemma44(p, 8) for p in (2, 3)]
    fails = sum(len(r.failures) for r in reps)
    detail = ", ".join(f"p={r.p}: {r.checked} modules, {r.hom_free} Hom-free" for r in reps)
    return "hom-free-implies-free", fails == 0, detail


def check_zeta(seed):
    G = from_label("C2")
    s4 = fit_rational(zeta_coefficients(G, 1, 4, cross_check=True))
    s5 = zeta_coefficients(G, 1, 5)
    ok = (s4.coefficients[0] == 1 and s4.coefficients == s5.coefficients[:5]
          and s4.basis_counts == s4.coefficients and s4.fitted is not None
          and predict_next(s4) == s5.coefficients[5])
    return "zeta", ok, f"C2 d=1 c={list(s5.coefficients)} fit={s4.fitted}"


def check_schmid(seed):
    out = []
    ok = True
    for g in ("D8", "Q8"):
        A = build_schmid_module(from_label(g))
        v = is_ct_finite(A).is_ct
        ok &= not v and not is_ct(A).is_ct
        out.append(f"{g}:{'CT' if v else 'not-CT'}")
    return "schmid", ok, " ".join(out)


CHECKS = (check_free, check_gaschutz_uchida, check_nakayama, check_split, check_relation_rank,
          check_augmentation, check_herbrand, check_hom_free, check_zeta, check_schmid)


def run_selftest(seed: int = 0):
    for check in CHECKS:
        try:
            yield check(seed)
        except InternalContradiction as exc:
            yield check.__name__.removeprefix("check_"), False, f"internal contradiction: {exc}"
