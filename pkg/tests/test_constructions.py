from fractions import Fraction

import pytest

from fordlab.exactnum import QuadValue
from fordlab.geometry import Disjointness, disks_disjoint, isometric_disk
from fordlab.moebius import bianchi_omega, from_ints
from fordlab.constructions import (
    SearchExhausted,
    UnsupportedParameter,
    bianchi_deltas,
    bianchi_x_values,
    build,
    conjugator_postcondition,
    find_power_conjugator,
    gamma0_special_generators,
    gamma0_unit_pairs,
    modular_conjugators,
    verify_construction,
)

EXPECTED_COMBINED = [
    from_ints(26269, -100820, 6845, -26271),
    from_ints(-82644, 317189, -21533, 82644),
    from_ints(424, -1445, 125, -426),
    from_ints(-782, 2667, -229, 781),
    from_ints(21644, -68445, 6845, -21646),
    from_ints(-20241, 64009, -6400, 20239),
]


def test_modular_combined_generators_match_frozen_list():
    c = build("modular")
    assert set(c.combined_gens) == set(EXPECTED_COMBINED)


def test_modular_roundtrip():
    c = build("modular")
    pos = 0
    for sub, alpha in zip(c.subgroups, c.conjugators):
        for g in sub.gens:
            assert c.combined_gens[pos] == alpha * g * alpha.inv()
            pos += 1


def test_builtin_matrices_regression():
    """Every built-in matrix has determinant one and the advertised trace."""
    c = build("modular")
    for alpha in c.conjugators:
        assert alpha.canonical_trace() == QuadValue(0)
    for n in (2, 3, 4):
        for gens in gamma0_special_generators(n):
            for g in gens:
                det = g.a * g.d - g.b * g.c
                assert det == QuadValue(1)
    for d in (1, 2, 3, 5, 6, 7, 11, 15, 19, 23):
        for key, delta in bianchi_deltas(d).items():
            det = delta.a * delta.d - delta.b * delta.c
            assert det == QuadValue(1)
            assert delta.canonical_trace() == QuadValue(0)


def test_symbolic_delta_determinants_up_to_100():
    square_free = [d for d in range(1, 101)
                   if all(d % (q * q) for q in range(2, 11))]
    for d in square_free:
        for delta in bianchi_deltas(d).values():
            assert delta.a * delta.d - delta.b * delta.c == QuadValue(1)
            assert delta.canonical_trace() == QuadValue(0)


def test_gamma0_unit_pairs_satisfy_strict_inequality():
    for n in range(5, 13):
        for a, d, b in gamma0_unit_pairs(n):
            assert (a * d - 1) % n == 0
            assert 2 * abs(a + d) < n or 2 * abs(a + d) == n


def test_build_principal_sets():
    c = build("principal", 2)
    assert c.subgroups[0].gens == [from_ints(1, 4, 0, 1), from_ints(1, 0, 2, 1)]
    c = build("principal", 5)
    assert c.subgroups[0].gens == [from_ints(1, 5, 0, 1), from_ints(1, 0, 5, 1)]


def test_build_bianchi_deltas():
    c = build("bianchi", 5)
    om = bianchi_omega(5)
    by_x = {str(sub.x): alpha for sub, alpha in zip(c.subgroups, c.conjugators)}
    assert by_x[str(om)] == from_ints(7, -10, 5, -7)
    assert by_x["0"] is None


def test_build_rejects_bad_parameters():
    with pytest.raises(UnsupportedParameter):
        build("gamma0", 0)
    with pytest.raises(UnsupportedParameter):
        build("normalizer", 6)
    with pytest.raises(UnsupportedParameter):
        build("bianchi", 12)
    with pytest.raises(UnsupportedParameter):
        build("nonsense", 3)


def test_find_power_conjugator_postconditions():
    alpha = find_power_conjugator(1, (Fraction(3), Fraction(4)),
                                  max_height=80, max_power=12)
    assert conjugator_postcondition(alpha, (QuadValue(3), QuadValue(4)))
    # the frozen involution also satisfies the postcondition on (3, 4)
    assert conjugator_postcondition(from_ints(17, -58, 5, -17),
                                    (QuadValue(3), QuadValue(4)))


def test_find_power_conjugator_exhausts_tiny_interval():
    with pytest.raises(SearchExhausted):
        find_power_conjugator(1, (Fraction(0), Fraction(1, 1000)),
                              max_height=10, max_power=3)


def test_verify_modular_is_verified():
    cert = verify_construction(build("modular"), 30, 8)
    assert cert.verdict == "Verified", cert.reasons


def test_verify_naive_principal_2_fails_lemma():
    cert = verify_construction(build("principal", 2, naive=True), 20, 6)
    assert cert.verdict == "Failed"
    assert any("LemmaViolation" in r for r in cert.reasons)


def test_verify_principal_2_standard_subgroup_passes_lemma():
    cert = verify_construction(build("principal", 2), 30, 8)
    assert all(c.status == "pass" for c in cert.lemma_results)


def test_verify_bianchi_19():
    cert = verify_construction(build("bianchi", 19), 40, 6)
    assert cert.verdict == "Verified", cert.reasons


def test_certificate_monotone_in_budget():
    c = build("gamma0", 7)
    small = verify_construction(c, 20, 8)
    large = verify_construction(c, 30, 10)
    assert small.verdict == "Verified"
    assert large.verdict == "Verified"
    assert set(small.coverage.missing) >= set(large.coverage.missing)


def test_gamma0_conjugator_disks_disjoint():
    c = build("gamma0", 5)
    disks = [isometric_disk(a) for a in c.conjugators]
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            assert disks_disjoint(disks[i], disks[j]) == Disjointness.DISJOINT


def test_bianchi_x_values_cover_cosets():
    for d in (1, 3, 5):
        xs = bianchi_x_values(d)
        assert len(xs) == 5
        assert xs[0] == QuadValue(0)


def test_modular_conjugator_matrices_frozen():
    assert modular_conjugators() == [from_ints(142, -545, 37, -142),
                                     from_ints(17, -58, 5, -17),
                                     from_ints(117, -370, 37, -117)]
