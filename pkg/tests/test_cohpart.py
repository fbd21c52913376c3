import json
import math

import pytest
from hypothesis import given, strategies as st

from pairblow.cohpart import (
    EMPTY,
    CohModel,
    WeightedPartition,
    ambient_model,
    aut_order,
    dual_partition,
    iter_weighted_partitions,
    nakajima_codim,
    surface_p2,
    surface_ruled,
    weighted_partitions_of_size,
    zeta,
)

P2 = surface_p2()
RULED = surface_ruled()


def wp(*parts, model=P2):
    return WeightedPartition((s, model.element(lbl)) for s, lbl in parts)


# -- model validation ---------------------------------------------------------

def test_model_rejects_broken_pairing():
    with pytest.raises(ValueError):
        CohModel("bad", 2, [("1", 0), ("a", 1), ("pt", 2)], [("1", "pt"), ("a", "pt")])
    with pytest.raises(ValueError):
        # a pairs with a class of non-complementary codimension
        CohModel("bad", 2, [("1", 0), ("a", 1), ("b", 2), ("pt", 2)],
                 [("1", "pt"), ("a", "b")])
    with pytest.raises(ValueError):
        # two codim-0 classes
        CohModel("bad", 2, [("1", 0), ("u", 0), ("pt", 2), ("qt", 2)],
                 [("1", "pt"), ("u", "qt")])


def test_catalogue_models_are_valid():
    for model in (P2, RULED):
        assert model.dim_complex == 2
    for name in ("abstract_X", "X_blown_point", "P3", "P3_blown",
                 "bundle_over_C", "bundle_over_E"):
        assert ambient_model(name).dim_complex == 3


# -- aut / zeta ----------------------------------------------------------------

def test_aut_single_part():
    assert aut_order(wp((1, "pt"))) == 1


def test_aut_repeated_part():
    # one transposition swaps the two identical parts: 2! orderings
    assert aut_order(wp((2, "L"), (2, "L"))) == 2


def test_aut_distinct_sizes():
    assert aut_order(wp((1, "L"), (2, "L"))) == 1


def test_aut_same_size_distinct_weights():
    assert aut_order(wp((2, "L"), (2, "pt"))) == 1


def test_zeta_single_point_part():
    assert zeta(wp((1, "pt"))) == 1


def test_zeta_repeated():
    # 2! * 2 * 2, straight from the displayed formula
    assert zeta(wp((2, "L"), (2, "L"))) == 8


def test_zeta_empty():
    assert zeta(EMPTY) == 1


# -- duality -------------------------------------------------------------------

def test_dual_point_gives_identity_class():
    assert dual_partition(wp((1, "pt"))) == wp((1, "1"))


def test_dual_middle_degree_fixed():
    assert dual_partition(wp((1, "L"))) == wp((1, "L"))


def test_dual_on_ruled_swaps_fiber_and_section():
    eta = wp((3, "f"), model=RULED)
    assert dual_partition(eta) == wp((3, "s"), model=RULED)


# -- nakajima codimension --------------------------------------------------------

def test_nakajima_point_weight():
    # dual weight is the identity class: 1 - 1 + 0
    assert nakajima_codim(wp((1, "pt"))) == 0


def test_nakajima_empty():
    assert nakajima_codim(EMPTY) == 0


def test_nakajima_unit_weight():
    # dual weight is the point class: 2 - 1 + 2
    assert nakajima_codim(wp((2, "1"))) == 3


# -- random property suite --------------------------------------------------------

def partition_strategy(model):
    labels = st.sampled_from(model.labels())
    part = st.tuples(st.integers(1, 4), labels)
    return st.lists(part, max_size=6).map(
        lambda ps: WeightedPartition((s, model.element(lbl)) for s, lbl in ps)
    )


partitions_p2 = partition_strategy(P2)
partitions_ruled = partition_strategy(RULED)


@given(partitions_p2 | partitions_ruled)
def test_zeta_invariant_under_duality(eta):
    assert zeta(eta) == zeta(dual_partition(eta))


@given(partitions_p2 | partitions_ruled)
def test_dual_is_involution(eta):
    assert dual_partition(dual_partition(eta)) == eta


@given(partitions_p2 | partitions_ruled)
def test_codim_complementarity(eta):
    total = sum(w.codim + w.dual().codim for _, w in eta)
    assert total == 2 * eta.length


@given(partitions_p2 | partitions_ruled)
def test_aut_divides_length_factorial(eta):
    assert math.factorial(eta.length) % aut_order(eta) == 0


# -- enumeration ----------------------------------------------------------------

def naive_count(n, items):
    """Count multisets of sized items summing to n, by direct recursion."""
    def rec(remaining, i):
        if remaining == 0:
            return 1
        if i == len(items):
            return 0
        total = rec(remaining, i + 1)  # skip item i
        if items[i] <= remaining:
            total += rec(remaining - items[i], i)  # use item i again
        return total
    return rec(n, 0)


@pytest.mark.parametrize("model", [P2, RULED])
def test_enumeration_matches_naive_counter(model):
    r = len(model.elements)
    for n in range(7):
        generated = list(weighted_partitions_of_size(model, n))
        assert len(generated) == len(set(generated)), "duplicates generated"
        items = [s for s in range(1, n + 1) for _ in range(r)] if n else []
        assert len(generated) == naive_count(n, items)


def test_enumeration_closed_form_cross_check():
    # weight assignments per plain partition: multichoose(r, multiplicity)
    from itertools import combinations_with_replacement

    def plain_partitions(n, maximum=None):
        if n == 0:
            yield ()
            return
        maximum = maximum or n
        for first in range(min(n, maximum), 0, -1):
            for rest in plain_partitions(n - first, first):
                yield (first,) + rest

    r = len(P2.elements)
    for n in range(7):
        expected = 0
        for lam in plain_partitions(n):
            ways = 1
            for size in set(lam):
                m = lam.count(size)
                ways *= sum(1 for _ in combinations_with_replacement(range(r), m))
            expected += ways
        assert len(list(weighted_partitions_of_size(P2, n))) == expected


def test_iter_bound():
    etas = list(iter_weighted_partitions(P2, 3))
    assert all(e.size <= 3 for e in etas)
    assert EMPTY in etas


# -- serialization -----------------------------------------------------------------

def test_model_json_round_trip():
    data = json.loads(json.dumps(P2.to_json()))
    assert CohModel.from_json(data) == P2


def test_partition_json_round_trip():
    eta = wp((2, "L"), (1, "pt"))
    data = json.loads(json.dumps(eta.to_json()))
    assert WeightedPartition.from_json(data, P2) == eta
