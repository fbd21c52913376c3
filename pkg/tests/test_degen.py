import json
from fractions import Fraction

import pytest

from pairblow.cohpart import (
    AWAY_FROM_ALL,
    Insertion,
    WeightedPartition,
    ambient_model,
    surface_p2,
)
from pairblow.degen import (
    GENERIC_PRODUCT,
    MissingOracle,
    NoCommonFactor,
    RelPFSymbol,
    UnsupportedInsertionSide,
    assemble,
    cancel_pair,
    default_oracle_table,
    degenerate_contribution,
    degeneration_coefficient,
    oracle_check,
    oracle_table_from_json,
    oracle_table_to_json,
    substitute_oracle,
    term_coefficient_ok,
    term_dimension_ok,
)
from pairblow.geomcat import AffineForm, CurveClass
from pairblow.qlaurent import ONE, Q, QLaurent

X = ambient_model("abstract_X")
XT = ambient_model("X_blown_point")
P2 = surface_p2()

BETA = CurveClass.of("abstract_X", 1)
PBANG_BETA = CurveClass.of("X_blown_point", 1, 0)
PBANG_MINUS_E = CurveClass.of("X_blown_point", 1, -1)


def tau(level, label, model=X, away=False):
    flags = AWAY_FROM_ALL if away else frozenset()
    return Insertion(level, model.element(label, flags))


# -- assembling the point-case identities ----------------------------------------

def test_assemble_trivial_boundary_identity():
    # degenerate X at a point with no center-supported insertions
    identity = assemble("abstract_X", "point", BETA, [GENERIC_PRODUCT], label="demo")
    assert identity.is_single_term
    term = identity.terms[0]
    assert term.eta == WeightedPartition()
    assert term.coefficient == ONE
    assert term.small.is_trivial_unit
    assert term.large.render() == "Z[X_blown_point/E; Prod | ()]_p!beta"


def test_assemble_point_insertion_identity():
    identity = assemble(
        "abstract_X", "point", BETA, [tau(0, "pt"), GENERIC_PRODUCT], label="demo"
    )
    assert identity.is_single_term
    term = identity.terms[0]
    assert term.eta == WeightedPartition([(1, P2.element("pt"))])
    assert term.coefficient == QLaurent.q_power(-1)  # (-1)^0 * 1 / q
    assert term.small.render() == "Z[P3/H; tau_0(pt) | (1,pt)]_L"
    # the large factor carries the dual boundary (1, identity class)
    assert term.large.render() == "Z[X_blown_point/E; Prod | (1,1)]_p!beta - e"


def test_assemble_vanishing_family():
    k = AffineForm.var("k")
    total = CurveClass.of("X_blown_point", 1, k)
    identity = assemble(
        "X_blown_point", "divisor_E", total, [GENERIC_PRODUCT], k_min=1, label="vanish"
    )
    assert identity.is_zero
    assert identity.certificate.verdict == "empty"


def test_assemble_strict_transform_identity():
    identity = assemble(
        "X_blown_point", "divisor_E", PBANG_MINUS_E, [GENERIC_PRODUCT], label="demo"
    )
    term = identity.terms[0]
    assert term.small.render() == "Z[P3_blown/H; | (1,pt)]_F"
    assert term.large.render() == "Z[X_blown_point/E; Prod | (1,1)]_p!beta - e"


def test_assemble_routes_by_support_flags():
    # a two-sided synthetic split: one insertion at the center, one away
    identity = assemble(
        "abstract_X",
        "point",
        BETA,
        [tau(0, "pt"), tau(0, "pt", away=True), GENERIC_PRODUCT],
        label="split",
    )
    term = identity.terms[0]
    assert "tau_0(pt)" in term.small.render()
    assert "tau_0(pt)" in term.large.render()
    assert "Prod" in term.large.render()


def test_assemble_rejects_ambiguous_support():
    from pairblow.cohpart import AWAY_FROM_C

    lonely = Insertion(0, X.element("D", {AWAY_FROM_C}))
    with pytest.raises(UnsupportedInsertionSide):
        assemble("abstract_X", "point", BETA, [lonely, GENERIC_PRODUCT])


def test_term_audits():
    identity = assemble(
        "abstract_X", "point", BETA, [tau(0, "pt"), GENERIC_PRODUCT], label="demo"
    )
    for term in identity.terms:
        assert term_dimension_ok(identity, term)
        assert term_coefficient_ok(term)


def test_determinism():
    def build():
        return assemble(
            "abstract_X", "point", BETA, [tau(0, "pt"), GENERIC_PRODUCT], label="demo"
        )

    a, b = build(), build()
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)


# -- coefficients ------------------------------------------------------------------

def test_degeneration_coefficient_signs():
    eta = WeightedPartition([(2, P2.element("L")), (2, P2.element("L"))])
    # |eta| = 4, l = 2, zeta = 8: coefficient (+1) * 8 / q^4
    assert degeneration_coefficient(eta) == QLaurent.q_power(-4, 8)
    eta2 = WeightedPartition([(2, P2.element("L"))])
    assert degeneration_coefficient(eta2) == QLaurent.q_power(-2, -2)


# -- cancellation --------------------------------------------------------------------

def _point_pair():
    a = assemble(
        "abstract_X", "point", BETA, [tau(0, "pt"), GENERIC_PRODUCT], label="small-side"
    )
    b = assemble(
        "X_blown_point", "divisor_E", PBANG_MINUS_E, [GENERIC_PRODUCT], label="blown-side"
    )
    return a, b


def test_cancel_pair_point_case():
    a, b = _point_pair()
    ratio = cancel_pair(a, b)
    assert ratio.coefficient == ONE  # both carry 1/q
    assert ratio.numerator.render() == "Z[P3/H; tau_0(pt) | (1,pt)]_L"
    assert ratio.denominator.render() == "Z[P3_blown/H; | (1,pt)]_F"


def test_cancel_pair_trivial_factors():
    a = assemble("abstract_X", "point", BETA, [GENERIC_PRODUCT], label="a")
    b = assemble("X_blown_point", "divisor_E", PBANG_BETA, [GENERIC_PRODUCT], label="b")
    ratio = cancel_pair(a, b)
    assert ratio.numerator.is_trivial_unit and ratio.denominator.is_trivial_unit
    assert substitute_oracle(ratio, default_oracle_table()) == ONE


def test_cancel_pair_mismatched_large():
    a, _ = _point_pair()
    b = assemble("X_blown_point", "divisor_E", PBANG_BETA, [GENERIC_PRODUCT], label="b")
    with pytest.raises(NoCommonFactor):
        cancel_pair(a, b)


def test_cancel_pair_needs_single_terms():
    a, b = _point_pair()
    multi = assemble(
        "X_blown_point",
        "divisor_E",
        PBANG_MINUS_E,
        [GENERIC_PRODUCT],
        label="multi",
        enum_bound=6,
    )
    object.__setattr__(multi, "terms", multi.terms + multi.terms)
    with pytest.raises(NoCommonFactor):
        cancel_pair(a, multi)


# -- oracle ---------------------------------------------------------------------------

def test_oracle_has_six_cited_entries():
    table = default_oracle_table()
    assert len(table) == 6
    assert all(e.provenance for e in table)


def test_degenerate_contribution_values():
    assert degenerate_contribution(2) == Q
    assert degenerate_contribution(3) == Q * (ONE + Q)
    assert degenerate_contribution(4) == Q * (ONE + Q) ** 2
    with pytest.raises(ValueError):
        degenerate_contribution(1)


def test_oracle_check_passes_on_builtin_table():
    results = oracle_check(default_oracle_table())
    # every entry without a descendent insertion is re-derivable
    assert len(results) == 5
    assert all(ok for _, _, ok in results)


def test_oracle_check_catches_tampering():
    table = list(default_oracle_table())
    bad = table[1]
    table[1] = type(bad)(
        symbol=bad.symbol,
        value=bad.value + ONE,
        provenance=bad.provenance,
        cross_check_c1=bad.cross_check_c1,
    )
    results = oracle_check(table)
    assert any(not ok for _, _, ok in results)


def test_oracle_json_round_trip():
    table = default_oracle_table()
    data = json.loads(json.dumps(oracle_table_to_json(table)))
    assert oracle_table_from_json(data) == table


def test_substitute_oracle_missing_symbol():
    a, b = _point_pair()
    ratio = cancel_pair(a, b)
    with pytest.raises(MissingOracle):
        substitute_oracle(ratio, default_oracle_table())  # no rewrites supplied


def test_substitute_oracle_with_rewrites():
    a, b = _point_pair()
    ratio = cancel_pair(a, b)
    table = default_oracle_table()
    rewrites = {
        ratio.numerator.render(): table[0].symbol,
        ratio.denominator.render(): table[1].symbol,
    }
    value = substitute_oracle(ratio, table, rewrites)
    assert value == (ONE + Q) ** 2


# -- symbol rendering ------------------------------------------------------------------

def test_symbol_rendering_orders_insertions():
    sym = RelPFSymbol(
        "P3",
        None,
        (Insertion(1, ambient_model("P3").element("pt")),
         Insertion(0, ambient_model("P3").element("L"))),
        None,
        "L",
    )
    assert sym.render() == "Z[P3; tau_0(L) tau_1(pt)]_L"
