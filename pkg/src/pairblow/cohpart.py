"""Graded cohomology models and cohomology-weighted partitions.

A CohModel is a finite basis of even cohomology classes of a surface
(complex dimension 2) or an ambient 3-fold (dimension 3), with an
involutive Poincare-duality pairing on labels.  Only complex codimensions
and the duality bijection matter to any equation downstream; intersection
normalizations are deliberately not modeled.

Degrees are stored as complex codimensions.  Where the literature speaks
of deg (real degree), the relation is deg = 2 * codim, so every constraint
stays integer-valued.

Weighted partitions are multisets of (positive size, weight) pairs over a
surface model.  They drive the boundary conditions of the degeneration
identities: their automorphism factor, dual, and codimension bookkeeping
live here.

All values are immutable and safe for concurrent reads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

# Support markers carried by insertion classes; a class with the marker for
# a degeneration center is forced to the half away from that center.
AWAY_FROM_P = "away_from_P"
AWAY_FROM_C = "away_from_C"
AWAY_FROM_E = "away_from_E"
AWAY_FROM_ALL = frozenset({AWAY_FROM_P, AWAY_FROM_C, AWAY_FROM_E})


class CohModel:
    """Ordered cohomology basis with an involutive duality pairing.

    Exactly one label has codimension 0 (the identity class "1") and its
    dual is the point class of full codimension.
    """

    def __init__(
        self,
        name: str,
        dim_complex: int,
        elements: Sequence[tuple[str, int]],
        pairing: Iterable[tuple[str, str]],
    ):
        self.name = name
        self.dim_complex = int(dim_complex)
        self.elements = tuple((str(lbl), int(cd)) for lbl, cd in elements)
        self._codim = dict(self.elements)
        if len(self._codim) != len(self.elements):
            raise ValueError(f"duplicate labels in model {name!r}")
        dual: dict[str, str] = {}
        for a, b in pairing:
            dual[a] = b
            dual[b] = a
        self._dual = dual
        self._validate()

    def _validate(self) -> None:
        labels = set(self._codim)
        if set(self._dual) != labels:
            raise ValueError(f"pairing of model {self.name!r} must cover all labels")
        for lbl in labels:
            if self._dual[self._dual[lbl]] != lbl:
                raise ValueError(f"pairing of model {self.name!r} is not an involution")
            if self._codim[lbl] + self._codim[self._dual[lbl]] != self.dim_complex:
                raise ValueError(
                    f"pairing of model {self.name!r} does not match complementary codimensions"
                )
            if not 0 <= self._codim[lbl] <= self.dim_complex:
                raise ValueError(f"codimension out of range in model {self.name!r}")
        units = [lbl for lbl, cd in self.elements if cd == 0]
        if len(units) != 1:
            raise ValueError(f"model {self.name!r} needs exactly one codim-0 class")

    # -- queries ----------------------------------------------------------

    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self.elements)

    def codim(self, label: str) -> int:
        return self._codim[label]

    def dual_label(self, label: str) -> str:
        return self._dual[label]

    def labels_of_codim(self, codim: int) -> tuple[str, ...]:
        return tuple(lbl for lbl, cd in self.elements if cd == codim)

    def unit_label(self) -> str:
        return self.labels_of_codim(0)[0]

    def element(self, label: str, support_flags: Iterable[str] = ()) -> "CohElement":
        if label not in self._codim:
            raise KeyError(f"model {self.name!r} has no class {label!r}")
        return CohElement(self, label, frozenset(support_flags))

    # -- identity ----------------------------------------------------------

    def _key(self):
        return (self.name, self.dim_complex, self.elements, tuple(sorted(self._dual.items())))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CohModel) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f"CohModel({self.name!r}, dim={self.dim_complex})"

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        seen = set()
        pairs = []
        for lbl, _ in self.elements:
            if lbl not in seen:
                pairs.append([lbl, self._dual[lbl]])
                seen.update({lbl, self._dual[lbl]})
        return {
            "name": self.name,
            "dim": self.dim_complex,
            "elements": [{"label": lbl, "codim": cd} for lbl, cd in self.elements],
            "pairing": pairs,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CohModel":
        return cls(
            data.get("name", "model"),
            data["dim"],
            [(e["label"], e["codim"]) for e in data["elements"]],
            [tuple(p) for p in data["pairing"]],
        )


@dataclass(frozen=True)
class CohElement:
    """A basis class of a CohModel, optionally tagged with support markers."""

    model: CohModel
    label: str
    support_flags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.label not in dict(self.model.elements):
            raise KeyError(f"model {self.model.name!r} has no class {self.label!r}")

    @property
    def codim(self) -> int:
        return self.model.codim(self.label)

    def dual(self) -> "CohElement":
        return CohElement(self.model, self.model.dual_label(self.label))

    def __repr__(self) -> str:
        return f"<{self.label}@{self.model.name}>"


@dataclass(frozen=True)
class Insertion:
    """A descendent insertion tau_d(gamma) on an ambient 3-fold."""

    level: int
    cls: CohElement

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("descendent level must be nonnegative")

    def render(self) -> str:
        return f"tau_{self.level}({self.cls.label})"


class WeightedPartition:
    """Multiset of (size, weight) pairs over a surface model.

    The empty partition is legal; sizes are >= 1.  Parts are kept in a
    canonical order so equality and hashing are structural.  Weight
    elements are stored without support flags.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[tuple[int, CohElement]] = ()):
        normalized = []
        for size, weight in parts:
            if size < 1:
                raise ValueError("partition part sizes must be >= 1")
            bare = CohElement(weight.model, weight.label)
            normalized.append((int(size), bare))
        normalized.sort(key=lambda p: (-p[0], p[1].label))
        self.parts = tuple(normalized)

    @property
    def size(self) -> int:
        return sum(s for s, _ in self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeightedPartition) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __iter__(self) -> Iterator[tuple[int, CohElement]]:
        return iter(self.parts)

    def render(self) -> str:
        if not self.parts:
            return "()"
        return "".join(f"({s},{w.label})" for s, w in self.parts)

    def __repr__(self) -> str:
        return f"WeightedPartition{self.render()}"

    def to_json(self) -> list:
        return [[s, w.label] for s, w in self.parts]

    @classmethod
    def from_json(cls, data: list, model: CohModel) -> "WeightedPartition":
        return cls((s, model.element(lbl)) for s, lbl in data)


EMPTY = WeightedPartition()


def aut_order(eta: WeightedPartition) -> int:
    """|Aut(eta)|: product of m! over groups of identical (size, weight) parts."""
    counts: dict[tuple[int, str], int] = {}
    for size, weight in eta:
        key = (size, weight.label)
        counts[key] = counts.get(key, 0) + 1
    result = 1
    for m in counts.values():
        result *= math.factorial(m)
    return result


def zeta(eta: WeightedPartition) -> int:
    """The combinatorial factor |Aut(eta)| * prod(sizes); 1 on the empty partition."""
    result = aut_order(eta)
    for size, _ in eta:
        result *= size
    return result


def dual_partition(eta: WeightedPartition) -> WeightedPartition:
    """Same sizes, every weight replaced by its Poincare dual."""
    return WeightedPartition((s, w.dual()) for s, w in eta)


def nakajima_codim(eta: WeightedPartition) -> int:
    """Complex codimension the boundary class of eta contributes.

    |eta| - l(eta) + sum of codims of the DUAL weights.  The partition
    stores primal weights; every dimension constraint consumes the duals,
    and conflating the two is the classic off-by-duality bug.
    """
    return eta.size - eta.length + sum(w.dual().codim for _, w in eta)


# -- enumeration ---------------------------------------------------------

def weighted_partitions_of_size(model: CohModel, n: int) -> Iterator[WeightedPartition]:
    """All weighted partitions with |eta| == n over the model, canonically ordered."""
    items = [(size, idx) for size in range(n, 0, -1) for idx in range(len(model.elements))]
    labels = model.labels()

    def rec(remaining: int, start: int, acc: list[tuple[int, int]]):
        if remaining == 0:
            yield WeightedPartition(
                (size, model.element(labels[idx])) for size, idx in acc
            )
            return
        for i in range(start, len(items)):
            size, idx = items[i]
            if size <= remaining:
                acc.append((size, idx))
                yield from rec(remaining - size, i, acc)
                acc.pop()

    yield from rec(n, 0, [])


def iter_weighted_partitions(model: CohModel, max_size: int) -> Iterator[WeightedPartition]:
    """All weighted partitions with |eta| <= max_size, in ascending size."""
    for n in range(max_size + 1):
        yield from weighted_partitions_of_size(model, n)


# -- model catalogue -------------------------------------------------------

@lru_cache(maxsize=None)
def surface_p2() -> CohModel:
    """H*(P^2): the divisor surface of every point-blow-up degeneration."""
    return CohModel(
        "P2",
        2,
        [("1", 0), ("L", 1), ("pt", 2)],
        [("1", "pt"), ("L", "L")],
    )


@lru_cache(maxsize=None)
def surface_ruled() -> CohModel:
    """Even cohomology of the ruled surface over the blown-up curve.

    f is the fiber class, s a section class; odd classes of a positive
    genus base are omitted because every constraint downstream bounds only
    codimensions 0..2, which the solver quantifies over anyway.
    """
    return CohModel(
        "ruled",
        2,
        [("1", 0), ("f", 1), ("s", 1), ("pt", 2)],
        [("1", "pt"), ("f", "s")],
    )


_AMBIENT_SPECS: dict[str, tuple[tuple[tuple[str, int], ...], tuple[tuple[str, str], ...]]] = {
    # Generic 3-fold: a divisor class D, the blow-up curve class C, a point.
    "abstract_X": ((("1", 0), ("D", 1), ("C", 2), ("pt", 3)), (("1", "pt"), ("D", "C"))),
    "X_blown_point": ((("1", 0), ("E", 1), ("-E^2", 2), ("pt", 3)), (("1", "pt"), ("E", "-E^2"))),
    "X_blown_curve": ((("1", 0), ("E", 1), ("-E^2", 2), ("pt", 3)), (("1", "pt"), ("E", "-E^2"))),
    "P3": ((("1", 0), ("H", 1), ("L", 2), ("pt", 3)), (("1", "pt"), ("H", "L"))),
    "P3_blown": (
        (("1", 0), ("H", 1), ("E", 1), ("L", 2), ("-E^2", 2), ("pt", 3)),
        (("1", "pt"), ("H", "L"), ("E", "-E^2")),
    ),
    "bundle_over_C": ((("1", 0), ("Dinf", 1), ("C", 2), ("pt", 3)), (("1", "pt"), ("Dinf", "C"))),
    "bundle_over_E": (
        (("1", 0), ("Dinf", 1), ("E", 1), ("fib", 2), ("C", 2), ("pt", 3)),
        (("1", "pt"), ("Dinf", "fib"), ("E", "C")),
    ),
}


@lru_cache(maxsize=None)
def ambient_model(geometry: str) -> CohModel:
    """Cohomology labels available for insertions on a catalogued 3-fold."""
    try:
        elements, pairing = _AMBIENT_SPECS[geometry]
    except KeyError:
        raise KeyError(f"no ambient cohomology model for geometry {geometry!r}") from None
    return CohModel(f"H({geometry})", 3, elements, pairing)


def model_to_json_str(model: CohModel) -> str:
    return json.dumps(model.to_json(), sort_keys=True)
