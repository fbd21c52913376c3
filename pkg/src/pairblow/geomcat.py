"""Catalogue of the 3-fold geometries entering the blow-up degenerations.

Geometries are finite data: a rank <= 2 curve-class lattice, named divisor
functionals on it, and a first-Chern-class functional.  The two
projective-bundle halves over the blown-up curve carry one symbolic
parameter c (the degree of c1 of the ambient space on the curve) with an
integer lower bound taken from the hypothesis being checked; their Chern
pairings are stored in the pre-reduced affine forms the Euler sequence
yields, which is all any downstream equation consumes.

Effectivity of a solved class family is an axiom here: every free
parameter of a family (fiber multiplicities, the pushforward degree d) is
declared nonnegative.

The catalogue is immutable after construction and safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union


class UnknownGeometry(KeyError):
    """The geometry has no data for the requested pairing."""


class Inconsistent(ValueError):
    """A class-constraint system has no (integral) solution."""


class UnsupportedCenter(ValueError):
    """No catalogued degeneration for this (geometry, center) pair."""


# -- affine integer forms ----------------------------------------------------

_VAR_ORDER = {"n": 0, "k": 1, "dc": 2}
_VAR_DISPLAY = {"n": "n", "k": "k", "dc": "d*c"}


def _var_key(name: str) -> tuple[int, str]:
    return (_VAR_ORDER.get(name, 99), name)


@dataclass(frozen=True)
class AffineForm:
    """Affine form c0 + sum(ci * vi) with exact rational coefficients.

    The variable "dc" denotes the product d*c, the single nonlinearity any
    catalogued pairing produces; it is treated as an opaque symbol here and
    resolved by the gate solver.
    """

    coeffs: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def of(const: Union[int, Fraction] = 0, **vars: Union[int, Fraction]) -> "AffineForm":
        items = tuple(
            sorted(
                ((v, Fraction(c)) for v, c in vars.items() if Fraction(c)),
                key=lambda it: _var_key(it[0]),
            )
        )
        return AffineForm(items, Fraction(const))

    @staticmethod
    def var(name: str, coeff: Union[int, Fraction] = 1) -> "AffineForm":
        return AffineForm.of(**{name: coeff})

    @staticmethod
    def lift(value: "AffineForm | int | Fraction") -> "AffineForm":
        if isinstance(value, AffineForm):
            return value
        return AffineForm.of(value)

    # arithmetic ---------------------------------------------------------

    def __add__(self, other: "AffineForm | int | Fraction") -> "AffineForm":
        other = AffineForm.lift(other)
        acc = dict(self.coeffs)
        for v, c in other.coeffs:
            acc[v] = acc.get(v, Fraction(0)) + c
        items = tuple(
            sorted(((v, c) for v, c in acc.items() if c), key=lambda it: _var_key(it[0]))
        )
        return AffineForm(items, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "AffineForm":
        return AffineForm(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "AffineForm | int | Fraction") -> "AffineForm":
        return self + (-AffineForm.lift(other))

    def __rsub__(self, other: "AffineForm | int | Fraction") -> "AffineForm":
        return AffineForm.lift(other) + (-self)

    def __mul__(self, scalar: Union[int, Fraction]) -> "AffineForm":
        s = Fraction(scalar)
        if not s:
            return AffineForm()
        return AffineForm(tuple((v, c * s) for v, c in self.coeffs), self.const * s)

    __rmul__ = __mul__

    # queries --------------------------------------------------------------

    def coefficient(self, name: str) -> Fraction:
        for v, c in self.coeffs:
            if v == name:
                return c
        return Fraction(0)

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def is_constant(self) -> bool:
        return not self.coeffs

    def const_value(self) -> int:
        if self.coeffs:
            raise ValueError(f"form {self.render()} is not constant")
        return _as_int(self.const)

    def is_integral(self) -> bool:
        return self.const.denominator == 1 and all(c.denominator == 1 for _, c in self.coeffs)

    def evaluate(self, env: Mapping[str, Union[int, Fraction]]) -> Fraction:
        total = self.const
        for v, c in self.coeffs:
            if v not in env:
                raise KeyError(f"no value supplied for {v!r}")
            total += c * Fraction(env[v])
        return total

    def render(self) -> str:
        if not self.coeffs:
            return str(self.const)
        pieces = []
        for i, (v, c) in enumerate(self.coeffs):
            name = _VAR_DISPLAY.get(v, v)
            body = name if abs(c) == 1 else f"{abs(c)}*{name}"
            if i == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f" + {body}" if c > 0 else f" - {body}")
        if self.const:
            pieces.append(f" + {self.const}" if self.const > 0 else f" - {-self.const}")
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"AffineForm({self.render()})"


def _as_int(x: Fraction) -> int:
    if x.denominator != 1:
        raise Inconsistent(f"value {x} is not an integer")
    return x.numerator


FormLike = Union[AffineForm, int, Fraction]


# -- geometries ----------------------------------------------------------------

@dataclass(frozen=True)
class ThreeFoldGeometry:
    name: str
    h2_basis: tuple[str, ...]
    divisors: tuple[tuple[str, tuple[int, ...]], ...]
    c1_vector: tuple[int, ...] | None
    bundle_base: str | None = None  # "C" or "E" for the projective-bundle halves
    c_min: int | None = None        # hypothesis bound: c >= c_min

    def divisor_vector(self, name: str) -> tuple[int, ...]:
        for div, vec in self.divisors:
            if div == name:
                return vec
        raise Inconsistent(f"geometry {self.name!r} has no divisor {name!r}")

    def divisor_names(self) -> tuple[str, ...]:
        return tuple(d for d, _ in self.divisors)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "h2_basis": list(self.h2_basis),
            "divisor_matrix": {d: list(vec) for d, vec in self.divisors},
            "c1_vector": list(self.c1_vector) if self.c1_vector is not None else None,
            "symbolic_params": {"bundle_base": self.bundle_base, "c_min": self.c_min},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ThreeFoldGeometry":
        params = data.get("symbolic_params") or {}
        return cls(
            name=data["name"],
            h2_basis=tuple(data["h2_basis"]),
            divisors=tuple((d, tuple(v)) for d, v in data["divisor_matrix"].items()),
            c1_vector=tuple(data["c1_vector"]) if data["c1_vector"] is not None else None,
            bundle_base=params.get("bundle_base"),
            c_min=params.get("c_min"),
        )


GEOMETRY_NAMES = (
    "abstract_X",
    "P3",
    "P3_blown",
    "X_blown_point",
    "X_blown_curve",
    "bundle_over_C",
    "bundle_over_E",
)


def geometry(name: str, c_min: int | None = None) -> ThreeFoldGeometry:
    """Look up a catalogued geometry; bundle halves take the c lower bound."""
    if name == "abstract_X":
        return ThreeFoldGeometry("abstract_X", ("beta",), (), None)
    if name in ("X_blown_point", "X_blown_curve"):
        # p! classes have intersection number zero with E; e . E = -1.
        return ThreeFoldGeometry(name, ("p!beta", "e"), (("E", (0, -1)),), None)
    if name == "P3":
        return ThreeFoldGeometry("P3", ("L",), (("H", (1,)),), (4,))
    if name == "P3_blown":
        # Basis (F, L): F the fiber class of the bundle structure over the
        # hyperplane at infinity, L the total transform of a line.
        return ThreeFoldGeometry(
            "P3_blown", ("F", "L"), (("H", (1, 1)), ("E", (1, 0))), (2, 4)
        )
    if name == "bundle_over_C":
        return ThreeFoldGeometry(
            "bundle_over_C", ("F",), (("Dinf", (1,)),), (3,),
            bundle_base="C", c_min=c_min,
        )
    if name == "bundle_over_E":
        return ThreeFoldGeometry(
            "bundle_over_E", ("F",), (("Dinf", (1,)), ("E", (1,))), (2,),
            bundle_base="E", c_min=c_min,
        )
    raise UnknownGeometry(name)


def catalogue_to_json() -> list[dict]:
    return [geometry(name).to_json() for name in GEOMETRY_NAMES]


def catalogue_from_json(data: Iterable[dict]) -> dict[str, ThreeFoldGeometry]:
    return {entry["name"]: ThreeFoldGeometry.from_json(entry) for entry in data}


# -- curve classes and families ---------------------------------------------------

@dataclass(frozen=True)
class CurveClass:
    """Integer (possibly symbolic) coordinates in a geometry's H2 basis."""

    geometry: str
    coords: tuple[AffineForm, ...]

    @staticmethod
    def of(geometry_name: str, *coords: FormLike) -> "CurveClass":
        g = geometry(geometry_name)
        vec = tuple(AffineForm.lift(c) for c in coords)
        if len(vec) != len(g.h2_basis):
            raise ValueError(
                f"{geometry_name} classes need {len(g.h2_basis)} coordinates, got {len(vec)}"
            )
        return CurveClass(geometry_name, vec)

    def is_zero(self) -> bool:
        return all(c.is_constant() and c.const == 0 for c in self.coords)

    def render(self) -> str:
        g = geometry(self.geometry)
        if self.is_zero():
            return "0"
        pieces = []
        for coeff, basis in zip(self.coords, g.h2_basis):
            if coeff.is_constant():
                c = coeff.const
                if not c:
                    continue
                if c == 1:
                    body = basis
                elif c == -1:
                    body = f"-{basis}"
                else:
                    body = f"{c}*{basis}"
            elif len(coeff.coeffs) == 1 and not coeff.const and abs(coeff.coeffs[0][1]) == 1:
                var, unit = coeff.coeffs[0]
                sign = "-" if unit < 0 else ""
                body = f"{sign}{_VAR_DISPLAY.get(var, var)}*{basis}"
            else:
                body = f"({coeff.render()})*{basis}"
            if not pieces:
                pieces.append(body)
            elif body.startswith("-"):
                pieces.append(f" - {body[1:]}")
            else:
                pieces.append(f" + {body}")
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"CurveClass[{self.geometry}: {self.render()}]"


@dataclass(frozen=True)
class ConcreteClassFamily:
    """Solved class family on an explicit lattice; free coords are >= 0."""

    geometry: str
    coords: tuple[AffineForm, ...]
    free: tuple[str, ...] = ()
    constraints: tuple[tuple[str, AffineForm], ...] = ()

    def instantiate(self, **env: int) -> CurveClass:
        vals = tuple(AffineForm.of(_as_int(c.evaluate(env))) for c in self.coords)
        return CurveClass(self.geometry, vals)


@dataclass(frozen=True)
class BundleClassFamily:
    """Class family on a projective-bundle half, in reduced bookkeeping.

    boundary_size is the pairing with Dinf; e_value the pairing with the
    zero section (E-bundle only).  The only quantity the pushforward to
    the base curve retains is its degree d, a free parameter >= 0; the
    fiber multiplicities are forced to boundary_size and, on the E-bundle,
    boundary_size - e_value.
    """

    geometry: str
    boundary_size: AffineForm
    e_value: AffineForm | None
    pushforward_e: AffineForm | None
    free: tuple[str, ...] = ("d",)
    constraints: tuple[tuple[str, AffineForm], ...] = ()

    def instantiate(self, d: int = 0, **env: int) -> CurveClass:
        if d != 0:
            raise Inconsistent(
                "a nonzero pushforward degree cannot be expressed in the reduced lattice"
            )
        n = _as_int(self.boundary_size.evaluate(env))
        if self.e_value is not None:
            m = n - _as_int(self.e_value.evaluate(env))  # E-fiber multiplicity
            if m != 0:
                raise Inconsistent(
                    "residual exceptional-fiber multiplicity; no reduced representative"
                )
        return CurveClass(self.geometry, (AffineForm.of(n),))

    def render_member(self, d: int = 0, **env: int) -> str:
        """Describe a family member, symbolically when d > 0 leaves the lattice."""
        n = _as_int(self.boundary_size.evaluate(env))
        pieces = []
        if n:
            pieces.append("F" if n == 1 else f"{n}*F")
        if d == 0 and self.e_value is not None:
            m = n - _as_int(self.e_value.evaluate(env))
            if m:
                pieces.append(f"[{m} exceptional-fiber]")
        if d:
            pieces.append(f"[pushforward degree {d}]")
        return " + ".join(pieces) if pieces else "0"


ClassFamily = Union[ConcreteClassFamily, BundleClassFamily]


# -- pairings -------------------------------------------------------------------

def divisor_value(g: ThreeFoldGeometry, divisor: str, beta: CurveClass) -> AffineForm:
    vec = g.divisor_vector(divisor)
    total = AffineForm()
    for coord, coeff in zip(beta.coords, vec):
        total = total + coord * coeff
    return total


def c1_pair(g: ThreeFoldGeometry, beta: "CurveClass | ClassFamily") -> AffineForm:
    """Exact pairing of c1 with a class or a solved family.

    For the bundle halves the result is the reduced affine form in the
    boundary size, the divisor values and the product d*c.
    """
    if isinstance(beta, BundleClassFamily):
        if g.name != beta.geometry:
            raise ValueError("family does not live on this geometry")
        base = AffineForm.var("dc") + beta.boundary_size * 3
        if g.bundle_base == "E":
            return base - beta.e_value
        return base
    if isinstance(beta, ConcreteClassFamily):
        coords = beta.coords
    else:
        coords = beta.coords
    if g.c1_vector is None:
        raise UnknownGeometry(f"geometry {g.name!r} has no c1 data")
    total = AffineForm()
    for coord, coeff in zip(coords, g.c1_vector):
        total = total + coord * coeff
    return total


# -- constraint solving ------------------------------------------------------------

def solve_class_constraints(
    g: ThreeFoldGeometry,
    constraints: Sequence[tuple[str, FormLike]],
) -> ClassFamily:
    """Parametric solution of divisor constraints over the H2 basis.

    Concrete lattices get exact Gaussian elimination (integrality checked);
    the bundle halves get the reduced bookkeeping, with the pushforward
    degree d as the remaining free parameter.
    """
    given = [(div, AffineForm.lift(val)) for div, val in constraints]
    if g.bundle_base:
        return _solve_bundle(g, given)
    return _solve_concrete(g, given)


def _solve_bundle(
    g: ThreeFoldGeometry, given: list[tuple[str, AffineForm]]
) -> BundleClassFamily:
    values = {}
    for div, val in given:
        g.divisor_vector(div)  # raises Inconsistent on unknown divisor
        if div in values:
            raise Inconsistent(f"duplicate constraint on divisor {div!r}")
        values[div] = val
    if "Dinf" not in values:
        raise Inconsistent("bundle families need the boundary constraint on Dinf")
    n = values["Dinf"]
    if g.bundle_base == "E":
        if "E" not in values:
            raise Inconsistent("the exceptional-bundle family needs the E constraint")
        v = values["E"]
        return BundleClassFamily(
            g.name, n, v, pushforward_e=v - n, constraints=tuple(given)
        )
    if "E" in values:
        raise Inconsistent("the curve-bundle half has no divisor E")
    return BundleClassFamily(g.name, n, None, None, constraints=tuple(given))


def _solve_concrete(
    g: ThreeFoldGeometry, given: list[tuple[str, AffineForm]]
) -> ConcreteClassFamily:
    rank = len(g.h2_basis)
    rows: list[list[Fraction]] = []
    rhs: list[AffineForm] = []
    for div, val in given:
        rows.append([Fraction(x) for x in g.divisor_vector(div)])
        rhs.append(val)

    pivots: dict[int, int] = {}  # column -> row
    row = 0
    for col in range(rank):
        pivot = next((r for r in range(row, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[row], rows[pivot] = rows[pivot], rows[row]
        rhs[row], rhs[pivot] = rhs[pivot], rhs[row]
        inv = 1 / rows[row][col]
        rows[row] = [x * inv for x in rows[row]]
        rhs[row] = rhs[row] * inv
        for r in range(len(rows)):
            if r != row and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[row])]
                rhs[r] = rhs[r] - rhs[row] * factor
        pivots[col] = row
        row += 1
    for r in range(row, len(rows)):
        if any(rows[r]):
            continue
        if rhs[r].coeffs or rhs[r].const:
            raise Inconsistent("constraint system has no solution")

    free_cols = [c for c in range(rank) if c not in pivots]
    coords: list[AffineForm] = [AffineForm()] * rank
    for col in free_cols:
        coords[col] = AffineForm.var(f"free_{g.h2_basis[col]}")
    for col, r in pivots.items():
        value = rhs[r]
        for fc in free_cols:
            if rows[r][fc]:
                value = value - coords[fc] * rows[r][fc]
        coords[col] = value
    for c in coords:
        if not c.is_integral():
            raise Inconsistent("constraint system has no integral solution")
    return ConcreteClassFamily(
        g.name,
        tuple(coords),
        free=tuple(f"free_{g.h2_basis[c]}" for c in free_cols),
        constraints=tuple(given),
    )


# -- blow-up pull-back --------------------------------------------------------------

_PBANG_PAIRS: dict[tuple[str, str], dict[str, object]] = {
    # X -> blow-up: matrix sending base coords to blown coords (column per
    # base generator), and the pushforward matrix going back.
    ("P3", "P3_blown"): {
        "pbang": ((0,), (1,)),       # L |-> 0*F + 1*L
        "push": ((1, 1),),           # a*F + b*L |-> (a+b)*L
        "e": (-1, 1),                # e = L - F
    },
    ("abstract_X", "X_blown_point"): {
        "pbang": ((1,), (0,)),
        "push": ((1, 0),),
        "e": (0, 1),
    },
    ("abstract_X", "X_blown_curve"): {
        "pbang": ((1,), (0,)),
        "push": ((1, 0),),
        "e": (0, 1),
    },
}


def pbang(pair: tuple[str, str], beta: CurveClass) -> CurveClass:
    """Lattice embedding of X-classes into the blow-up, killing E."""
    try:
        data = _PBANG_PAIRS[pair]
    except KeyError:
        raise UnsupportedCenter(f"no catalogued blow-up pair {pair!r}") from None
    if beta.geometry != pair[0]:
        raise ValueError(f"class lives on {beta.geometry!r}, expected {pair[0]!r}")
    matrix = data["pbang"]
    coords = []
    for row in matrix:
        acc = AffineForm()
        for coeff, coord in zip(row, beta.coords):
            acc = acc + coord * coeff
        coords.append(acc)
    return CurveClass(pair[1], tuple(coords))


def pushforward(pair: tuple[str, str], beta: CurveClass) -> CurveClass:
    """p_* on curve classes, back to the blow-up base."""
    try:
        data = _PBANG_PAIRS[pair]
    except KeyError:
        raise UnsupportedCenter(f"no catalogued blow-up pair {pair!r}") from None
    if beta.geometry != pair[1]:
        raise ValueError(f"class lives on {beta.geometry!r}, expected {pair[1]!r}")
    coords = []
    for row in data["push"]:
        acc = AffineForm()
        for coeff, coord in zip(row, beta.coords):
            acc = acc + coord * coeff
        coords.append(acc)
    return CurveClass(pair[0], tuple(coords))


def exceptional_line(blown: str) -> CurveClass:
    """The class e of a line in a fiber of the exceptional divisor."""
    for (base, bl), data in _PBANG_PAIRS.items():
        if bl == blown:
            return CurveClass(blown, tuple(AffineForm.of(x) for x in data["e"]))
    raise UnsupportedCenter(f"{blown!r} is not a catalogued blow-up")


def blowup_pair_for(blown: str) -> tuple[str, str]:
    for pair in _PBANG_PAIRS:
        if pair[1] == blown:
            return pair
    raise UnsupportedCenter(f"{blown!r} is not a catalogued blow-up")


# -- degenerations -------------------------------------------------------------------

_DEGENERATIONS: dict[tuple[str, str], tuple[tuple[str, str], tuple[str, str]]] = {
    ("abstract_X", "point"): (("P3", "H"), ("X_blown_point", "E")),
    ("abstract_X", "curve"): (("bundle_over_C", "Dinf"), ("X_blown_curve", "E")),
    ("X_blown_point", "divisor_E"): (("P3_blown", "H"), ("X_blown_point", "E")),
    ("X_blown_curve", "divisor_E"): (("bundle_over_E", "Dinf"), ("X_blown_curve", "E")),
    ("P3", "point"): (("P3", "H"), ("P3_blown", "E")),
    ("P3_blown", "divisor_E"): (("P3_blown", "H"), ("P3_blown", "E")),
}

# Which surface model the gluing divisor carries (see cohpart).
_DIVISOR_SURFACES: dict[tuple[str, str], str] = {
    ("P3", "H"): "P2",
    ("P3_blown", "H"): "P2",
    ("P3_blown", "E"): "P2",
    ("X_blown_point", "E"): "P2",
    ("bundle_over_C", "Dinf"): "ruled",
    ("bundle_over_E", "Dinf"): "ruled",
    ("X_blown_curve", "E"): "ruled",
}


@dataclass(frozen=True)
class Degeneration:
    """The two half-geometries of a semistable degeneration, glued along a divisor."""

    ambient: str
    center: str
    small: tuple[str, str]  # (geometry, relative divisor) carrying no insertions by default
    large: tuple[str, str]  # the blow-up half, relative to E
    surface: str            # "P2" or "ruled": cohomology model of the gluing divisor


def build_degeneration(ambient: str, center: str) -> Degeneration:
    """Degenerate a catalogued 3-fold at a point, along the curve, or along E."""
    try:
        small, large = _DEGENERATIONS[(ambient, center)]
    except KeyError:
        raise UnsupportedCenter(
            f"no catalogued degeneration of {ambient!r} at center {center!r}"
        ) from None
    return Degeneration(ambient, center, small, large, _DIVISOR_SURFACES[small])
