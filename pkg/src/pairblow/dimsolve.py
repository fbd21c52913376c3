"""Virtual-dimension gates: parametric integer equations and certificates.

Every degeneration produces one equation

    a_S * S + a_n * |eta| + a_k * k + [d*c] = excess + l(eta)

over the aggregates S (sum of dual-weight codimensions), |eta|, l(eta),
the exceptional multiplicity k and the product of the free pushforward
degree d with the symbolic parameter c >= c_min.  The solver enumerates
all solutions up to a bound and certifies that none exist beyond it by a
dominance argument: once the |eta| coefficient exceeds the coefficient of
l(eta), the gap lhs - rhs grows strictly with |eta|.

Certificates are immutable, serializable, and re-checkable by interval
arithmetic independent of how they were produced.  Solvers are pure and
deterministic; independent gates may be solved concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .cohpart import CohModel, Insertion, WeightedPartition, nakajima_codim
from .geomcat import AffineForm, Degeneration, FormLike, c1_pair, geometry, solve_class_constraints


class DominanceFails(ValueError):
    """The gate cannot be certified: the size coefficient is too small."""


def insertion_codim_sum(insertions: Iterable[Insertion]) -> int:
    """Total codimension of descendent insertions: sum of codim + level - 1."""
    return sum(ins.cls.codim + ins.level - 1 for ins in insertions)


def vdim_relative_gap(eta: WeightedPartition) -> int:
    """The eta-dependent part of relative virtual-dimension bookkeeping.

    Equals the codimension of the boundary class: sum of dual-weight
    codims - l(eta) + |eta|.
    """
    return nakajima_codim(eta)


# -- gate problems -----------------------------------------------------------

@dataclass(frozen=True)
class GateProblem:
    """One reduced dimension-constraint equation with side conditions.

    Side conditions, always in force: l <= |eta|; |eta| = 0 iff l = 0;
    every dual-weight codimension lies in [0, max_part_codim]; d >= 0;
    the symbolic parameter c is an integer >= c_min.
    """

    coeff_size: int
    coeff_codim_sum: int = 1
    coeff_k: int = 0
    k_fixed: int | None = None
    k_min: int | None = None
    degree_term: bool = False
    c_min: int | None = None
    excess: int = 0
    max_part_codim: int = 2
    label: str = ""

    def __post_init__(self):
        if self.coeff_k:
            if (self.k_fixed is None) == (self.k_min is None):
                raise ValueError("a k term needs exactly one of k_fixed / k_min")
        if self.degree_term and self.c_min is None:
            raise ValueError("a d*c term needs the bound c_min")

    def render(self) -> str:
        lhs = []
        if self.coeff_codim_sum == 1:
            lhs.append("S")
        else:
            lhs.append(f"{self.coeff_codim_sum}*S")
        if self.coeff_size:
            lhs.append(f"{self.coeff_size}*|eta|" if self.coeff_size != 1 else "|eta|")
        if self.coeff_k:
            lhs.append(f"{self.coeff_k}*k" if self.coeff_k != 1 else "k")
        if self.degree_term:
            lhs.append("d*c")
        rhs = f"{self.excess} + l" if self.excess else "l"
        return " + ".join(lhs) + " = " + rhs

    def to_json(self) -> dict:
        data = {
            "coeff_codim_sum": self.coeff_codim_sum,
            "coeff_size": self.coeff_size,
            "excess": self.excess,
            "max_part_codim": self.max_part_codim,
            "label": self.label,
        }
        if self.coeff_k:
            data["coeff_k"] = self.coeff_k
            data["k"] = (
                {"fixed": self.k_fixed} if self.k_fixed is not None else {"min": self.k_min}
            )
        if self.degree_term:
            data["degree_term"] = {"c_min": self.c_min}
        return data

    @classmethod
    def from_json(cls, data: dict) -> "GateProblem":
        kspec = data.get("k") or {}
        degree = data.get("degree_term")
        return cls(
            coeff_size=data["coeff_size"],
            coeff_codim_sum=data.get("coeff_codim_sum", 1),
            coeff_k=data.get("coeff_k", 0),
            k_fixed=kspec.get("fixed"),
            k_min=kspec.get("min"),
            degree_term=degree is not None,
            c_min=degree.get("c_min") if degree else None,
            excess=data.get("excess", 0),
            max_part_codim=data.get("max_part_codim", 2),
            label=data.get("label", ""),
        )


@dataclass(frozen=True)
class GateSolution:
    """One admissible eta-shape with its forced parameter values.

    parts lists (size, dual-weight codim) pairs.  c is None when the
    solution holds for every admissible c; a value pins the only c that
    works.  d_free marks the degenerate c = 0 family where every d >= 1
    solves (synthetic gates only).
    """

    parts: tuple[tuple[int, int], ...]
    d: int | None = None
    c: int | None = None
    k: int | None = None
    d_free: bool = False

    @property
    def size(self) -> int:
        return sum(s for s, _ in self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def codim_sum(self) -> int:
        return sum(cd for _, cd in self.parts)

    def sort_key(self):
        return (
            self.length,
            self.size,
            self.codim_sum,
            -1 if self.d is None else self.d,
            self.parts,
            -1 if self.k is None else self.k,
            -1 if self.c is None else self.c,
        )

    def render(self) -> str:
        shape = "()" if not self.parts else "".join(f"({s}:{cd})" for s, cd in self.parts)
        extras = []
        if self.d_free:
            extras.append("d=any>=1")
        elif self.d is not None:
            extras.append(f"d={self.d}")
        if self.c is not None:
            extras.append(f"c={self.c}")
        if self.k is not None:
            extras.append(f"k={self.k}")
        return shape + (" [" + ", ".join(extras) + "]" if extras else "")

    def to_json(self) -> dict:
        return {
            "parts": [list(p) for p in self.parts],
            "d": self.d,
            "c": self.c,
            "k": self.k,
            "d_free": self.d_free,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GateSolution":
        return cls(
            parts=tuple((int(a), int(b)) for a, b in data["parts"]),
            d=data.get("d"),
            c=data.get("c"),
            k=data.get("k"),
            d_free=bool(data.get("d_free", False)),
        )


@dataclass(frozen=True)
class GateCertificate:
    """Solution set (possibly empty) plus the dominance proof beyond the bound."""

    problem: GateProblem
    verdict: str  # "empty" | "solutions"
    solutions: tuple[GateSolution, ...]
    enum_bound: int
    effective_bound: int
    slope: int
    base_gap: int           # lower bound of lhs - rhs at |eta| = 0
    beyond_gap: int         # lower bound of lhs - rhs at |eta| = effective_bound + 1
    chain: tuple[str, ...]  # the inequality steps backing the dominance claim

    def to_json(self) -> dict:
        return {
            "problem": self.problem.to_json(),
            "verdict": self.verdict,
            "solutions": [s.to_json() for s in self.solutions],
            "enum_bound": self.enum_bound,
            "effective_bound": self.effective_bound,
            "slope": self.slope,
            "base_gap": self.base_gap,
            "beyond_gap": self.beyond_gap,
            "chain": list(self.chain),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GateCertificate":
        return cls(
            problem=GateProblem.from_json(data["problem"]),
            verdict=data["verdict"],
            solutions=tuple(GateSolution.from_json(s) for s in data["solutions"]),
            enum_bound=data["enum_bound"],
            effective_bound=data["effective_bound"],
            slope=data["slope"],
            base_gap=data["base_gap"],
            beyond_gap=data["beyond_gap"],
            chain=tuple(data["chain"]),
        )


# -- gate construction ----------------------------------------------------------

def build_gate(
    degeneration: Degeneration,
    beta_constraints: Sequence[tuple[str, FormLike]],
    extra_insertions: Sequence[Insertion] = (),
    c_min: int | None = None,
    k_min: int | None = None,
    label: str = "",
) -> GateProblem:
    """Reduce one degeneration to its gate equation.

    The small-side class family is solved from the divisor constraints,
    its c1 pairing substituted, and the codimension of any insertions that
    deform to the small side lands on the right-hand side.
    """
    g_small = geometry(degeneration.small[0], c_min=c_min)
    family = solve_class_constraints(g_small, beta_constraints)
    c1_form = c1_pair(g_small, family)

    lhs = c1_form - AffineForm.var("n")  # the -|eta| from the boundary class codim
    coeff_size = _int_coeff(lhs, "n")
    coeff_k = _int_coeff(lhs, "k")
    coeff_dc = _int_coeff(lhs, "dc")
    if coeff_dc not in (0, 1):
        raise DominanceFails("only a unit d*c term is supported")
    leftover = set(lhs.variables()) - {"n", "k", "dc"}
    if leftover:
        raise DominanceFails(f"unresolved symbols in the c1 pairing: {sorted(leftover)}")
    if coeff_k and k_min is None:
        raise ValueError("a symbolic k in the class constraints needs k_min")

    extra = insertion_codim_sum(extra_insertions)
    const = int(lhs.const)
    return GateProblem(
        coeff_size=coeff_size,
        coeff_k=coeff_k,
        k_min=k_min if coeff_k else None,
        degree_term=bool(coeff_dc),
        c_min=g_small.c_min if coeff_dc else None,
        excess=extra - const,
        label=label,
    )


def _int_coeff(form: AffineForm, var: str) -> int:
    c = form.coefficient(var)
    if c.denominator != 1:
        raise DominanceFails(f"non-integer coefficient on {var}")
    return c.numerator


# -- solving -----------------------------------------------------------------------

def _k_contribution(problem: GateProblem) -> int:
    """Smallest possible value of the k term."""
    if not problem.coeff_k:
        return 0
    if problem.k_fixed is not None:
        return problem.coeff_k * problem.k_fixed
    if problem.coeff_k < 0:
        raise DominanceFails("negative coefficient on an unbounded k")
    return problem.coeff_k * problem.k_min


def _slope(problem: GateProblem) -> int:
    """Growth rate of the lhs - rhs gap in |eta| under the side conditions."""
    return problem.coeff_size - 1 + min(0, problem.coeff_codim_sum) * problem.max_part_codim


def lower_gap(problem: GateProblem, n: int) -> int:
    """Interval lower bound of lhs - rhs over all states with |eta| = n."""
    if problem.degree_term and problem.c_min < 0:
        raise DominanceFails("the parameter c must be bounded below by 0")
    return _slope(problem) * n + _k_contribution(problem) - problem.excess


def _dominance_chain(problem: GateProblem, slope: int, base: int) -> list[str]:
    steps = []
    if problem.coeff_codim_sum >= 0:
        steps.append(f"S >= 0, so {problem.coeff_codim_sum}*S >= 0")
    else:
        steps.append(
            f"S <= {problem.max_part_codim}*l <= {problem.max_part_codim}*|eta|, so "
            f"{problem.coeff_codim_sum}*S >= {problem.coeff_codim_sum * problem.max_part_codim}*|eta|"
        )
    if problem.coeff_k:
        if problem.k_fixed is not None:
            steps.append(f"k = {problem.k_fixed} contributes {problem.coeff_k * problem.k_fixed}")
        else:
            steps.append(
                f"k >= {problem.k_min}, so {problem.coeff_k}*k >= {problem.coeff_k * problem.k_min}"
            )
    if problem.degree_term:
        steps.append(f"d >= 0 and c >= {problem.c_min} >= 0, so d*c >= 0")
    steps.append(f"l(eta) <= |eta|, so lhs - rhs >= {slope}*|eta| + {base}")
    return steps


def solve_gate(problem: GateProblem, enum_bound: int = 6) -> GateCertificate:
    """Enumerate all solutions with |eta| <= bound; prove none exist beyond.

    Raises DominanceFails when the equation cannot be certified (size
    coefficient too small to dominate l(eta), or an unbounded parameter
    with a negative coefficient).
    """
    if enum_bound < 1:
        raise ValueError("enum_bound must be >= 1")
    slope = _slope(problem)
    base = lower_gap(problem, 0)
    if slope <= 0:
        raise DominanceFails(
            f"|eta| coefficient {problem.coeff_size} cannot dominate l(eta) "
            f"(slope {slope} <= 0)"
        )
    # Smallest size beyond which the gap is provably positive.
    if base >= 1:
        n_star = 0
    else:
        n_star = -(-(1 - base) // slope)  # ceil
    effective = max(enum_bound, n_star - 1)
    solutions = sorted(_enumerate(problem, effective), key=GateSolution.sort_key)
    if base >= 1 and solutions:
        raise AssertionError("dominance claims emptiness but enumeration found solutions")

    chain = _dominance_chain(problem, slope, base)
    beyond = lower_gap(problem, effective + 1)
    if base >= 1:
        chain.append(
            f"at |eta| = 0 the gap is already {base} >= 1 and it grows by {slope} "
            f"per unit of |eta|: no solution exists for any |eta| >= 0"
        )
    else:
        chain.append(
            f"for |eta| > {effective} the gap is >= {beyond} >= 1: the enumeration "
            f"up to |eta| = {effective} is exhaustive"
        )
    return GateCertificate(
        problem=problem,
        verdict="empty" if not solutions else "solutions",
        solutions=tuple(solutions),
        enum_bound=enum_bound,
        effective_bound=effective,
        slope=slope,
        base_gap=base,
        beyond_gap=beyond,
        chain=tuple(chain),
    )


def _enumerate(problem: GateProblem, bound: int) -> Iterator[GateSolution]:
    for n in range(bound + 1):
        lengths = (0,) if n == 0 else range(1, n + 1)
        for length in lengths:
            for codim_sum in range(problem.max_part_codim * length + 1):
                residual = (
                    problem.excess
                    + length
                    - problem.coeff_codim_sum * codim_sum
                    - problem.coeff_size * n
                )
                for kval, rest in _k_branches(problem, residual):
                    for d, c, d_free in _dc_branches(problem, rest):
                        for parts in _shapes(n, length, codim_sum, problem.max_part_codim):
                            yield GateSolution(
                                parts=parts, d=d, c=c, k=kval, d_free=d_free
                            )


def _k_branches(problem: GateProblem, residual: int) -> Iterator[tuple[int | None, int]]:
    if not problem.coeff_k:
        yield None, residual
        return
    if problem.k_fixed is not None:
        yield problem.k_fixed, residual - problem.coeff_k * problem.k_fixed
        return
    k = problem.k_min
    while problem.coeff_k * k <= residual:
        yield k, residual - problem.coeff_k * k
        k += 1


def _dc_branches(
    problem: GateProblem, residual: int
) -> Iterator[tuple[int | None, int | None, bool]]:
    if not problem.degree_term:
        if residual == 0:
            yield None, None, False
        return
    if residual == 0:
        yield 0, None, False  # d = 0 works for every admissible c
        if problem.c_min == 0:
            yield None, 0, True  # c = 0 leaves d unconstrained
        return
    if residual < 0:
        return
    for d in range(1, residual + 1):
        if residual % d == 0 and residual // d >= problem.c_min:
            yield d, residual // d, False


def _shapes(
    n: int, length: int, codim_sum: int, max_codim: int
) -> Iterator[tuple[tuple[int, int], ...]]:
    """Multisets of (size, dual-codim) parts with the given aggregates."""
    items = [(s, cd) for s in range(n, 0, -1) for cd in range(max_codim, -1, -1)]

    def rec(rem_n, rem_l, rem_s, start, acc):
        if rem_l == 0:
            if rem_n == 0 and rem_s == 0:
                yield tuple(acc)
            return
        for i in range(start, len(items)):
            size, cd = items[i]
            if size > rem_n - (rem_l - 1):
                continue
            if cd > rem_s or rem_s - cd > (rem_l - 1) * max_codim:
                continue
            acc.append((size, cd))
            yield from rec(rem_n - size, rem_l - 1, rem_s - cd, i, acc)
            acc.pop()

    yield from rec(n, length, codim_sum, 0, [])


# -- certificate checking -----------------------------------------------------------

def solution_satisfies(problem: GateProblem, sol: GateSolution) -> bool:
    """Re-substitute a solution into the raw equation and side conditions."""
    n, length, codim_sum = sol.size, sol.length, sol.codim_sum
    if any(s < 1 or not 0 <= cd <= problem.max_part_codim for s, cd in sol.parts):
        return False
    if (n == 0) != (length == 0):
        return False
    lhs = problem.coeff_codim_sum * codim_sum + problem.coeff_size * n
    if problem.coeff_k:
        k = problem.k_fixed if problem.k_fixed is not None else sol.k
        if k is None:
            return False
        if problem.k_min is not None and k < problem.k_min:
            return False
        lhs += problem.coeff_k * k
    if problem.degree_term:
        if sol.d_free:
            if sol.c != 0 or problem.c_min > 0:
                return False
        else:
            if sol.d is None or sol.d < 0:
                return False
            c = sol.c
            if c is None:
                if sol.d != 0:
                    return False
                c = problem.c_min  # any admissible c; the term is 0 anyway
            if c < problem.c_min:
                return False
            lhs += sol.d * c
    return lhs == problem.excess + length


def check_certificate(cert: GateCertificate) -> bool:
    """Independent interval re-validation of a certificate.

    Checks every claimed solution by substitution, recomputes the
    dominance bounds from the declared variable ranges, and (when the
    emptiness is not already symbolic at |eta| = 0) re-runs the bounded
    enumeration.
    """
    problem = cert.problem
    try:
        slope = _slope(problem)
        base = lower_gap(problem, 0)
        beyond = lower_gap(problem, cert.effective_bound + 1)
    except DominanceFails:
        return False
    if slope <= 0 or slope != cert.slope:
        return False
    if base != cert.base_gap or beyond != cert.beyond_gap:
        return False
    if beyond < 1:
        return False
    if cert.effective_bound < cert.enum_bound:
        return False
    for sol in cert.solutions:
        if not solution_satisfies(problem, sol):
            return False
    if cert.verdict == "empty":
        if cert.solutions:
            return False
        if base < 1:
            # emptiness below the bound rests on enumeration; redo it
            if any(True for _ in _enumerate(problem, cert.effective_bound)):
                return False
    else:
        if not cert.solutions:
            return False
        found = sorted(_enumerate(problem, cert.effective_bound), key=GateSolution.sort_key)
        if tuple(found) != cert.solutions:
            return False
    return True


# -- refinement over a surface model ---------------------------------------------------

def expand_solution_over_model(
    sol: GateSolution, model: CohModel
) -> list[WeightedPartition]:
    """All concrete weighted partitions matching a shape over a surface model.

    A part requiring dual-weight codimension cd takes any primal weight of
    codimension dim - cd.
    """
    import itertools

    choices = []
    for size, dual_codim in sol.parts:
        labels = model.labels_of_codim(model.dim_complex - dual_codim)
        if not labels:
            return []
        choices.append([(size, lbl) for lbl in labels])
    result = set()
    for combo in itertools.product(*choices):
        result.add(WeightedPartition((s, model.element(lbl)) for s, lbl in combo))
    return sorted(result, key=lambda p: p.render())
