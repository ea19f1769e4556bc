"""Reduction to cyclic hidden subgroups and the end-to-end solve driver.

The reduction factors out H1 = H intersect (A x {0}): solve the abelian
problem on A x {0} by enumeration, test whether H1 is invariant under the
automorphism (if not, H = H1 and we are done), then pass to the quotient
group A/A1 x| Z_p with lexicographically-least coset representatives.
The quotient of Z_N is cyclic and the quotient of Z_p^r is elementary
abelian, so both stay inside the supported families.

The PGM stage samples the exact measurement outcome distribution for the
state labeled by the planted generator; each sampled candidate is
verified against the oracle with two real queries.  State preparation is
charged k queries per trial to keep the standard accounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .groups import (
    CyclicGroup,
    GroupElement,
    SemidirectGroup,
    element_index,
    element_mul,
    group_elements,
    phi_apply,
    semidirect_zn,
    semidirect_zpr,
    subgroup_order,
)
from .pgm import best_certified_lower_bound, outcome_distribution, trivial_state_outcome_distribution


class HidingFunction:
    """Oracle g -> label, constant and distinct on left cosets of the
    hidden subgroup.  Counts every evaluation.

    ``hidden_subgroup`` is a fixture side channel (the planted subgroup
    as a set of elements); the solver reads it only to build the exact
    simulated states, never through counted queries.
    """

    def __init__(
        self,
        group: SemidirectGroup,
        fn,
        hidden_subgroup: frozenset | None = None,
        name: str = "oracle",
    ):
        self.group = group
        self._fn = fn
        self.queries = 0
        self.hidden_subgroup = hidden_subgroup
        self.name = name

    def __call__(self, a, b: int):
        self.queries += 1
        return self._fn(self.group.element(a, b))

    @property
    def hidden_d(self):
        """The d with (d, 1) in the planted subgroup, if there is one."""
        if self.hidden_subgroup is None:
            return None
        hits = [elem for elem in self.hidden_subgroup if elem.b == 1]
        if not hits:
            return None
        return min(hits, key=lambda e: element_index(e, self.group)).a


def subgroup_closure(generators, g: SemidirectGroup) -> set[GroupElement]:
    """All elements generated by the given list, by saturation."""
    elems = {g.identity}
    frontier = [g.identity]
    gens = [g.element(x.a, x.b) for x in generators]
    while frontier:
        current = frontier.pop()
        for gen in gens:
            nxt = element_mul(current, gen, g)
            if nxt not in elems:
                elems.add(nxt)
                frontier.append(nxt)
    return elems


def coset_hiding_function(
    g: SemidirectGroup, hidden=None, generators=None
) -> HidingFunction:
    """Canonical-coset oracle fixture.

    ``hidden=d`` plants H = <(d, 1)>; ``generators`` plants an arbitrary
    subgroup; passing neither plants the trivial subgroup.  Labels are
    the least element index of each left coset.
    """
    if hidden is not None and generators is not None:
        raise ValueError("pass either hidden=d or generators, not both")
    if hidden is not None:
        gens = [g.element(hidden, 1)]
    elif generators is not None:
        gens = [g.element(x.a, x.b) for x in generators]
    else:
        gens = []
    subgroup = subgroup_closure(gens, g)
    labels: dict[GroupElement, int] = {}
    for elem in group_elements(g):
        if elem in labels:
            continue
        coset = [element_mul(elem, h, g) for h in subgroup]
        label = min(element_index(c, g) for c in coset)
        for c in coset:
            labels[c] = label
    return HidingFunction(g, labels.__getitem__, frozenset(subgroup))


# ---------------------------------------------------------------------------
# Abelian stage and normality


@dataclass(frozen=True)
class SubgroupDescription:
    """A subgroup given by generators; ``cyclic_d`` marks H = <(d, 1)>."""

    generators: tuple[GroupElement, ...]
    order: int
    cyclic_d: object = None

    @property
    def is_trivial(self) -> bool:
        return self.order == 1


def _minimal_generators_zn(a1: list[int], n: int) -> tuple[int, int]:
    """(generator, subgroup order) for the subgroup of Z_N containing a1."""
    gcd = n
    for a in a1:
        gcd = math.gcd(gcd, a)
    if gcd == n or gcd == 0:
        return 0, 1
    return gcd, n // gcd


def _rref(vectors: list[tuple[int, ...]], p: int, r: int) -> list[tuple[int, ...]]:
    """Reduced row echelon form over Z_p; rows are a basis of the span."""
    rows = [list(v) for v in vectors if any(v)]
    basis: list[list[int]] = []
    for col in range(r):
        pivot_row = None
        for row in rows:
            if row[col] != 0 and all(c == 0 for c in row[:col]):
                pivot_row = row
                break
        if pivot_row is None:
            continue
        inv = pow(pivot_row[col], -1, p)
        pivot_row = [(c * inv) % p for c in pivot_row]
        basis.append(pivot_row)
        new_rows = []
        for row in rows:
            if row[col] != 0:  # clears the original pivot row to zero too
                factor = row[col]
                row = [(c - factor * pc) % p for c, pc in zip(row, pivot_row)]
            if any(row):
                new_rows.append(row)
        rows = new_rows
    basis.sort(key=lambda row: next(i for i, c in enumerate(row) if c))
    # Back-substitute so every pivot column is cleared in the other rows.
    for i, row in enumerate(basis):
        pivot = next(j for j, c in enumerate(row) if c)
        for other in basis[:i]:
            factor = other[pivot]
            if factor:
                for j in range(r):
                    other[j] = (other[j] - factor * row[j]) % p
    return [tuple(row) for row in basis]


def abelian_hsp_solve(f: HidingFunction, g: SemidirectGroup) -> SubgroupDescription:
    """H1 = {a : f(a, 0) = f(0, 0)}, found with exactly |A| queries."""
    a_group = g.a_group
    base = None
    members = []
    for a in a_group.elements():
        label = f(a, 0)
        if a == a_group.zero:
            base = label
        members.append((a, label))
    a1 = [a for a, label in members if label == base]
    if isinstance(a_group, CyclicGroup):
        gen, order = _minimal_generators_zn(a1, a_group.n)
        gens = () if order == 1 else (g.element(gen, 0),)
        return SubgroupDescription(gens, order)
    basis = _rref(a1, g.p, a_group.r)
    gens = tuple(g.element(v, 0) for v in basis)
    return SubgroupDescription(gens, g.p ** len(basis))


def check_h1_normal(h1: SubgroupDescription, g: SemidirectGroup) -> bool:
    """H1 <= A x {0} is normal in G iff phi maps A1 onto itself."""
    if h1.is_trivial:
        return True
    a1 = {elem.a for elem in subgroup_closure(h1.generators, g)}
    return all(phi_apply(gen.a, g) in a1 for gen in h1.generators)


# ---------------------------------------------------------------------------
# Quotient construction


@dataclass(frozen=True)
class ReducedProblem:
    """The hidden subgroup problem pushed down to G2 = (A/A1) x| Z_p.

    ``lift`` maps an A2 element to its lexicographically least coset
    representative in A; ``project`` is the quotient map A -> A2.
    ``group2`` is None when A2 is trivial (H1 = A), in which case only
    the candidate d2 = 0 remains to test.
    """

    group: SemidirectGroup
    h1: SubgroupDescription
    group2: SemidirectGroup | None
    f2: HidingFunction | None
    lift: object  # callable A2-element -> A-element
    project: object  # callable A-element -> A2-element


@dataclass(frozen=True)
class ReductionResult:
    final: SubgroupDescription | None = None
    reduced: ReducedProblem | None = None


def _quotient_zn(g: SemidirectGroup, h1: SubgroupDescription):
    n = g.a_group.n
    gen = h1.generators[0].a if h1.generators else 0
    modulus = gen if gen else n
    if modulus == 1:
        return None, (lambda a2: 0), (lambda a: 0)
    g2 = semidirect_zn(modulus, g.p, g.mu % modulus)
    return g2, (lambda a2: a2 % modulus), (lambda a: a % modulus)


def _quotient_zpr(g: SemidirectGroup, h1: SubgroupDescription):
    a_group = g.a_group
    p, r = g.p, a_group.r
    basis = [gen.a for gen in h1.generators]
    basis = _rref(basis, p, r)
    pivots = [next(i for i, c in enumerate(row) if c) for row in basis]
    free = [i for i in range(r) if i not in pivots]
    if not free:
        return None, (lambda a2: a_group.zero), (lambda a: ())

    def reduce_to_rep(a):
        vec = list(a_group.reduce(a))
        for row, piv in zip(basis, pivots):
            factor = vec[piv]
            if factor:
                for i in range(r):
                    vec[i] = (vec[i] - factor * row[i]) % p
        return tuple(vec)

    def project(a) -> tuple[int, ...]:
        rep = reduce_to_rep(a)
        return tuple(rep[i] for i in free)

    def lift(a2) -> tuple[int, ...]:
        vec = [0] * r
        for coord, i in zip(a2, free):
            vec[i] = coord % p
        return tuple(vec)

    # Inherited automorphism: the group-side action is project . phi . lift,
    # and the stored (character-side) matrix is its transpose, whose rows
    # are exactly the images of the unit vectors.
    images = []
    for i in range(len(free)):
        unit = tuple(1 if j == i else 0 for j in range(len(free)))
        images.append(project(phi_apply(lift(unit), g)))
    g2 = semidirect_zpr(p, tuple(tuple(img) for img in images))
    return g2, lift, project


def reduce_to_cyclic(f: HidingFunction, g: SemidirectGroup) -> ReductionResult:
    """Factor out H1; the result is either final (H = H1, when H1 is not
    normal) or a reduced problem whose hidden subgroup is trivial or
    cyclic of order p."""
    h1 = abelian_hsp_solve(f, g)
    if not check_h1_normal(h1, g):
        return ReductionResult(final=h1)
    if isinstance(g.a_group, CyclicGroup):
        g2, lift, project = _quotient_zn(g, h1)
    else:
        g2, lift, project = _quotient_zpr(g, h1)
    if g2 is None:
        reduced = ReducedProblem(g, h1, None, None, lift, project)
        return ReductionResult(reduced=reduced)
    hidden2 = None
    if f.hidden_subgroup is not None:
        hidden2 = frozenset(
            g2.element(project(elem.a), elem.b) for elem in f.hidden_subgroup
        )
    f2 = HidingFunction(
        g2,
        lambda elem: f(lift(elem.a), elem.b),
        hidden_subgroup=hidden2,
        name=f.name + "/quotient",
    )
    return ReductionResult(reduced=ReducedProblem(g, h1, g2, f2, lift, project))


def quotient_well_defined(f: HidingFunction, g: SemidirectGroup, reduced: ReducedProblem) -> bool:
    """Exhaustive check: f is constant on each representative fiber."""
    h1_elems = subgroup_closure(reduced.h1.generators, g)
    a1 = [elem.a for elem in h1_elems]
    for elem in group_elements(g):
        base = f(elem.a, elem.b)
        for h in a1:
            if f(g.a_group.add(elem.a, h), elem.b) != base:
                return False
    return True


def detect_trivial_vs_order_p(f: HidingFunction, d, g: SemidirectGroup) -> bool:
    """True iff (d, 1) lies in the hidden subgroup: f(0, 0) = f(d, 1)."""
    return f(g.a_group.zero, 0) == f(d, 1)


# ---------------------------------------------------------------------------
# PGM-driven solve


@dataclass
class TrialRecord:
    trial: int
    sampled: object  # A element, or None for an outcome outside the support
    verified: bool
    prep_queries: int


@dataclass
class PGMRunResult:
    answer: SubgroupDescription
    group: SemidirectGroup | None = None
    transcript: list[TrialRecord] = field(default_factory=list)
    trials_used: int = 0
    prep_queries: int = 0
    oracle_queries: int = 0
    seed: int | None = None


def default_trial_budget(k: int, g: SemidirectGroup) -> int:
    """ceil(40 / certified-lower-bound) trials."""
    bracket = best_certified_lower_bound(k, g)
    return math.ceil(40 / bracket.lower)


def run_pgm_hsp(
    f: HidingFunction,
    g: SemidirectGroup,
    k: int,
    trials: int | None = None,
    seed: int = 0,
) -> PGMRunResult:
    """Measurement-driven search for the order-p hidden subgroup.

    The oracle fixture must hide either the trivial subgroup or some
    <(d, 1)> of order p (the promise after reduction).  Outcomes are
    sampled from the exact distribution by inverse CDF with a seeded
    PCG64 generator; every candidate is verified with two real queries.
    """
    if trials is None:
        trials = default_trial_budget(k, g)
    a_group = g.a_group
    elems = list(a_group.elements())
    if f.hidden_d is not None:
        if subgroup_order(f.hidden_d, g) != g.p:
            raise ValueError("fixture's planted subgroup does not have order p")
        probs = outcome_distribution(k, g, f.hidden_d)
        fail_mass = 0.0
    else:
        probs, fail_mass = trivial_state_outcome_distribution(k, g)
    cdf = np.cumsum(np.append(probs, fail_mass))
    rng = np.random.default_rng(seed)
    result = PGMRunResult(SubgroupDescription((), 1), group=g, seed=seed)
    for trial in range(trials):
        result.prep_queries += k
        draw = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        if draw >= len(elems):
            result.transcript.append(TrialRecord(trial, None, False, k))
            continue
        candidate = elems[draw]
        verified = detect_trivial_vs_order_p(f, candidate, g)
        result.transcript.append(TrialRecord(trial, candidate, verified, k))
        if verified:
            gen = g.element(candidate, 1)
            result.answer = SubgroupDescription((gen,), g.p, cyclic_d=candidate)
            result.trials_used = trial + 1
            result.oracle_queries = f.queries
            return result
    result.trials_used = trials
    result.oracle_queries = f.queries
    return result


@dataclass
class HSPResult:
    answer: SubgroupDescription
    reduction_final: bool
    pgm_run: PGMRunResult | None
    oracle_queries: int


def solve_hsp(
    f: HidingFunction,
    g: SemidirectGroup,
    k: int,
    trials: int | None = None,
    seed: int = 0,
) -> HSPResult:
    """Full pipeline: reduction, PGM stage on the quotient, and assembly
    of the answer inside the original group."""
    outcome = reduce_to_cyclic(f, g)
    if outcome.final is not None:
        return HSPResult(outcome.final, True, None, f.queries)
    reduced = outcome.reduced
    h1 = reduced.h1
    if reduced.group2 is None:
        # A2 trivial: only the candidate (0, 1) remains.
        found = detect_trivial_vs_order_p(f, g.a_group.zero, g)
        gens = h1.generators + ((g.element(g.a_group.zero, 1),) if found else ())
        order = h1.order * (g.p if found else 1)
        return HSPResult(SubgroupDescription(gens, order), False, None, f.queries)
    run = run_pgm_hsp(reduced.f2, reduced.group2, k, trials, seed)
    if run.answer.is_trivial:
        answer = SubgroupDescription(h1.generators, h1.order)
    else:
        lifted = g.element(reduced.lift(run.answer.cyclic_d), 1)
        answer = SubgroupDescription(
            h1.generators + (lifted,), h1.order * g.p, cyclic_d=None
        )
    return HSPResult(answer, False, run, f.queries)
