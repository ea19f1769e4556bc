"""Solvers and statistics for the matrix sum problem.

An instance is (x, w) with x a k-tuple over A and w in A; the task is to
find every b in Z_p^k with  sum_j conj_apply(b_j, x_j) = w.  Four solvers
are provided: exhaustive enumeration (the oracle for everything else), a
discrete-log route for Z_N with k = 1, the quadratic closed form for the
Heisenberg group with k = 2, and linear-slice elimination for Z_p^r.
Every specialized solver returns exactly the brute-force solution set.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .caps import CapExceeded, enum_cap, pop_cap
from .groups import (
    CyclicGroup,
    SemidirectGroup,
    VectorGroup,
    conj_apply,
    is_heisenberg,
    msum_table,
)


@dataclass(frozen=True)
class MSumInstance:
    """One matrix sum instance over a fixed group."""

    group: SemidirectGroup
    x: tuple
    w: object

    def __post_init__(self) -> None:
        a = self.group.a_group
        if len(self.x) < 1:
            raise ValueError("instance needs k >= 1 components")
        object.__setattr__(self, "x", tuple(a.reduce(xj) for xj in self.x))
        object.__setattr__(self, "w", a.reduce(self.w))

    @property
    def k(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class SolutionSet:
    """Lexicographically sorted solutions b in Z_p^k and their count eta."""

    solutions: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "solutions", tuple(sorted(self.solutions)))

    @property
    def eta(self) -> int:
        return len(self.solutions)


def instance_residual(inst: MSumInstance, b: tuple[int, ...]):
    """sum_j conj_apply(b_j, x_j) for a candidate b (soundness re-check)."""
    a = inst.group.a_group
    total = a.zero
    for bj, xj in zip(b, inst.x):
        total = a.add(total, conj_apply(bj, xj, inst.group))
    return total


def _component_tables(inst: MSumInstance) -> list[list]:
    """Per-copy tables T_j[b] = conj_apply(b, x_j) for b in [0, p)."""
    g = inst.group
    table = msum_table(g)
    a = g.a_group
    out = []
    for xj in inst.x:
        if isinstance(a, CyclicGroup):
            out.append([(m * xj) % a.n for m in table])
        else:
            out.append(
                [
                    tuple(sum(row[i] * xj[i] for i in range(a.r)) % g.p for row in m)
                    for m in table
                ]
            )
    return out


def solve_bruteforce(inst: MSumInstance, cap: int | None = None) -> SolutionSet:
    """Complete solution set by trying all b in Z_p^k."""
    g = inst.group
    limit = enum_cap(cap)
    if g.p**inst.k > limit:
        raise CapExceeded(f"p^k = {g.p**inst.k} exceeds enumeration cap {limit}")
    tables = _component_tables(inst)
    a = g.a_group
    hits = []
    for b in itertools.product(range(g.p), repeat=inst.k):
        total = a.zero
        for bj, tab in zip(b, tables):
            total = a.add(total, tab[bj])
        if total == inst.w:
            hits.append(b)
    return SolutionSet(tuple(hits))


def solve_all_w(
    g: SemidirectGroup, x: tuple, cap: int | None = None
) -> dict:
    """Map w -> sorted solution list for a fixed x, via one enumeration."""
    inst = MSumInstance(g, tuple(x), g.a_group.zero)
    limit = enum_cap(cap)
    if g.p**inst.k > limit:
        raise CapExceeded(f"p^k = {g.p**inst.k} exceeds enumeration cap {limit}")
    tables = _component_tables(inst)
    a = g.a_group
    buckets: dict = {}
    for b in itertools.product(range(g.p), repeat=inst.k):
        total = a.zero
        for bj, tab in zip(b, tables):
            total = a.add(total, tab[bj])
        buckets.setdefault(total, []).append(b)
    return buckets


# ---------------------------------------------------------------------------
# Discrete-log route (Z_N, k = 1)


def discrete_log_bsgs(base: int, target: int, order: int, modulus: int):
    """Baby-step/giant-step log in the order-`order` subgroup <base> of Z_N^x.

    Returns b in [0, order) with base^b = target (mod modulus), or None.
    """
    if pow(base, order, modulus) != 1:
        raise ValueError(f"base^order != 1 (base={base}, order={order}, mod={modulus})")
    target %= modulus
    m = math.isqrt(order - 1) + 1 if order > 1 else 1
    baby: dict[int, int] = {}
    value = 1
    for j in range(m):
        baby.setdefault(value, j)
        value = (value * base) % modulus
    giant = pow(base, -m, modulus)
    y = target
    for i in range(m):
        j = baby.get(y)
        if j is not None:
            b = (i * m + j) % order
            if pow(base, b, modulus) == target:
                return b
        y = (y * giant) % modulus
    return None


def solve_metacyclic_dlog(inst: MSumInstance, cap: int | None = None) -> SolutionSet:
    """Z_N, k = 1: reduce M^(b) x = w to the discrete log mu^b = 1 + (mu-1) w/x.

    Requires unit x and unit mu - 1; otherwise falls back to brute force.
    The solution, when it exists, is unique.
    """
    g = inst.group
    if not isinstance(g.a_group, CyclicGroup):
        raise ValueError("metacyclic solver needs A = Z_N")
    if inst.k != 1:
        raise ValueError("metacyclic solver needs k = 1")
    n = g.a_group.n
    x, w = inst.x[0], inst.w
    if math.gcd(x, n) != 1 or math.gcd(g.mu - 1, n) != 1:
        return solve_bruteforce(inst, cap)
    target = (1 + (g.mu - 1) * w * pow(x, -1, n)) % n
    b = discrete_log_bsgs(g.mu, target, g.p, n)
    if b is None:
        return SolutionSet(())
    if (msum_table(g)[b] * x) % n != w:
        raise AssertionError("discrete-log route produced an unsound solution")
    return SolutionSet(((b,),))


# ---------------------------------------------------------------------------
# Square roots mod p


def legendre_symbol(a: int, p: int) -> int:
    """0 for a = 0, +1 for nonzero squares, -1 for nonsquares."""
    a %= p
    if a == 0:
        return 0
    s = pow(a, (p - 1) // 2, p)
    return 1 if s == 1 else -1


@lru_cache(maxsize=None)
def _residue_table(p: int) -> dict[int, int]:
    table: dict[int, int] = {}
    for x in range(p):
        table.setdefault(x * x % p, x)
    return table


def sqrt_mod_p(a: int, p: int) -> int:
    """Deterministic square root mod p; raises if a is a nonresidue.

    Table lookup for p < 10^4, Tonelli-Shanks (smallest-nonresidue
    variant) above.
    """
    a %= p
    if p < 10**4:
        root = _residue_table(p).get(a)
        if root is None:
            raise ValueError(f"{a} is not a square mod {p}")
        return root
    if a == 0:
        return 0
    if legendre_symbol(a, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks with the smallest quadratic nonresidue as generator.
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre_symbol(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


# ---------------------------------------------------------------------------
# Heisenberg closed form (k = 2)


def solve_heisenberg_closed_form(
    inst: MSumInstance, cap: int | None = None
) -> SolutionSet:
    """Quadratic closed form for the Heisenberg matrix sum problem.

    With instance columns (x1, y1), (x2, y2) and target (w, v), the
    discriminant decides the count: two solutions for a nonzero square,
    one for zero, none for a nonsquare.  Degenerate denominators
    (y1, y2, or y1 + y2 = 0) fall back to brute force.
    """
    g = inst.group
    if not is_heisenberg(g):
        raise ValueError("closed form needs the Heisenberg group")
    if inst.k != 2:
        raise ValueError("closed form needs k = 2")
    p = g.p
    (x1, y1), (x2, y2) = inst.x
    w, v = inst.w
    if y1 == 0 or y2 == 0 or (y1 + y2) % p == 0:
        return solve_bruteforce(inst, cap)
    delta = (
        (2 * w * y1 + v * y1 - v * v - 2 * v * x1) * (y1 + y2) * y2
        + (v * y2 + x1 * y2 - x2 * y1) ** 2
    ) % p
    if legendre_symbol(delta, p) == -1:
        return SolutionSet(())
    root = sqrt_mod_p(delta, p)
    inv_b1 = pow(y1 * (y1 + y2), -1, p)
    inv_b2 = pow(y2 * (y1 + y2), -1, p)
    t1 = v * y1 + x2 * y1 - x1 * y2
    t2 = v * y2 + x1 * y2 - x2 * y1
    hits = set()
    for sign in (root, (-root) % p):
        b1 = (t1 + sign) * inv_b1 % p
        b2 = (t2 - sign) * inv_b2 % p
        hits.add((b1, b2))
    return SolutionSet(tuple(hits))


# ---------------------------------------------------------------------------
# Jordan elimination (Z_p^r)


def solve_jordan(inst: MSumInstance, cap: int | None = None) -> SolutionSet:
    """Z_p^r solver: use a coordinate linear in b to cut enumeration by p.

    A coordinate i qualifies when conj_apply(b, x_j)[i] = b * c_j for all
    copies; candidates then live on a (k-1)-dimensional slice and are
    checked against the full system.  Without a usable linear coordinate
    this is plain enumeration.
    """
    g = inst.group
    if not isinstance(g.a_group, VectorGroup):
        raise ValueError("jordan solver needs A = Z_p^r")
    p, r, k = g.p, g.a_group.r, inst.k
    limit = enum_cap(cap)
    if p**k > limit:
        raise CapExceeded(f"p^k = {p**k} exceeds enumeration cap {limit}")
    tables = _component_tables(inst)

    pivot = None
    for i in range(r):
        coeffs = [tables[j][1][i] if p > 1 else 0 for j in range(k)]
        linear = all(
            tables[j][b][i] == (b * coeffs[j]) % p
            for j in range(k)
            for b in range(p)
        )
        if not linear:
            continue
        nonzero = [j for j in range(k) if coeffs[j] != 0]
        if nonzero:
            pivot = (i, coeffs, nonzero[0])
            break
        if inst.w[i] != 0:
            return SolutionSet(())

    a = g.a_group
    hits = []
    if pivot is None:
        for b in itertools.product(range(p), repeat=k):
            total = a.zero
            for bj, tab in zip(b, tables):
                total = a.add(total, tab[bj])
            if total == inst.w:
                hits.append(b)
        return SolutionSet(tuple(hits))

    i, coeffs, j0 = pivot
    inv = pow(coeffs[j0], -1, p)
    others = [j for j in range(k) if j != j0]
    for partial in itertools.product(range(p), repeat=k - 1):
        acc = inst.w[i]
        for j, bj in zip(others, partial):
            acc -= coeffs[j] * bj
        bj0 = acc * inv % p
        b = [0] * k
        b[j0] = bj0
        for j, bj in zip(others, partial):
            b[j] = bj
        total = a.zero
        for bj, tab in zip(b, tables):
            total = a.add(total, tab[bj])
        if total == inst.w:
            hits.append(tuple(b))
    return SolutionSet(tuple(hits))


def solve_auto(inst: MSumInstance, cap: int | None = None) -> SolutionSet:
    """Route an instance to the most specific solver for its group shape."""
    g = inst.group
    if isinstance(g.a_group, CyclicGroup) and inst.k == 1:
        return solve_metacyclic_dlog(inst, cap)
    if is_heisenberg(g) and inst.k == 2:
        return solve_heisenberg_closed_form(inst, cap)
    if isinstance(g.a_group, VectorGroup):
        return solve_jordan(inst, cap)
    return solve_bruteforce(inst, cap)


# ---------------------------------------------------------------------------
# Eta statistics


@dataclass(frozen=True)
class EtaStats:
    """Histogram of solution counts over an instance population."""

    counts: dict[int, int]
    population: int
    mode: str  # "exhaustive" | "sampled"
    seed: int | None = None

    @property
    def mean(self) -> Fraction:
        return Fraction(sum(eta * c for eta, c in self.counts.items()), self.population)

    @property
    def variance(self) -> Fraction:
        second = Fraction(
            sum(eta * eta * c for eta, c in self.counts.items()), self.population
        )
        return second - self.mean**2

    def probability_at_least(self, alpha: int) -> Fraction:
        return Fraction(
            sum(c for eta, c in self.counts.items() if eta >= alpha), self.population
        )

    def probability_of(self, eta: int) -> Fraction:
        return Fraction(self.counts.get(eta, 0), self.population)


@lru_cache(maxsize=None)
def _index_tables(g: SemidirectGroup) -> np.ndarray:
    """T[b, xi] = index of conj_apply(b, element(xi)), shape (p, |A|)."""
    a = g.a_group
    out = np.empty((g.p, a.order), dtype=np.int64)
    for xi, x in enumerate(a.elements()):
        for b in range(g.p):
            out[b, xi] = a.index(conj_apply(b, x, g))
    return out


@lru_cache(maxsize=None)
def _add_index_table(g: SemidirectGroup) -> np.ndarray:
    """ADD[i, j] = index of element(i) + element(j), shape (|A|, |A|)."""
    a = g.a_group
    if isinstance(a, CyclicGroup):
        idx = np.arange(a.n, dtype=np.int64)
        return (idx[:, None] + idx[None, :]) % a.n
    elems = list(a.elements())
    out = np.empty((a.order, a.order), dtype=np.int64)
    for i, u in enumerate(elems):
        for j, v in enumerate(elems):
            out[i, j] = a.index(a.add(u, v))
    return out


@lru_cache(maxsize=None)
def _b_grid(p: int, k: int) -> np.ndarray:
    return np.indices((p,) * k).reshape(k, -1)


def _image_indices(g: SemidirectGroup, x_indices) -> np.ndarray:
    """Indices of sum_j conj_apply(b_j, x_j) over the full b-grid (p^k,)."""
    tab = _index_tables(g)
    add = _add_index_table(g)
    grids = _b_grid(g.p, len(x_indices))
    images = tab[grids[0], x_indices[0]]
    for j in range(1, len(x_indices)):
        images = add[images, tab[grids[j], x_indices[j]]]
    return images


def eta_statistics(
    g: SemidirectGroup,
    k: int,
    mode: str = "exhaustive",
    samples: int | None = None,
    seed: int | None = None,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> EtaStats:
    """Exact (exhaustive) or sampled histogram of eta over (x, w) pairs."""
    a = g.a_group
    if g.p**k > enum_cap(enumeration_cap):
        raise CapExceeded(f"p^k = {g.p**k} exceeds enumeration cap")
    if mode == "exhaustive":
        population = a.order ** (k + 1)
        limit = pop_cap(cap)
        if population > limit:
            raise CapExceeded(f"population {population} exceeds cap {limit}")
        hist = np.zeros(g.p**k + 1, dtype=np.int64)
        for xi in itertools.product(range(a.order), repeat=k):
            counts = np.bincount(_image_indices(g, xi), minlength=a.order)
            hist += np.bincount(counts, minlength=hist.size)
        counts_map = {int(eta): int(c) for eta, c in enumerate(hist) if c}
        return EtaStats(counts_map, population, "exhaustive")
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode requires a seed")
        if not samples or samples < 1:
            raise ValueError("sampled mode requires a positive sample count")
        rng = random.Random(seed)
        tally: dict[int, int] = {}
        for _ in range(samples):
            xi = tuple(rng.randrange(a.order) for _ in range(k))
            wi = rng.randrange(a.order)
            eta = int(np.count_nonzero(_image_indices(g, xi) == wi))
            tally[eta] = tally.get(eta, 0) + 1
        return EtaStats(tally, samples, "sampled", seed)
    raise ValueError(f"unknown mode {mode!r}")


def heisenberg_eta_distribution(p: int) -> dict[int, Fraction]:
    """Exhaustive eta distribution over Heisenberg k=2 instances with
    y1, y2, y1+y2 all nonzero, counted by direct enumeration."""
    from .groups import heisenberg_group

    g = heisenberg_group(p)
    a = g.a_group
    hist = np.zeros(p**2 + 1, dtype=np.int64)
    for y1 in range(1, p):
        for y2 in range(1, p):
            if (y1 + y2) % p == 0:
                continue
            for x1 in range(p):
                for x2 in range(p):
                    xi = (a.index((x1, y1)), a.index((x2, y2)))
                    counts = np.bincount(_image_indices(g, xi), minlength=a.order)
                    hist += np.bincount(counts, minlength=hist.size)
    total = int(hist.sum())
    return {int(i): Fraction(int(c), total) for i, c in enumerate(hist) if c}
