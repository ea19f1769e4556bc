"""Exact arithmetic for semidirect products G = A x| Z_p.

Two abelian families are supported for A:

  * ``CyclicGroup(n)``   -- Z_N, elements are ints in [0, N);
  * ``VectorGroup(p, r)`` -- Z_p^r, elements are length-r int tuples.

The automorphism of A is stored by the datum ``mu`` (a scalar for Z_N, an
r x r matrix for Z_p^r).  Convention: the stored matrix is the one acting
on *character labels*, i.e. the conjugate sum satisfies
``conj_apply(b, x) = matrix_sum(b) @ x``, while the action on group
elements goes through the transpose (for Z_N the two coincide).  All the
Fourier-side machinery (matrix sum problem, PGM blocks) consumes the
stored matrix directly.

Everything here is a pure function of immutable values; instances are
frozen dataclasses and safe to share across threads.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Matrix = tuple[tuple[int, ...], ...]

_TRIAL_DIVISION_LIMIT = 10**6


def is_prime(n: int) -> bool:
    """Deterministic trial division; desk scale only (n <= 10^12)."""
    if n > _TRIAL_DIVISION_LIMIT**2:
        raise ValueError(f"primality test supports n <= 10^12, got {n}")
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


# ---------------------------------------------------------------------------
# Abelian component


@dataclass(frozen=True)
class CyclicGroup:
    """Additive group Z_N, N >= 2.  Element index equals the element."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"cyclic modulus must be >= 2, got {self.n}")

    @property
    def order(self) -> int:
        return self.n

    @property
    def zero(self) -> int:
        return 0

    def reduce(self, a: int) -> int:
        return a % self.n

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.n

    def neg(self, a: int) -> int:
        return (-a) % self.n

    def elements(self) -> range:
        return range(self.n)

    def index(self, a: int) -> int:
        return a % self.n

    def element(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"element index {i} out of range for Z_{self.n}")
        return i

    def char_exponent(self, x: int, y: int) -> Fraction:
        return Fraction((x * y) % self.n, self.n)

    @property
    def char_denominator(self) -> int:
        return self.n

    def char_index(self, x: int, y: int) -> int:
        """Numerator t of the phase t/denominator for chi_x(y)."""
        return (x * y) % self.n


@dataclass(frozen=True)
class VectorGroup:
    """Additive group Z_p^r with p prime.  Index order is lexicographic."""

    p: int
    r: int

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"vector-group modulus must be prime, got {self.p}")
        if self.r < 1:
            raise ValueError(f"vector-group rank must be >= 1, got {self.r}")

    @property
    def order(self) -> int:
        return self.p**self.r

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.r

    def reduce(self, a) -> tuple[int, ...]:
        if len(a) != self.r:
            raise ValueError(f"expected length-{self.r} vector, got {a!r}")
        return tuple(c % self.p for c in a)

    def add(self, a, b) -> tuple[int, ...]:
        return tuple((u + v) % self.p for u, v in zip(a, b))

    def neg(self, a) -> tuple[int, ...]:
        return tuple((-u) % self.p for u in a)

    def elements(self):
        return itertools.product(range(self.p), repeat=self.r)

    def index(self, a) -> int:
        i = 0
        for c in a:
            i = i * self.p + c % self.p
        return i

    def element(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.order:
            raise IndexError(f"element index {i} out of range for Z_{self.p}^{self.r}")
        digits = []
        for _ in range(self.r):
            i, c = divmod(i, self.p)
            digits.append(c)
        return tuple(reversed(digits))

    def char_exponent(self, x, y) -> Fraction:
        return Fraction(sum(u * v for u, v in zip(x, y)) % self.p, self.p)

    @property
    def char_denominator(self) -> int:
        return self.p

    def char_index(self, x, y) -> int:
        return sum(u * v for u, v in zip(x, y)) % self.p


AbelianGroup = CyclicGroup | VectorGroup


# ---------------------------------------------------------------------------
# Matrices over Z_p (used only for the vector family; r is small)


def mat_identity(r: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(r)) for i in range(r))


def mat_mul(a: Matrix, b: Matrix, p: int) -> Matrix:
    r = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(r)) % p for j in range(r))
        for i in range(r)
    )


def mat_add(a: Matrix, b: Matrix, p: int) -> Matrix:
    return tuple(
        tuple((u + v) % p for u, v in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_pow(a: Matrix, e: int, p: int) -> Matrix:
    result = mat_identity(len(a))
    base = a
    while e:
        if e & 1:
            result = mat_mul(result, base, p)
        base = mat_mul(base, base, p)
        e >>= 1
    return result


def mat_vec(a: Matrix, v, p: int) -> tuple[int, ...]:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) % p for row in a)


def mat_transpose(a: Matrix) -> Matrix:
    return tuple(tuple(row[i] for row in a) for i in range(len(a[0])))


def _mat_rank(a: Matrix, p: int) -> int:
    rows = [list(row) for row in a]
    r = len(rows)
    rank = 0
    for col in range(r):
        pivot = next((i for i in range(rank, r) if rows[i][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(c * inv) % p for c in rows[rank]]
        for i in range(r):
            if i != rank and rows[i][col] % p:
                factor = rows[i][col]
                rows[i] = [(c - factor * d) % p for c, d in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def unipotent_block_sizes(g: "SemidirectGroup") -> tuple[int, ...]:
    """Jordan block sizes of the stored matrix, largest first.

    Any mu with mu^p = I over Z_p is unipotent ((mu - I)^p = 0), so the
    block structure is read off the rank sequence of the nilpotent part.
    """
    a = g.a_group
    if not isinstance(a, VectorGroup):
        raise TypeError("block sizes are defined for the vector family only")
    nilpotent = tuple(
        tuple((c - (1 if i == j else 0)) % g.p for j, c in enumerate(row))
        for i, row in enumerate(g.mu)
    )
    ranks = [a.r]
    power = mat_identity(a.r)
    while ranks[-1] > 0:
        power = mat_mul(power, nilpotent, g.p)
        ranks.append(_mat_rank(power, g.p))
    sizes = []
    for s in range(1, len(ranks)):
        count = (ranks[s - 1] - ranks[s]) - (ranks[s] - ranks[s + 1] if s < len(ranks) - 1 else 0)
        sizes.extend([s] * count)
    sizes.sort(reverse=True)
    return tuple(sizes)


def jordan_canonical_group(g: "SemidirectGroup") -> "SemidirectGroup":
    """The isomorphic group whose stored matrix is in Jordan form."""
    return semidirect_jordan(g.p, unipotent_block_sizes(g))


def jordan_matrix(p: int, block_sizes: tuple[int, ...] | list[int]) -> Matrix:
    """Unipotent Jordan-form matrix with the given block sizes, mod p."""
    sizes = tuple(int(s) for s in block_sizes)
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError(f"block sizes must be positive, got {block_sizes}")
    r = sum(sizes)
    rows = [[0] * r for _ in range(r)]
    offset = 0
    for s in sizes:
        for i in range(s):
            rows[offset + i][offset + i] = 1
            if i + 1 < s:
                rows[offset + i][offset + i + 1] = 1
        offset += s
    return tuple(tuple(row) for row in rows)


# ---------------------------------------------------------------------------
# The semidirect product


@dataclass(frozen=True)
class GroupElement:
    """Element (a, b) of A x| Z_p; ``a`` reduced in A, 0 <= b < p."""

    a: object
    b: int


@dataclass(frozen=True)
class SemidirectGroup:
    """G = A x| Z_p with the automorphism datum ``mu``.

    For Z_N: ``mu`` is a unit scalar with mu^p = 1 (mod N).
    For Z_p^r: ``mu`` is an invertible matrix with mu^p = I (mod p),
    stored in the character-label convention described in the module
    docstring.
    """

    a_group: AbelianGroup
    p: int
    mu: object

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        a = self.a_group
        if isinstance(a, CyclicGroup):
            mu = self.mu
            if not isinstance(mu, int):
                raise TypeError("cyclic family needs an integer mu")
            mu %= a.n
            object.__setattr__(self, "mu", mu)
            if math.gcd(mu, a.n) != 1:
                raise ValueError(f"mu={mu} is not a unit mod {a.n}")
            if pow(mu, self.p, a.n) != 1:
                raise ValueError(f"mu={mu} does not satisfy mu^{self.p} = 1 mod {a.n}")
        elif isinstance(a, VectorGroup):
            if a.p != self.p:
                raise ValueError(
                    f"vector family requires matching primes, got A over {a.p} and p={self.p}"
                )
            mu = tuple(tuple(int(c) % self.p for c in row) for row in self.mu)
            if len(mu) != a.r or any(len(row) != a.r for row in mu):
                raise ValueError(f"mu must be a {a.r}x{a.r} matrix")
            object.__setattr__(self, "mu", mu)
            if mat_pow(mu, self.p, self.p) != mat_identity(a.r):
                raise ValueError(
                    f"mu must be invertible with mu^{self.p} = I mod {self.p}"
                )
        else:
            raise TypeError(f"unsupported abelian component {a!r}")

    @property
    def order(self) -> int:
        return self.a_group.order * self.p

    @property
    def identity(self) -> GroupElement:
        return GroupElement(self.a_group.zero, 0)

    def element(self, a, b: int) -> GroupElement:
        return GroupElement(self.a_group.reduce(a), b % self.p)


def semidirect_zn(n: int, p: int, mu: int) -> SemidirectGroup:
    return SemidirectGroup(CyclicGroup(n), p, mu)


def semidirect_zpr(p: int, mu) -> SemidirectGroup:
    mu = tuple(tuple(row) for row in mu)
    return SemidirectGroup(VectorGroup(p, len(mu)), p, mu)


def semidirect_jordan(p: int, block_sizes) -> SemidirectGroup:
    return semidirect_zpr(p, jordan_matrix(p, block_sizes))


def heisenberg_group(p: int) -> SemidirectGroup:
    """The nontrivial Z_p^2 x| Z_p (single 2x2 unipotent Jordan block)."""
    return semidirect_jordan(p, (2,))


def is_heisenberg(g: SemidirectGroup) -> bool:
    return (
        isinstance(g.a_group, VectorGroup)
        and g.a_group.r == 2
        and g.mu == ((1, 1), (0, 1))
    )


# ---------------------------------------------------------------------------
# Automorphism action and the summed maps


def phi_apply(a, g: SemidirectGroup, power: int = 1):
    """phi^power acting on an element of A (the group-side action)."""
    ag = g.a_group
    if isinstance(ag, CyclicGroup):
        return (pow(g.mu, power % g.p, ag.n) * a) % ag.n
    m = mat_pow(mat_transpose(g.mu), power % g.p, g.p)
    return mat_vec(m, a, g.p)


def element_mul(x: GroupElement, y: GroupElement, g: SemidirectGroup) -> GroupElement:
    """(a,b)(a',b') = (a + phi^b(a'), b + b')."""
    return GroupElement(
        g.a_group.add(x.a, phi_apply(y.a, g, x.b)), (x.b + y.b) % g.p
    )


def element_inv(x: GroupElement, g: SemidirectGroup) -> GroupElement:
    """(a,b)^(-1) = (phi^(-b)(-a), -b)."""
    return GroupElement(
        phi_apply(g.a_group.neg(x.a), g, (-x.b) % g.p), (-x.b) % g.p
    )


def element_pow(x: GroupElement, e: int, g: SemidirectGroup) -> GroupElement:
    result = g.identity
    for _ in range(e):
        result = element_mul(result, x, g)
    return result


def matrix_sum(b: int, g: SemidirectGroup):
    """The literal sum M^(b) = sum_{i<b} mu^i of the stored datum.

    Scalar mod N for the cyclic family, matrix mod p for the vector
    family; M^(0) is the zero map.  For a unipotent Jordan block the
    (i, j) entry is binom(b, j-i+1) mod p.
    """
    if b < 0:
        raise ValueError(f"matrix_sum needs b >= 0, got {b}")
    ag = g.a_group
    if isinstance(ag, CyclicGroup):
        total, power = 0, 1
        for _ in range(b):
            total = (total + power) % ag.n
            power = (power * g.mu) % ag.n
        return total
    total = tuple(tuple(0 for _ in range(ag.r)) for _ in range(ag.r))
    power = mat_identity(ag.r)
    for _ in range(b):
        total = mat_add(total, power, g.p)
        power = mat_mul(power, g.mu, g.p)
    return total


def conjugate_matrix_sum(b: int, g: SemidirectGroup):
    """Representation of the conjugate sum acting on character labels.

    Under the storage convention this coincides with ``matrix_sum`` for
    both supported families; it is the object satisfying
    chi_x(phi_sum(b, d)) = chi_{conj_apply(b, x)}(d).
    """
    if not isinstance(g.a_group, (CyclicGroup, VectorGroup)):
        raise TypeError(f"unsupported abelian component {g.a_group!r}")
    return matrix_sum(b, g)


@lru_cache(maxsize=None)
def msum_table(g: SemidirectGroup) -> tuple:
    """M^(b) for b = 0..p-1, cached per group."""
    return tuple(matrix_sum(b, g) for b in range(g.p))


def phi_sum(b: int, a, g: SemidirectGroup):
    """Phi^(b)(a) = sum_{i<b} phi^i(a), so that (a,1)^b = (Phi^(b)(a), b mod p)."""
    m = matrix_sum(b, g)
    ag = g.a_group
    if isinstance(ag, CyclicGroup):
        return (m * a) % ag.n
    return mat_vec(mat_transpose(m), a, g.p)


def conj_apply(b: int, x, g: SemidirectGroup):
    """The conjugate sum applied to a character label x."""
    m = msum_table(g)[b % g.p] if 0 <= b < g.p else matrix_sum(b, g)
    ag = g.a_group
    if isinstance(ag, CyclicGroup):
        return (m * x) % ag.n
    return mat_vec(m, x, g.p)


def subgroup_order(d, g: SemidirectGroup) -> int:
    """Order of the cyclic subgroup generated by (d, 1), by iteration."""
    gen = g.element(d, 1)
    current = gen
    order = 1
    while current != g.identity:
        current = element_mul(current, gen, g)
        order += 1
        if order > g.order:
            raise AssertionError("subgroup order exceeded |G|; invalid group data")
    return order


# ---------------------------------------------------------------------------
# Characters


@dataclass(frozen=True)
class PhaseValue:
    """Exact unit phase exp(2*pi*i * exponent) with rational exponent in [0, 1)."""

    exponent: Fraction

    @staticmethod
    def of(t: int, m: int) -> "PhaseValue":
        return PhaseValue(Fraction(t, m) % 1)

    def __mul__(self, other: "PhaseValue") -> "PhaseValue":
        return PhaseValue((self.exponent + other.exponent) % 1)

    def conjugate(self) -> "PhaseValue":
        return PhaseValue((-self.exponent) % 1)

    @property
    def value(self) -> complex:
        import cmath

        return cmath.exp(2j * cmath.pi * float(self.exponent))


def character_eval(x, y, a_group: AbelianGroup) -> PhaseValue:
    """chi_x(y): exp(2*pi*i*x*y/N) for Z_N, exp(2*pi*i*(x.y)/p) for Z_p^r."""
    return PhaseValue(a_group.char_exponent(x, y))


# ---------------------------------------------------------------------------
# Group enumeration and index conventions


def group_elements(g: SemidirectGroup):
    """All of G in index order (A index major, Z_p index minor)."""
    for a in g.a_group.elements():
        for b in range(g.p):
            yield GroupElement(a, b)


def element_index(x: GroupElement, g: SemidirectGroup) -> int:
    return g.a_group.index(x.a) * g.p + x.b


def element_from_index(i: int, g: SemidirectGroup) -> GroupElement:
    ai, b = divmod(i, g.p)
    return GroupElement(g.a_group.element(ai), b)


# ---------------------------------------------------------------------------
# One-line group-spec grammar


def parse_group_spec(line: str) -> SemidirectGroup:
    """Parse ``zn N=.. p=.. mu=..`` / ``zpr p=.. r=.. mu=..`` / ``zpr p=.. jordan=..``."""
    tokens = line.split()
    if not tokens:
        raise ValueError("empty group spec")
    family, kv = tokens[0], {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"malformed token {tok!r} in group spec {line!r}")
        key, value = tok.split("=", 1)
        if key in kv:
            raise ValueError(f"duplicate key {key!r} in group spec {line!r}")
        kv[key] = value
    try:
        if family == "zn":
            return semidirect_zn(int(kv.pop("N")), int(kv.pop("p")), int(kv.pop("mu")))
        if family == "zpr":
            p = int(kv.pop("p"))
            if "jordan" in kv:
                sizes = tuple(int(s) for s in kv.pop("jordan").split(","))
                group = semidirect_jordan(p, sizes)
            else:
                r = int(kv.pop("r"))
                rows = kv.pop("mu").split(";")
                if len(rows) != r:
                    raise ValueError(f"mu must have {r} rows")
                mu = tuple(tuple(int(c) for c in row.split(",")) for row in rows)
                if any(len(row) != r for row in mu):
                    raise ValueError(f"mu rows must have {r} entries")
                group = semidirect_zpr(p, mu)
            if kv:
                raise ValueError(f"unexpected keys {sorted(kv)} in group spec {line!r}")
            return group
    except KeyError as exc:
        raise ValueError(f"missing key {exc.args[0]!r} in group spec {line!r}") from None
    raise ValueError(f"unknown group family {family!r} (expected zn or zpr)")


def format_group_spec(g: SemidirectGroup) -> str:
    ag = g.a_group
    if isinstance(ag, CyclicGroup):
        return f"zn N={ag.n} p={g.p} mu={g.mu}"
    rows = ";".join(",".join(str(c) for c in row) for row in g.mu)
    return f"zpr p={g.p} r={ag.r} mu={rows}"
