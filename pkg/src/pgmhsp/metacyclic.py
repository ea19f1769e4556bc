"""Statevector simulation of the single-copy metacyclic algorithm.

The run over Z_N x| Z_p: prepare a coset state, Fourier transform over
Z_N, measure the label x (uniform), reject non-unit x, compute x*M^(b)
into an ancilla, erase b through the discrete-log round trip
b -> x*M^(b) -> mu^b -> b, inverse Fourier transform, and observe.  For
every accepted x the observation lands on d with probability exactly
p/N, giving an overall success rate of phi(N) * p / N^2.

Requires gcd(mu - 1, N) = 1 so the erasure identity
(mu - 1) M^(b) = mu^b - 1 determines b from x*M^(b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import SemidirectGroup, matrix_sum, msum_table, semidirect_zn
from .msum import discrete_log_bsgs

WILSON_Z_99 = 2.5758293035489004


def _validate(n: int, p: int, mu: int) -> SemidirectGroup:
    g = semidirect_zn(n, p, mu)
    if math.gcd(mu - 1, n) != 1:
        raise ValueError(
            f"erasure step needs gcd(mu - 1, N) = 1, got mu={mu}, N={n}"
        )
    if matrix_sum(p, g) != 0:
        raise AssertionError("M^(p) != 0 despite unit mu - 1")
    return g


def repeated_squaring_msum(b: int, mu: int, n: int) -> int:
    """M^(b) mod N via the doubling identity M^(2b) = (1 + mu^b) M^(b)."""
    if b == 0:
        return 0
    half = repeated_squaring_msum(b // 2, mu, n)
    value = ((1 + pow(mu, b // 2, n)) * half) % n
    if b % 2:
        value = (1 + mu * value) % n  # M^(b+1) = 1 + mu * M^(b)
    return value


def _qft(n: int) -> np.ndarray:
    idx = np.arange(n)
    return np.exp(2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


@dataclass
class SimTranscript:
    """Every intermediate state of one run, plus the measurement record."""

    n: int
    p: int
    mu: int
    d: int
    ell: int
    steps: dict[str, np.ndarray] = field(default_factory=dict)
    measured_x: int | None = None
    accepted: bool = False
    final_distribution: np.ndarray | None = None
    measured_outcome: int | None = None
    success: bool | None = None


def run_stripped_algorithm(
    n: int,
    p: int,
    mu: int,
    d: int,
    ell: int,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> SimTranscript:
    g = _validate(n, p, mu)
    d %= n
    ell %= n
    if rng is None:
        rng = np.random.default_rng(seed)
    table = msum_table(g)
    t = SimTranscript(n, p, mu, d, ell)

    # Coset state over (a, b) with index a*p + b.
    psi = np.zeros(n * p, dtype=complex)
    for b in range(p):
        psi[((ell + table[b] * d) % n) * p + b] = 1 / math.sqrt(p)
    t.steps["coset"] = psi

    # Fourier transform the first register.
    f_n = _qft(n)
    psi = (np.kron(f_n, np.eye(p)) @ psi).reshape(n * p)
    t.steps["post_qft"] = psi

    # Measure x: marginal over the second register.
    marginal = np.abs(psi.reshape(n, p)) ** 2
    px = marginal.sum(axis=1)
    x = int(rng.choice(n, p=px / px.sum()))
    t.measured_x = x
    collapsed = np.zeros_like(psi)
    collapsed[x * p : (x + 1) * p] = psi[x * p : (x + 1) * p]
    collapsed /= np.linalg.norm(collapsed)
    t.steps["post_measurement"] = collapsed
    if math.gcd(x, n) != 1:
        t.accepted = False
        t.success = False
        return t
    t.accepted = True

    # Drop the measured register; compute |b, x M^(b)> on (b, ancilla).
    b_state = collapsed.reshape(n, p)[x]
    joint = np.zeros(p * n, dtype=complex)
    values = []
    for b in range(p):
        value = (x * repeated_squaring_msum(b, mu, n)) % n
        values.append(value)
        joint[b * n + value] = b_state[b]
    t.steps["post_compute"] = joint

    # Erase b: recover it from the ancilla through mu^b = 1 + (mu-1) M^(b).
    erased = np.zeros(n, dtype=complex)
    for b, value in enumerate(values):
        power = (1 + (mu - 1) * value * pow(x, -1, n)) % n
        recovered = discrete_log_bsgs(mu, power, p, n)
        if recovered != b:
            raise AssertionError(f"erasure round trip failed at b={b}")
        erased[value] = joint[b * n + value]
    t.steps["post_erasure"] = erased

    # Inverse Fourier transform and observe.
    final = f_n.conj().T @ erased
    t.steps["post_inverse_qft"] = final
    dist = np.abs(final) ** 2
    t.final_distribution = dist
    outcome = int(rng.choice(n, p=dist / dist.sum()))
    t.measured_outcome = outcome
    t.success = outcome == d
    return t


def perfect_state_overlap(n: int, p: int, mu: int, d: int, x: int) -> float:
    """|<d~|actual>| for an accepted x; equals sqrt(p/N) when the p
    ancilla values x*M^(b) are distinct."""
    g = _validate(n, p, mu)
    if math.gcd(x, n) != 1:
        raise ValueError(f"x={x} is not a unit mod {n}")
    d %= n
    table = msum_table(g)
    values = [(x * table[b]) % n for b in range(p)]
    if len(set(values)) != p:
        raise AssertionError("ancilla values collide despite unit mu - 1")
    actual = np.zeros(n, dtype=complex)
    omega = np.exp(2j * np.pi / n)
    for b, value in enumerate(values):
        actual[value] = omega ** (value * d) / math.sqrt(p)
    perfect = np.array([omega ** (j * d) for j in range(n)]) / math.sqrt(n)
    return float(abs(np.vdot(perfect, actual)))


def exact_success_rate(n: int, p: int, mu: int) -> Fraction:
    """Full-branch aggregation over ell, measured x, and the outcome.

    Each accepted branch succeeds with probability exactly p/N (the
    integer phase exponents at outcome d all vanish); rejected branches
    contribute zero.  Aggregates to phi(N) * p / N^2.
    """
    g = _validate(n, p, mu)
    table = msum_table(g)
    total = Fraction(0)
    branch_weight = Fraction(1, n * n)  # uniform ell times uniform measured x
    for ell in range(n):
        for x in range(n):
            if math.gcd(x, n) != 1:
                continue
            # Amplitude at outcome d carries exponents x*M^(b)*(d-d) = 0.
            exponents = {(x * table[b] * 0) % n for b in range(p)}
            if exponents != {0}:
                raise AssertionError("phase cancellation failed at outcome d")
            total += branch_weight * Fraction(p, n)
    return total


def success_bound(n: int, p: int) -> Fraction:
    """phi(N) * p / N^2."""
    phi = sum(1 for x in range(1, n + 1) if math.gcd(x, n) == 1)
    return Fraction(phi * p, n * n)


def wilson_interval(
    successes: int, trials: int, z: float = WILSON_Z_99
) -> tuple[float, float]:
    if trials == 0:
        raise ValueError("Wilson interval needs at least one trial")
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return center - half, center + half


@dataclass(frozen=True)
class SuccessEstimate:
    n: int
    p: int
    mu: int
    trials: int
    successes: int
    rate: float | None
    interval: tuple[float, float] | None
    bound: Fraction
    passed: bool | None
    seed: int | None
    trial_records: tuple[dict, ...] = ()


def estimate_success_rate(
    n: int, p: int, mu: int, trials: int, seed: int, collect: bool = False
) -> SuccessEstimate:
    """Monte Carlo success frequency over uniform (d, ell) with a 99%
    Wilson interval; passes when the interval's upper edge clears the
    phi(N) p / N^2 bound.  Zero trials make no claim.  With ``collect``
    the per-trial records are kept for transcript emission."""
    g = _validate(n, p, mu)
    bound = success_bound(n, p)
    if trials == 0:
        return SuccessEstimate(n, p, mu, 0, 0, None, None, bound, None, seed)
    rng = np.random.default_rng(seed)
    from .groups import subgroup_order

    valid_d = [d for d in range(n) if subgroup_order(d, g) == p]
    if len(valid_d) != n:
        raise AssertionError("some d fails to generate an order-p subgroup")
    successes = 0
    records = []
    for trial in range(trials):
        d = valid_d[int(rng.integers(len(valid_d)))]
        ell = int(rng.integers(n))
        t = run_stripped_algorithm(n, p, mu, d, ell, rng=rng)
        successes += bool(t.success)
        if collect:
            records.append(
                {
                    "trial": trial,
                    "d": d,
                    "ell": ell,
                    "measured_x": t.measured_x,
                    "accepted": t.accepted,
                    "outcome": t.measured_outcome,
                    "success": bool(t.success),
                }
            )
    rate = successes / trials
    interval = wilson_interval(successes, trials)
    return SuccessEstimate(
        n, p, mu, trials, successes, rate, interval, bound,
        interval[1] >= bound, seed, tuple(records),
    )
