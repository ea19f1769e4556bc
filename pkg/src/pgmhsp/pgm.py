"""The pretty good measurement: construction, success probability,
optimality check, and the Neumark block implementation.

The PGM for the k-copy ensemble is block diagonal over x in A^k; each
block element is the rank-one projector onto
|e^x_j> = |A|^(-1/2) sum_w chi_w(j) |S^x_w>.  The ensemble sum is
diagonal in the (x, S^x_w) basis, so its inverse square root is written
down directly rather than through a generic matrix function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .caps import CapExceeded, enum_cap
from .groups import SemidirectGroup
from .msum import EtaStats, eta_statistics
from .states import (
    BlockDecomposition,
    _block_state_vector,
    _phase_roots,
    a_tuple_from_index,
    block_decomposition,
    check_dim,
    qft_matrix,
)

PSD_TOL = 1e-9
UNITARITY_TOL = 1e-10
OPTIMALITY_TOL = 1e-8


@dataclass(frozen=True)
class POVM:
    """Block-diagonal POVM over outcomes j in A.

    ``block_matrices[xi]`` stacks the x-block of every element, shape
    (|A|, p^k, p^k).  For the PGM proper, ``block_vectors[xi]`` holds the
    rank-one vectors |e^x_j> as rows (None after perturbation).
    """

    group: SemidirectGroup
    k: int
    block_matrices: tuple[np.ndarray, ...]
    block_vectors: tuple[np.ndarray, ...] | None = None

    @property
    def outcomes(self) -> int:
        return self.group.a_group.order

    def dense_element(self, j) -> np.ndarray:
        """Assemble E_j as a dense |G|^k x |G|^k matrix."""
        g = self.group
        ji = g.a_group.index(g.a_group.reduce(j))
        pk = g.p**self.k
        dim = g.order**self.k
        out = np.zeros((dim, dim), dtype=complex)
        for xi, stack in enumerate(self.block_matrices):
            lo = xi * pk
            out[lo : lo + pk, lo : lo + pk] = stack[ji]
        return out


def build_pgm(
    k: int,
    g: SemidirectGroup,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> POVM:
    """PGM elements from the explicit character formula on each block."""
    check_dim(g, k, cap)
    dec = block_decomposition(g, k, enumeration_cap)
    a = g.a_group
    roots = _phase_roots(a.char_denominator)
    pk = g.p**k
    elems = list(a.elements())
    vectors = []
    matrices = []
    for xi in range(a.order**k):
        vecs = np.zeros((a.order, pk), dtype=complex)
        for ji, j in enumerate(elems):
            for w, b_idx, eta in dec.blocks[xi]:
                vecs[ji, list(b_idx)] = roots[a.char_index(w, j)] / math.sqrt(
                    a.order * eta
                )
        vectors.append(vecs)
        matrices.append(np.einsum("ja,jb->jab", vecs, vecs.conj()))
    return POVM(g, k, tuple(matrices), tuple(vectors))


def pgm_from_inverse_sqrt(
    k: int,
    g: SemidirectGroup,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> list[np.ndarray]:
    """Independent route: E_j = Sigma^(-1/2) rho_j Sigma^(-1/2) with the
    inverse square root taken over the support via eigendecomposition."""
    from .states import ensemble_sigma, hidden_subgroup_state

    sigma = ensemble_sigma(k, g, cap, enumeration_cap)
    vals, vecs = np.linalg.eigh(sigma)
    inv_sqrt = np.zeros_like(vals)
    nonzero = vals > 1e-12
    inv_sqrt[nonzero] = 1.0 / np.sqrt(vals[nonzero])
    s_inv = (vecs * inv_sqrt) @ vecs.conj().T
    out = []
    for j in g.a_group.elements():
        rho, _ = hidden_subgroup_state(j, k, g, cap, enumeration_cap)
        out.append(s_inv @ rho @ s_inv)
    return out


def perturb_with_uniform(povm: POVM, eps: float) -> POVM:
    """Mix every element with the uniform POVM on the ensemble support.

    Keeps completeness but destroys optimality; used as the negative
    control for the optimality check.
    """
    dec = block_decomposition(povm.group, povm.k)
    a = povm.group.a_group
    pk = povm.group.p**povm.k
    matrices = []
    for xi, stack in enumerate(povm.block_matrices):
        proj = np.zeros((pk, pk), dtype=complex)
        for _w, b_idx, eta in dec.blocks[xi]:
            ix = np.asarray(b_idx)
            proj[np.ix_(ix, ix)] += 1.0 / eta
        matrices.append((1 - eps) * stack + (eps / a.order) * proj[None, :, :])
    return POVM(povm.group, povm.k, tuple(matrices), None)


# ---------------------------------------------------------------------------
# Success probability


def _eta_table(dec: BlockDecomposition, xi: int) -> list[int]:
    return [eta for _w, _b, eta in dec.blocks[xi]]


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = c^2 * s with s squarefree; returns (c, s)."""
    c, s, d = 1, 1, 2
    while d * d <= n:
        while n % (d * d) == 0:
            n //= d * d
            c *= d
        d += 1
    return c, s * n


def success_probability_formula(
    k: int,
    g: SemidirectGroup,
    enumeration_cap: int | None = None,
) -> Fraction | float:
    """Pr(success) = (p / |G|^(k+1)) sum_x (sum_w sqrt(eta^x_w))^2.

    Exact Fraction when every block sum squares to a rational (the etas
    of each block share one squarefree part), float otherwise.
    """
    a = g.a_group
    if g.p**k > enum_cap(enumeration_cap):
        raise CapExceeded(f"p^k = {g.p**k} exceeds enumeration cap")
    dec = block_decomposition(g, k, enumeration_cap)
    exact_total = Fraction(0)
    float_total = 0.0
    all_exact = True
    for xi in range(a.order**k):
        etas = _eta_table(dec, xi)
        parts = [_squarefree_split(eta) for eta in etas]
        if len({s for _c, s in parts}) <= 1:
            s = parts[0][1] if parts else 1
            exact_total += Fraction(sum(c for c, _s in parts)) ** 2 * s
        else:
            all_exact = False
        float_total += sum(math.sqrt(eta) for eta in etas) ** 2
    scale = Fraction(g.p, g.order ** (k + 1))
    if all_exact:
        return scale * exact_total
    return float(scale) * float_total


def success_probability_trace(
    k: int,
    g: SemidirectGroup,
    d,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> float:
    """tr(E_d rho_d^(x)k) through dense matrices."""
    from .states import hidden_subgroup_state

    povm = build_pgm(k, g, cap, enumeration_cap)
    rho, _ = hidden_subgroup_state(d, k, g, cap, enumeration_cap)
    value = np.trace(povm.dense_element(d) @ rho)
    if abs(value.imag) > 1e-10:
        raise AssertionError(f"trace has non-negligible imaginary part {value.imag}")
    return float(value.real)


def outcome_distribution(
    k: int,
    g: SemidirectGroup,
    d,
    enumeration_cap: int | None = None,
) -> np.ndarray:
    """Exact outcome probabilities tr(E_j rho_d^(x)k) over j in A-index order.

    Blockwise: Pr(j) = (1/(|G|^k |A|)) sum_x |sum_w chi_w(d - j) sqrt(eta)|^2.
    """
    a = g.a_group
    dec = block_decomposition(g, k, enumeration_cap)
    roots = _phase_roots(a.char_denominator)
    d = a.reduce(d)
    elems = list(a.elements())
    probs = np.zeros(a.order)
    for xi in range(a.order**k):
        block = dec.blocks[xi]
        for ji, j in enumerate(elems):
            c = a.add(d, a.neg(j))
            amp = sum(
                roots[a.char_index(w, c)] * math.sqrt(eta) for w, _b, eta in block
            )
            probs[ji] += abs(amp) ** 2
    return probs / (g.order**k * a.order)


def trivial_state_outcome_distribution(
    k: int,
    g: SemidirectGroup,
    enumeration_cap: int | None = None,
) -> tuple[np.ndarray, float]:
    """Outcome probabilities for the maximally mixed (trivial-subgroup)
    input, plus the leftover mass outside the ensemble support."""
    a = g.a_group
    dec = block_decomposition(g, k, enumeration_cap)
    support = sum(dec.support_dim(xi) for xi in range(a.order**k))
    dim = g.order**k
    per_outcome = support / (dim * a.order)
    probs = np.full(a.order, per_outcome)
    return probs, 1.0 - support / dim


# ---------------------------------------------------------------------------
# Lemma-style bracketing of the success probability


@dataclass(frozen=True)
class SuccessBracket:
    alpha: int
    beta: Fraction
    lower: Fraction
    upper: Fraction


def lemma2_bounds(
    k: int,
    g: SemidirectGroup,
    alpha: int,
    beta: Fraction | None = None,
    stats: EtaStats | None = None,
) -> SuccessBracket:
    """Bracket alpha*beta^2*|A|/p^k <= Pr(success) <= p^k/|A|.

    The hypothesis Pr(eta >= alpha) >= beta is certified against the
    exact exhaustive eta histogram; a failing hypothesis raises.
    """
    if stats is None:
        stats = eta_statistics(g, k)
    attained = stats.probability_at_least(alpha)
    if beta is None:
        beta = attained
    beta = Fraction(beta)
    if attained < beta:
        raise ValueError(
            f"hypothesis Pr(eta >= {alpha}) >= {beta} fails: attained {attained}"
        )
    a_order = g.a_group.order
    lower = alpha * beta**2 * Fraction(a_order, g.p**k)
    upper = Fraction(g.p**k, a_order)
    return SuccessBracket(alpha, beta, lower, upper)


def best_certified_lower_bound(
    k: int, g: SemidirectGroup, stats: EtaStats | None = None
) -> SuccessBracket:
    """The (alpha, beta) pair from the exact histogram maximizing the
    certified lower bound."""
    if stats is None:
        stats = eta_statistics(g, k)
    best = None
    for alpha in sorted(eta for eta in stats.counts if eta >= 1):
        bracket = lemma2_bounds(k, g, alpha, stats=stats)
        if bracket.lower > 0 and (best is None or bracket.lower > best.lower):
            best = bracket
    if best is None:
        raise ValueError("eta histogram has no mass at eta >= 1")
    return best


# ---------------------------------------------------------------------------
# Optimality conditions


@dataclass(frozen=True)
class OptimalityReport:
    commutator_residual: float
    min_eig_margin: float

    @property
    def passed(self) -> bool:
        return (
            self.commutator_residual <= OPTIMALITY_TOL
            and self.min_eig_margin >= -OPTIMALITY_TOL
        )


def verify_optimality(
    k: int,
    g: SemidirectGroup,
    povm: POVM | None = None,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> OptimalityReport:
    """Check the two optimality conditions for the state ensemble:
    sum_i sigma_i E_i is Hermitian (equals sum_i E_i sigma_i) and
    dominates every sigma_j."""
    from .states import hidden_subgroup_state

    check_dim(g, k, cap)
    if povm is None:
        povm = build_pgm(k, g, cap, enumeration_cap)
    a = g.a_group
    sigmas = [
        hidden_subgroup_state(j, k, g, cap, enumeration_cap)[0]
        for j in a.elements()
    ]
    t = np.zeros_like(sigmas[0])
    for j, sigma_j in zip(a.elements(), sigmas):
        t += sigma_j @ povm.dense_element(j)
    commutator_residual = float(np.abs(t - t.conj().T).max())
    t_h = (t + t.conj().T) / 2
    margin = math.inf
    for sigma_j in sigmas:
        margin = min(margin, float(np.linalg.eigvalsh(t_h - sigma_j).min()))
    return OptimalityReport(commutator_residual, margin)


# ---------------------------------------------------------------------------
# Neumark blocks and quantum sampling


@dataclass(frozen=True)
class NeumarkBlock:
    """Unitary completion of the per-block solution isometry.

    ``unitary`` maps |w> (w in A-index order) to the embedded |S^x_w>
    whenever eta^x_w > 0 and to a deterministic completion vector
    otherwise; Gram-Schmidt over the standard basis in index order picks
    the completions.
    """

    x: tuple
    unitary: np.ndarray
    defined_columns: tuple[int, ...]  # A-indices of w with eta > 0
    completion_columns: tuple[int, ...]


def build_neumark(
    x: tuple,
    k: int,
    g: SemidirectGroup,
    enumeration_cap: int | None = None,
) -> NeumarkBlock:
    a = g.a_group
    x = tuple(a.reduce(xj) for xj in x)
    from .states import a_tuple_index

    xi = a_tuple_index(a, x)
    dec = block_decomposition(g, k, enumeration_cap)
    pk = g.p**k
    dim = max(a.order, pk)
    u = np.zeros((dim, dim), dtype=complex)
    defined = []
    by_w_index = {a.index(w): (b_idx, eta) for w, b_idx, eta in dec.blocks[xi]}
    for wi in sorted(by_w_index):
        b_idx, eta = by_w_index[wi]
        u[list(b_idx), wi] = 1.0 / math.sqrt(eta)
        defined.append(wi)
    completions = [col for col in range(dim) if col not in by_w_index]
    basis_cursor = 0
    for col in completions:
        while True:
            if basis_cursor >= dim:
                raise AssertionError("ran out of basis vectors completing the unitary")
            cand = np.zeros(dim, dtype=complex)
            cand[basis_cursor] = 1.0
            basis_cursor += 1
            cand -= u @ (u.conj().T @ cand)
            norm = np.linalg.norm(cand)
            if norm > 1e-6:
                u[:, col] = cand / norm
                break
    return NeumarkBlock(x, u, tuple(defined), tuple(completions))


@dataclass(frozen=True)
class QuantumSample:
    vector: np.ndarray
    eta: int
    postselection_probability: float


def quantum_sample_vector(
    x: tuple,
    w,
    k: int,
    g: SemidirectGroup,
    enumeration_cap: int | None = None,
) -> QuantumSample:
    """The uniform solution superposition |S^x_w> (zero vector when there
    are no solutions) with the label-and-measure postselection rate 1/eta."""
    a = g.a_group
    from .states import a_tuple_index

    xi = a_tuple_index(a, tuple(a.reduce(xj) for xj in x))
    dec = block_decomposition(g, k, enumeration_cap)
    vec = dec.solution_vector(xi, a.reduce(w))
    eta = sum(e for wv, _b, e in dec.blocks[xi] if wv == a.reduce(w))
    prob = 1.0 / eta if eta else 0.0
    return QuantumSample(vec, eta, prob)


def simulate_neumark_outcomes(
    k: int,
    g: SemidirectGroup,
    d,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> np.ndarray:
    """Measurement simulation through the per-block unitaries.

    Measure the block label x (uniform for these states), apply the
    adjoint block unitary, Fourier transform the w register, and read out
    j; returns the aggregated outcome distribution over A.
    """
    check_dim(g, k, cap)
    a = g.a_group
    dec = block_decomposition(g, k, enumeration_cap)
    d = a.reduce(d)
    pk = g.p**k
    f_bar = qft_matrix(a).conj()
    probs = np.zeros(a.order)
    block_weight = 1.0 / a.order**k
    for xi in range(a.order**k):
        x = a_tuple_from_index(a, xi, k)
        block = build_neumark(x, k, g, enumeration_cap)
        u = _block_state_vector(dec, xi, d) / math.sqrt(pk)
        embedded = np.zeros(block.unitary.shape[0], dtype=complex)
        embedded[:pk] = u
        coeffs = block.unitary.conj().T @ embedded
        leak = np.linalg.norm(coeffs[a.order :])
        if leak > UNITARITY_TOL:
            raise AssertionError(f"state leaked {leak} outside the w register")
        outcome_amps = f_bar @ coeffs[: a.order]
        probs += block_weight * np.abs(outcome_amps) ** 2
    return probs


# ---------------------------------------------------------------------------
# Aggregate report


@dataclass(frozen=True)
class PGMReport:
    group_spec: str
    k: int
    pr_formula: float
    pr_formula_exact: Fraction | None
    pr_trace: float
    bracket: SuccessBracket
    optimality: OptimalityReport

    @property
    def consistent(self) -> bool:
        return abs(self.pr_formula - self.pr_trace) < 1e-10


def pgm_report(
    k: int,
    g: SemidirectGroup,
    cap: int | None = None,
    enumeration_cap: int | None = None,
) -> PGMReport:
    from .groups import format_group_spec

    formula = success_probability_formula(k, g, enumeration_cap)
    exact = formula if isinstance(formula, Fraction) else None
    trace = success_probability_trace(k, g, g.a_group.zero, cap, enumeration_cap)
    bracket = best_certified_lower_bound(k, g)
    optimality = verify_optimality(k, g, None, cap, enumeration_cap)
    return PGMReport(
        format_group_spec(g), k, float(formula), exact, trace, bracket, optimality
    )
