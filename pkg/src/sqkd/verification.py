"""Randomized numerical verification of the reduction and bound claims.

Each check draws seeded random instances, measures a residual that should
be zero (for equalities) or the amount by which an inequality is violated
(zero when it holds), and reports the maximum residual over all trials
against a fixed tolerance.

RNG streams are derived per trial from (seed, suite, trial) through a
counter-based generator, so any single trial can be reproduced in
isolation and concurrency or trial order can never change results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .attacks import (
    MEASURE_RESEND,
    REFLECT,
    CollectiveAttack,
    RestrictedAttack,
    SymmetricRestrictedAttack,
    alice_states,
    build_rewind,
    derive_reduced_attack,
    derive_restricted_from_collective,
    estimate_noise_stats,
    forward_isometry,
    random_collective_attack,
    random_restricted_attack,
    random_symmetric_attack,
    reduced_round_states,
    simulate_entangled_sqkd,
    simulate_reduced,
    simulate_sqkd,
)
from .keyrate import (
    continuity_bound,
    explicit,
    key_rate,
    reflect_entropy_bound,
    resend_entropy_bound,
)
from .linalg import (
    conditional_entropy,
    hermitian_eigen,
    measure_register,
    trace_distance,
    trace_norm,
)
from .tolerances import DEFAULT as TOL

__all__ = [
    "CHECK_NAMES",
    "Q_GRID",
    "VerifyReport",
    "SymmetricAttackDiagnostics",
    "trial_rng",
    "collective_reduction_residual",
    "restricted_reduction_residual",
    "vector_pair_residual",
    "symmetric_attack_diagnostics",
    "symmetric_diagnostics_sample",
    "uncertainty_residual",
    "continuity_residual",
    "main_bound_residual",
    "epsilon_residual",
    "check_thm1_equivalence",
    "check_thm2_equivalence",
    "check_lemma_trd",
    "check_isometries",
    "run_all_checks",
]

# Suite identifiers keep the RNG streams of different checks disjoint.
SUITE_COLLECTIVE = 1
SUITE_RESTRICTED = 2
SUITE_VECTOR_PAIRS = 3
SUITE_SYMMETRIC = 4

# Z error rates at which the entropy-bound suites sample attacks.
Q_GRID = (0.0, 0.02, 0.05, 0.1)

# Check names in reporting order (external contract).
CHECK_NAMES = (
    "thm1-equivalence",
    "thm2-equivalence",
    "lemma-trd",
    "uncertainty",
    "continuity",
    "main-ent",
    "epsilon-bound",
)

DEFAULT_D_E = (2, 3, 4)


def trial_rng(seed: int, suite: int, trial: int) -> np.random.Generator:
    """Independent generator for one verification trial.

    Philox (counter-based, 64-bit) keyed by the triple (seed, suite,
    trial), so streams never overlap across suites or trials and a single
    trial can be replayed without running the others.
    """
    if seed < 0 or suite < 0 or trial < 0:
        raise ValueError(f"seed components must be nonnegative, got {(seed, suite, trial)}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=[seed, suite, trial])))


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one check: worst residual over all trials vs tolerance."""

    check: str
    trials: int
    max_residual: float
    tolerance: float
    passed: bool

    def __post_init__(self) -> None:
        if self.passed != (self.max_residual <= self.tolerance):
            raise ValueError("passed flag contradicts residual and tolerance")


def _report(check: str, trials: int, residuals: Iterable[float], tolerance: float) -> VerifyReport:
    worst = float(max(residuals, default=0.0))
    return VerifyReport(check, trials, worst, tolerance, worst <= tolerance)


def _check_trials(trials: int) -> int:
    trials = int(trials)
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    return trials


def collective_reduction_residual(attack: CollectiveAttack) -> float:
    """Worst trace distance between a collective attack and its restricted form.

    Compares the final joint states over all four preparation states and
    both of B's operations in the prepare-and-measure protocol, and over
    both operations in the entangled variant.
    """
    derived = derive_restricted_from_collective(attack)
    worst = 0.0
    for op in (MEASURE_RESEND, REFLECT):
        for state in alice_states():
            worst = max(
                worst,
                trace_distance(
                    simulate_sqkd(attack, state, op), simulate_sqkd(derived, state, op)
                ),
            )
        worst = max(
            worst,
            trace_distance(
                simulate_entangled_sqkd(attack, op), simulate_entangled_sqkd(derived, op)
            ),
        )
    return worst


def restricted_reduction_residual(attack: RestrictedAttack | SymmetricRestrictedAttack) -> float:
    """Worst trace distance between the entangled protocol under a restricted
    attack and the B-prepares protocol under the derived one-shot attack."""
    reduced = derive_reduced_attack(attack)
    return max(
        trace_distance(simulate_entangled_sqkd(attack, op), simulate_reduced(reduced, op))
        for op in (MEASURE_RESEND, REFLECT)
    )


def vector_pair_residual(v0: np.ndarray, v1: np.ndarray) -> float:
    """Residual of the rank-two trace-norm identities on one vector pair.

    For M = |v0><v1| + |v1><v0| with <v0|v1> = a + bi, the only possibly
    nonzero eigenvalues are a +/- sqrt(<v0|v0><v1|v1> - b^2), so the trace
    norm is bounded by 2 sqrt(<v0|v0><v1|v1>). Returns the worst of: the
    bound violation, the closed-form-vs-eigensolver eigenvalue mismatch,
    and the trace-norm mismatch between the two routes.
    """
    v0 = np.asarray(v0, dtype=complex).reshape(-1)
    v1 = np.asarray(v1, dtype=complex).reshape(-1)
    m = np.outer(v0, v1.conj()) + np.outer(v1, v0.conj())
    tn = trace_norm(m)
    n0 = float(np.real(np.vdot(v0, v0)))
    n1 = float(np.real(np.vdot(v1, v1)))
    ip = complex(np.vdot(v0, v1))
    root = math.sqrt(max(0.0, n0 * n1 - ip.imag**2))
    lam_plus, lam_minus = ip.real + root, ip.real - root
    w, _ = hermitian_eigen(m)
    return max(
        tn - 2.0 * math.sqrt(n0 * n1),  # bound violation (negative when satisfied)
        abs(w[0] - lam_plus),
        abs(w[-1] - lam_minus),
        abs(tn - (lam_plus - lam_minus)),
        0.0,
    )


@dataclass(frozen=True)
class SymmetricAttackDiagnostics:
    """Exact entropic quantities of one symmetric attack.

    All entropies are conditional von Neumann entropies in bits, computed
    from the exact round states of the derived B-prepares protocol:
    ``s_reflect``, ``s_resend``, ``s_aux`` are S(A1^Z|E) for the three
    round flavors, ``s_x_given_a2`` is S(A1^X|A2) on reflect rounds, and
    ``h_key_given_b`` is the Shannon entropy H(A1^Z|B^Z) on key rounds.
    """

    q: float
    d_e: int
    q_x: float
    s_reflect: float
    s_resend: float
    s_aux: float
    s_x_given_a2: float
    td_reflect_aux: float
    h_key_given_b: float
    isometry_residual: float


def _gram_residual(m: np.ndarray) -> float:
    k = m.shape[1]
    return float(np.max(np.abs(m.conj().T @ m - np.eye(k))))


def _attack_isometry_residual(attack: RestrictedAttack) -> float:
    reduced = derive_reduced_attack(attack)
    return max(
        _gram_residual(forward_isometry(attack)),
        _gram_residual(build_rewind(attack)),
        _gram_residual(attack.u),
        _gram_residual(reduced.u),
    )


def symmetric_attack_diagnostics(attack: SymmetricRestrictedAttack) -> SymmetricAttackDiagnostics:
    """Compute all entropic diagnostics for one symmetric attack."""
    restricted = attack.as_restricted()
    reduced = derive_reduced_attack(restricted)
    stats = estimate_noise_stats(reduced)
    reflect_state, resend_state, aux_state = reduced_round_states(reduced)

    full_reflect = simulate_reduced(reduced, REFLECT)
    pinched_x = measure_register(full_reflect, "A1", "X")
    s_x_given_a2 = conditional_entropy(pinched_x, {"A1"}, {"A2"})

    full_resend = simulate_reduced(reduced, MEASURE_RESEND)
    pinched_zz = measure_register(measure_register(full_resend, "A1", "Z"), "B", "Z")
    h_key_given_b = conditional_entropy(pinched_zz, {"A1"}, {"B"})

    return SymmetricAttackDiagnostics(
        q=stats.q_fwd,
        d_e=attack.d_e,
        q_x=stats.q_x,
        s_reflect=conditional_entropy(reflect_state, {"A1"}, {"E"}),
        s_resend=conditional_entropy(resend_state, {"A1"}, {"E"}),
        s_aux=conditional_entropy(aux_state, {"A1"}, {"E"}),
        s_x_given_a2=s_x_given_a2,
        td_reflect_aux=trace_distance(reflect_state, aux_state),
        h_key_given_b=h_key_given_b,
        isometry_residual=_attack_isometry_residual(restricted),
    )


def symmetric_diagnostics_sample(
    trials: int, seed: int, d_e_list: Sequence[int] = DEFAULT_D_E
) -> list[SymmetricAttackDiagnostics]:
    """Diagnostics for ``trials`` seeded attacks at every rate in Q_GRID."""
    trials = _check_trials(trials)
    sample = []
    for q_index, q in enumerate(Q_GRID):
        for t in range(trials):
            rng = trial_rng(seed, SUITE_SYMMETRIC, q_index * trials + t)
            d_e = int(d_e_list[t % len(d_e_list)])
            sample.append(symmetric_attack_diagnostics(random_symmetric_attack(q, rng, d_e)))
    return sample


def _folded(q_x: float) -> float:
    # h is symmetric about 1/2, so the bound only needs the folded rate
    return min(q_x, 1.0 - q_x)


def uncertainty_residual(diag: SymmetricAttackDiagnostics) -> float:
    """Violation of the entropic uncertainty relations on reflect rounds.

    Checks S(A1^Z|E) + S(A1^X|A2) >= 1 and its observable consequence
    S(A1^Z|E) >= 1 - h(Q_X).
    """
    return max(
        1.0 - (diag.s_reflect + diag.s_x_given_a2),
        reflect_entropy_bound(_folded(diag.q_x)) - diag.s_reflect,
        0.0,
    )


def continuity_residual(diag: SymmetricAttackDiagnostics) -> float:
    """Violation of the entropy continuity bound on the (reflect, aux) pair."""
    gap = abs(diag.s_reflect - diag.s_aux)
    return max(0.0, gap - continuity_bound(diag.td_reflect_aux))


def epsilon_residual(diag: SymmetricAttackDiagnostics) -> float:
    """Violation of the trace-distance bound td(reflect, aux) <= 4Q(1-Q)."""
    return max(0.0, diag.td_reflect_aux - 4.0 * diag.q * (1.0 - diag.q))


def main_bound_residual(diag: SymmetricAttackDiagnostics) -> float:
    """Violation of the key-round entropy bound and of the final rate bound.

    Checks S(A1^Z|E)_resend >= resend_entropy_bound(exact S_reflect, Q)
    and that the analytic rate never exceeds the simulated true rate
    S(A1^Z|E)_resend - H(A1^Z|B^Z).
    """
    f_value, _ = resend_entropy_bound(diag.s_reflect, diag.q)
    analytic = key_rate(diag.q, explicit(_folded(diag.q_x))).r
    true_rate = diag.s_resend - diag.h_key_given_b
    return max(0.0, f_value - diag.s_resend, analytic - true_rate)


def check_thm1_equivalence(
    trials: int, seed: int, d_e_list: Sequence[int] = DEFAULT_D_E
) -> VerifyReport:
    """Collective-to-restricted reduction over seeded Haar-random attacks."""
    trials = _check_trials(trials)
    residuals = []
    for t in range(trials):
        rng = trial_rng(seed, SUITE_COLLECTIVE, t)
        d_e = int(d_e_list[t % len(d_e_list)])
        residuals.append(collective_reduction_residual(random_collective_attack(d_e, rng)))
    return _report("thm1-equivalence", trials, residuals, TOL.equivalence)


def check_thm2_equivalence(
    trials: int, seed: int, d_e_list: Sequence[int] = DEFAULT_D_E
) -> VerifyReport:
    """Restricted-to-reduced protocol equivalence over seeded random attacks."""
    trials = _check_trials(trials)
    residuals = []
    for t in range(trials):
        rng = trial_rng(seed, SUITE_RESTRICTED, t)
        d_e = int(d_e_list[t % len(d_e_list)])
        residuals.append(restricted_reduction_residual(random_restricted_attack(d_e, rng)))
    return _report("thm2-equivalence", trials, residuals, TOL.equivalence)


def check_lemma_trd(trials: int, seed: int) -> VerifyReport:
    """Trace-norm bound and closed-form eigenvalues on random vector pairs.

    Vector dimensions cycle through 2..8; entries are unnormalized complex
    Gaussians, so the identities are exercised away from unit norm.
    """
    trials = _check_trials(trials)
    residuals = []
    for t in range(trials):
        rng = trial_rng(seed, SUITE_VECTOR_PAIRS, t)
        dim = 2 + t % 7
        v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v1 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        residuals.append(vector_pair_residual(v0, v1))
    return _report("lemma-trd", trials, residuals, TOL.equivalence)


def check_isometries(
    trials: int, seed: int, d_e_list: Sequence[int] = DEFAULT_D_E
) -> VerifyReport:
    """Orthonormality residuals of every constructed isometry and unitary.

    Replays the same attack streams as the equivalence and entropy suites
    and measures the worst Gram-matrix residual of the forward isometry,
    the rewind isometry, and the derived reverse and one-shot unitaries.
    """
    trials = _check_trials(trials)
    residuals = []
    for t in range(trials):
        d_e = int(d_e_list[t % len(d_e_list)])
        collective = random_collective_attack(d_e, trial_rng(seed, SUITE_COLLECTIVE, t))
        residuals.append(_attack_isometry_residual(derive_restricted_from_collective(collective)))
        restricted = random_restricted_attack(d_e, trial_rng(seed, SUITE_RESTRICTED, t))
        residuals.append(_attack_isometry_residual(restricted))
    for q_index, q in enumerate(Q_GRID):
        for t in range(trials):
            rng = trial_rng(seed, SUITE_SYMMETRIC, q_index * trials + t)
            d_e = int(d_e_list[t % len(d_e_list)])
            attack = random_symmetric_attack(q, rng, d_e).as_restricted()
            residuals.append(_attack_isometry_residual(attack))
    return _report("isometries", len(residuals), residuals, TOL.isometry)


def run_all_checks(
    trials: int, seed: int, d_e_list: Sequence[int] = DEFAULT_D_E
) -> list[VerifyReport]:
    """All named checks in reporting order.

    ``trials`` is the number of attacks per equivalence suite and per
    error-rate grid point of the entropy suites. The four entropy checks
    share one attack sample, so their reported trial counts are equal.
    """
    reports = [
        check_thm1_equivalence(trials, seed, d_e_list),
        check_thm2_equivalence(trials, seed, d_e_list),
        check_lemma_trd(trials, seed),
    ]
    sample = symmetric_diagnostics_sample(trials, seed, d_e_list)
    for name, residual_fn in (
        ("uncertainty", uncertainty_residual),
        ("continuity", continuity_residual),
        ("main-ent", main_bound_residual),
        ("epsilon-bound", epsilon_residual),
    ):
        reports.append(
            _report(name, len(sample), [residual_fn(d) for d in sample], TOL.equivalence)
        )
    assert tuple(r.check for r in reports) == CHECK_NAMES
    return reports
