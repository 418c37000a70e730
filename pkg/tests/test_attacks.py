"""Tests for protocol simulation, attack types, and the reductions."""
import math

import numpy as np
import pytest

from sqkd.attacks import (
    MEASURE_RESEND,
    REFLECT,
    CollectiveAttack,
    NoiseStats,
    ReducedAttack,
    RestrictedAttack,
    SymmetricRestrictedAttack,
    alice_states,
    bob_operation,
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
from sqkd.linalg import (
    DensityOperator,
    basis_state,
    haar_random_unitary,
    layout,
    partial_trace,
    trace_distance,
)

EXACT = 1e-12

# a hand-picked parameter set satisfying the constraint:
# q1 * conj(eta0) * sqrt(1-q0^2) = -q0 * eta1 * sqrt(1-q1^2)
HAND_Q0, HAND_Q1 = 0.6, 0.8
HAND_ETA0 = 0.5
HAND_ETA1 = -HAND_Q1 * HAND_ETA0 * 0.8 / (HAND_Q0 * 0.6)  # = -8/9


def hand_attack(u=None, d_e=2):
    if u is None:
        u = np.eye(2 * d_e, dtype=complex)
    return RestrictedAttack(HAND_Q0, HAND_Q1, HAND_ETA0, HAND_ETA1, u, d_e)


def identity_symmetric(d_e=2):
    return SymmetricRestrictedAttack(0.0, 0.0, np.eye(2 * d_e, dtype=complex))


def test_alice_states_geometry():
    zero, one, plus, minus = alice_states()
    for state in (zero, one, plus, minus):
        assert abs(np.linalg.norm(state) - 1.0) < EXACT
    assert abs(np.vdot(zero, one)) < EXACT
    assert abs(np.vdot(plus, minus)) < EXACT
    assert abs(abs(np.vdot(zero, plus)) - math.sqrt(0.5)) < EXACT
    assert np.allclose(plus, (zero + one) / math.sqrt(2.0))


def test_collective_attack_validation():
    with pytest.raises(ValueError):
        CollectiveAttack(np.ones((4, 4)), np.eye(4), 2)
    with pytest.raises(ValueError):
        CollectiveAttack(np.eye(4), np.eye(4), 0)
    with pytest.raises(ValueError):
        CollectiveAttack(np.eye(20), np.eye(20), 10)
    attack = CollectiveAttack(np.eye(4), np.eye(4), 2)
    with pytest.raises(ValueError):
        attack.u_forward[0, 0] = 2.0  # stored matrices are read-only


def test_restricted_attack_constraint():
    attack = hand_attack()
    assert attack.q0 == HAND_Q0 and attack.q1 == HAND_Q1
    with pytest.raises(ValueError):
        RestrictedAttack(HAND_Q0, HAND_Q1, HAND_ETA0, -HAND_ETA1, np.eye(4), 2)
    with pytest.raises(ValueError):
        RestrictedAttack(1.2, 0.0, 0.0, 0.0, np.eye(4), 2)
    with pytest.raises(ValueError):
        RestrictedAttack(1.0, 1.0, 1.5, 0.0, np.eye(4), 2)
    with pytest.raises(ValueError):
        RestrictedAttack(1.0, 1.0, 0.0, 0.0, np.eye(2), 1)  # ancilla too small


def test_symmetric_attack_expansion():
    rng = np.random.default_rng(11)
    attack = SymmetricRestrictedAttack(0.05, 0.3 + 0.1j, haar_random_unitary(4, rng))
    assert attack.d_e == 2
    expanded = attack.as_restricted()
    amp = math.sqrt(0.95)
    assert abs(expanded.q0 - amp) < EXACT and abs(expanded.q1 - amp) < EXACT
    assert expanded.eta0 == 0.3 + 0.1j
    assert expanded.eta1 == -(0.3 - 0.1j)
    with pytest.raises(ValueError):
        SymmetricRestrictedAttack(1.2, 0.0, np.eye(4))
    with pytest.raises(ValueError):
        SymmetricRestrictedAttack(0.1, 2.0, np.eye(4))


def test_reduced_attack_validation():
    attack = ReducedAttack(0.5, np.eye(8))
    assert attack.d_e == 2
    with pytest.raises(ValueError):
        ReducedAttack(1.5, np.eye(8))
    with pytest.raises(ValueError):
        ReducedAttack(0.5, np.eye(6))  # not a multiple of 4


def test_noise_stats_validation():
    stats = NoiseStats(-1e-13, 0.5, 1.0 + 1e-13)
    assert stats.q_fwd == 0.0 and stats.q_x == 1.0
    with pytest.raises(ValueError):
        NoiseStats(-0.1, 0.0, 0.0)


def test_forward_isometry_entries():
    f = forward_isometry(hand_attack())
    s0 = math.sqrt(1.0 - HAND_Q0**2)
    s1 = math.sqrt(1.0 - HAND_Q1**2)
    e = np.array([HAND_ETA0, math.sqrt(1.0 - abs(HAND_ETA0) ** 2)])
    anc = np.array([HAND_ETA1, math.sqrt(1.0 - abs(HAND_ETA1) ** 2)])
    expected0 = np.concatenate(([HAND_Q0, 0.0], s0 * e))
    expected1 = np.concatenate((s1 * anc, [HAND_Q1, 0.0]))
    assert np.allclose(f[:, 0], expected0)
    assert np.allclose(f[:, 1], expected1)
    assert np.max(np.abs(f.conj().T @ f - np.eye(2))) < EXACT


def test_bob_operation_measure_resend_copies_key_bit():
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    rho = DensityOperator.from_state(np.kron(plus, basis_state(2, 0)), layout(("T", 2), ("E", 2)))
    out = bob_operation(rho, MEASURE_RESEND)
    assert out.layout.labels == ("T", "B", "E")
    # the purified measurement leaves (T, B) in a maximally entangled state ...
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = math.sqrt(0.5)
    assert np.allclose(partial_trace(out, {"T", "B"}).matrix, np.outer(bell, bell.conj()))
    # ... so the transit qubit alone is fully decohered
    assert np.allclose(partial_trace(out, {"T"}).matrix, np.eye(2) / 2.0)


def test_bob_operation_reflect_appends_zero():
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    rho = DensityOperator.from_state(np.kron(plus, basis_state(2, 0)), layout(("T", 2), ("E", 2)))
    out = bob_operation(rho, REFLECT)
    assert out.layout.labels == ("T", "B", "E")
    assert np.allclose(partial_trace(out, {"T"}).matrix, np.outer(plus, plus.conj()))
    assert np.allclose(partial_trace(out, {"B"}).matrix, np.diag([1.0, 0.0]))


def test_bob_operation_insert_position_and_errors():
    psi = np.kron(np.kron(basis_state(2, 0), basis_state(2, 0)), basis_state(3, 0))
    rho = DensityOperator.from_state(psi, layout(("A1", 2), ("T", 2), ("E", 3)))
    out = bob_operation(rho, REFLECT)
    assert out.layout.labels == ("A1", "T", "B", "E")
    with pytest.raises(ValueError):
        bob_operation(out, REFLECT)  # already has a B register
    no_t = DensityOperator(np.eye(2) / 2, layout(("A1", 2)))
    with pytest.raises(ValueError):
        bob_operation(no_t, MEASURE_RESEND)
    with pytest.raises(ValueError):
        bob_operation(rho, "teleport")


def test_simulate_sqkd_identity_attack():
    attack = identity_symmetric()
    one = basis_state(2, 1)
    out = simulate_sqkd(attack, one, MEASURE_RESEND)
    assert out.layout.labels == ("T", "B", "E")
    expected = np.kron(np.kron(np.diag([0.0, 1.0]), np.diag([0.0, 1.0])), np.diag([1.0, 0.0]))
    assert np.allclose(out.matrix, expected.astype(complex))
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    reflected = simulate_sqkd(attack, plus, REFLECT)
    assert np.allclose(partial_trace(reflected, {"T"}).matrix, np.outer(plus, plus.conj()))


def test_simulate_sqkd_validation():
    attack = identity_symmetric()
    with pytest.raises(ValueError):
        simulate_sqkd(attack, np.array([1.0, 1.0]), REFLECT)
    with pytest.raises(ValueError):
        simulate_sqkd(attack, np.array([1.0, 0.0, 0.0]), REFLECT)
    with pytest.raises(ValueError):
        simulate_sqkd(attack, basis_state(2, 0), "teleport")
    with pytest.raises(TypeError):
        simulate_sqkd(ReducedAttack(0.5, np.eye(8)), basis_state(2, 0), REFLECT)


def test_simulate_entangled_layout():
    rng = np.random.default_rng(12)
    attack = random_collective_attack(3, rng)
    out = simulate_entangled_sqkd(attack, MEASURE_RESEND)
    assert out.layout.labels == ("A1", "A2", "B", "E")
    assert out.dim == 8 * 3


def test_derive_restricted_from_swap_forward():
    # forward SWAP on (T, E): |v, 0> -> |0, v>, so T always lands on 0
    swap = np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    )
    rng = np.random.default_rng(13)
    attack = CollectiveAttack(swap, haar_random_unitary(4, rng), 2)
    derived = derive_restricted_from_collective(attack)
    assert abs(derived.q0 - 1.0) < EXACT
    assert abs(derived.q1 - 0.0) < EXACT
    assert abs(derived.eta1) < EXACT
    for op in (MEASURE_RESEND, REFLECT):
        for state in alice_states():
            lhs = simulate_sqkd(attack, state, op)
            rhs = simulate_sqkd(derived, state, op)
            assert trace_distance(lhs, rhs) < EXACT


def test_derive_restricted_from_bit_flip_forward():
    # forward X (x) I: both basis states flip deterministically
    x_gate = np.array([[0, 1], [1, 0]], dtype=complex)
    rng = np.random.default_rng(14)
    attack = CollectiveAttack(np.kron(x_gate, np.eye(2)), haar_random_unitary(4, rng), 2)
    derived = derive_restricted_from_collective(attack)
    assert abs(derived.q0) < EXACT and abs(derived.q1) < EXACT
    for op in (MEASURE_RESEND, REFLECT):
        for state in alice_states():
            assert (
                trace_distance(
                    simulate_sqkd(attack, state, op), simulate_sqkd(derived, state, op)
                )
                < EXACT
            )


@pytest.mark.parametrize("d_e", [2, 3, 4])
def test_derive_restricted_random_spot(d_e):
    rng = np.random.default_rng(100 + d_e)
    for _ in range(4):
        attack = random_collective_attack(d_e, rng)
        derived = derive_restricted_from_collective(attack)
        assert 0.0 <= derived.q0 <= 1.0 and 0.0 <= derived.q1 <= 1.0
        assert abs(derived.eta0) <= 1.0 + EXACT and abs(derived.eta1) <= 1.0 + EXACT
        for op in (MEASURE_RESEND, REFLECT):
            lhs = simulate_entangled_sqkd(attack, op)
            rhs = simulate_entangled_sqkd(derived, op)
            assert trace_distance(lhs, rhs) < EXACT


def test_derive_restricted_basis_argument():
    rng = np.random.default_rng(15)
    attack = random_collective_attack(2, rng)
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)
    derived = derive_restricted_from_collective(attack, basis=hadamard)
    assert 0.0 <= derived.q0 <= 1.0
    with pytest.raises(ValueError):
        derive_restricted_from_collective(attack, basis=np.ones((2, 2)))
    with pytest.raises(ValueError):
        derive_restricted_from_collective(attack, basis=np.eye(3))
    small = CollectiveAttack(np.eye(2), np.eye(2), 1)
    with pytest.raises(ValueError):
        derive_restricted_from_collective(small)


def test_build_rewind_columns():
    attack = hand_attack()
    rewind = build_rewind(attack)
    assert rewind.shape == (8, 4)
    assert np.max(np.abs(rewind.conj().T @ rewind - np.eye(4))) < EXACT
    s0, s1 = 0.8, 0.6
    e = np.array([HAND_ETA0, math.sqrt(1.0 - abs(HAND_ETA0) ** 2)])
    anc = np.array([HAND_ETA1, math.sqrt(1.0 - abs(HAND_ETA1) ** 2)])
    c00 = np.zeros(8, dtype=complex)
    c00[0] = HAND_Q0  # |0,0,0>
    c00[4:6] = s1 * anc  # |1,0,f>
    c00 /= math.sqrt(1.0 - HAND_Q1**2 + HAND_Q0**2)
    c11 = np.zeros(8, dtype=complex)
    c11[2:4] = s0 * e  # |0,1,e>
    c11[6] = HAND_Q1  # |1,1,0>
    c11 /= math.sqrt(1.0 - HAND_Q0**2 + HAND_Q1**2)
    assert np.allclose(rewind[:, 0], c00)
    assert np.allclose(rewind[:, 3], c11)


@pytest.mark.parametrize(
    "q0,q1,eta0,eta1",
    [(0.0, 1.0, 0.0, 0.3 + 0.2j), (1.0, 0.0, 0.7j, 0.0)],
)
def test_rewind_degenerate_columns(q0, q1, eta0, eta1):
    rng = np.random.default_rng(16)
    attack = RestrictedAttack(q0, q1, eta0, eta1, haar_random_unitary(4, rng), 2)
    rewind = build_rewind(attack)
    assert not np.any(np.isnan(rewind))
    assert np.max(np.abs(rewind.conj().T @ rewind - np.eye(4))) < EXACT
    reduced = derive_reduced_attack(attack)
    for op in (MEASURE_RESEND, REFLECT):
        lhs = simulate_entangled_sqkd(attack, op)
        rhs = simulate_reduced(reduced, op)
        assert trace_distance(lhs, rhs) < EXACT


def test_derive_reduced_attack_weight():
    attack = hand_attack()
    reduced = derive_reduced_attack(attack)
    assert abs(reduced.p0 - 0.5 * (1.0 - HAND_Q1**2 + HAND_Q0**2)) < EXACT
    assert reduced.d_e == 2
    assert np.max(np.abs(reduced.u.conj().T @ reduced.u - np.eye(8))) < EXACT


@pytest.mark.parametrize("d_e", [2, 3])
def test_reduced_protocol_equivalence_spot(d_e):
    rng = np.random.default_rng(200 + d_e)
    for _ in range(4):
        attack = random_restricted_attack(d_e, rng)
        reduced = derive_reduced_attack(attack)
        for op in (MEASURE_RESEND, REFLECT):
            lhs = simulate_entangled_sqkd(attack, op)
            rhs = simulate_reduced(reduced, op)
            assert trace_distance(lhs, rhs) < EXACT


def test_simulate_reduced_validation():
    with pytest.raises(ValueError):
        simulate_reduced(ReducedAttack(0.5, np.eye(8)), "teleport")


def test_reduced_round_states_decomposition():
    rng = np.random.default_rng(17)
    for attack in (
        random_symmetric_attack(0.05, rng).as_restricted(),
        random_restricted_attack(2, rng),  # asymmetric preparation weight
    ):
        reduced = derive_reduced_attack(attack)
        reflect_state, resend_state, aux_state = reduced_round_states(reduced)
        for state in (reflect_state, resend_state, aux_state):
            assert state.layout.labels == ("A1", "E")
        mix = 0.5 * reflect_state.matrix + 0.5 * aux_state.matrix
        assert np.max(np.abs(resend_state.matrix - mix)) < 1e-10
        # the key register is classical: no coherence between A1 values
        d_e = reduced.d_e
        block = resend_state.matrix[:d_e, d_e:]
        assert np.max(np.abs(block)) < EXACT


@pytest.mark.parametrize("q", [0.0, 0.02, 0.1, 0.3])
def test_symmetric_noise_rates_exact(q):
    rng = np.random.default_rng(int(q * 1000) + 18)
    attack = random_symmetric_attack(q, rng)
    stats = estimate_noise_stats(attack)
    assert abs(stats.q_fwd - q) < EXACT
    assert abs(stats.q_rev - q) < EXACT
    assert 0.0 <= stats.q_x <= 1.0


def test_identity_attack_stats_vanish():
    stats = estimate_noise_stats(identity_symmetric())
    assert stats.q_fwd == 0.0 and stats.q_rev == 0.0 and abs(stats.q_x) < EXACT


def test_phase_only_attack_disturbs_x_basis():
    # reverse Z on the transit qubit: no Z errors, maximal X errors
    attack = SymmetricRestrictedAttack(0.0, 0.0, np.diag([1.0, 1.0, -1.0, -1.0]))
    stats = estimate_noise_stats(attack)
    assert stats.q_fwd < EXACT and stats.q_rev < EXACT
    assert abs(stats.q_x - 1.0) < EXACT


def test_reduced_stats_match_direct_protocol():
    rng = np.random.default_rng(19)
    for q in (0.0, 0.05, 0.1):
        attack = random_symmetric_attack(q, rng, d_e=3)
        direct = estimate_noise_stats(attack)
        reduced = estimate_noise_stats(derive_reduced_attack(attack))
        assert abs(direct.q_fwd - reduced.q_fwd) < EXACT
        assert abs(direct.q_rev - reduced.q_rev) < EXACT
        assert abs(direct.q_x - reduced.q_x) < EXACT


def test_random_samplers_deterministic_and_valid():
    a = random_restricted_attack(3, np.random.default_rng(77))
    b = random_restricted_attack(3, np.random.default_rng(77))
    assert a.q0 == b.q0 and a.q1 == b.q1 and a.eta0 == b.eta0 and a.eta1 == b.eta1
    assert np.array_equal(a.u, b.u)
    rng = np.random.default_rng(20)
    for d_e in (2, 4):
        for _ in range(30):
            attack = random_restricted_attack(d_e, rng)
            assert attack.d_e == d_e  # constraint already enforced by the constructor
        collective = random_collective_attack(d_e, rng)
        assert collective.d_e == d_e
    with pytest.raises(ValueError):
        random_symmetric_attack(0.6, rng)
    with pytest.raises(ValueError):
        random_restricted_attack(9, rng)
