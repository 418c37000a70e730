"""Protocol simulation and attack constructions for semi-quantum key distribution.

The protocol family modeled here: A (fully quantum) sends qubits through a
two-way channel to B (classical), who either measures in the Z basis and
resends the result, or reflects the qubit untouched. An eavesdropper with a
private ancilla E attacks both channel directions. Three equivalent attack
parameterizations are implemented, together with the constructive reductions
between them:

* :class:`CollectiveAttack` -- an arbitrary unitary pair (forward, reverse)
  on the transit qubit T and the ancilla E.
* :class:`RestrictedAttack` -- the normal form (q0, q1, eta0, eta1, U): a
  biasing forward isometry with a two-dimensional ancilla followed by an
  arbitrary reverse unitary. :func:`derive_restricted_from_collective`
  converts any collective attack into this form without changing the joint
  state A and B can observe.
* :class:`ReducedAttack` -- the one-shot form (p0, U) against the protocol
  variant in which B themselves prepares the two-qubit state; the rewind
  isometry (:func:`build_rewind`) converts a restricted attack into this
  form with exactly the same joint state on (A1, A2, B, E).

B's measure-and-resend is modeled as a CNOT onto a private register, so all
outputs are exact density operators with no sampling noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    DensityOperator,
    SubsystemLayout,
    basis_state,
    complete_isometry,
    embed_operator,
    haar_random_unitary,
    layout,
    partial_trace,
    permute_factors,
    measure_register,
    unitary_fixing_columns,
)
from .tolerances import DEFAULT as TOL

__all__ = [
    "MEASURE_RESEND",
    "REFLECT",
    "CollectiveAttack",
    "RestrictedAttack",
    "SymmetricRestrictedAttack",
    "ReducedAttack",
    "NoiseStats",
    "alice_states",
    "bob_operation",
    "forward_isometry",
    "derive_restricted_from_collective",
    "simulate_sqkd",
    "simulate_entangled_sqkd",
    "build_rewind",
    "derive_reduced_attack",
    "simulate_reduced",
    "reduced_round_states",
    "estimate_noise_stats",
    "random_collective_attack",
    "random_restricted_attack",
    "random_symmetric_attack",
]

MEASURE_RESEND = "measure_resend"
REFLECT = "reflect"

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
MINUS = np.array([1.0, -1.0], dtype=complex) / math.sqrt(2.0)

_P0 = np.outer(KET0, KET0.conj())
_P1 = np.outer(KET1, KET1.conj())
_P_PLUS = np.outer(PLUS, PLUS.conj())
_P_MINUS = np.outer(MINUS, MINUS.conj())

# CNOT with the first factor as control: |t, b> -> |t, b xor t>
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)

_MAX_D_E = 8  # keeps every full system at dimension <= 64


def _frozen_unitary(u: np.ndarray, dim: int, what: str) -> np.ndarray:
    m = np.array(u, dtype=complex)
    if m.shape != (dim, dim):
        raise ValueError(f"{what} must have shape ({dim}, {dim}), got {m.shape}")
    if np.max(np.abs(m.conj().T @ m - np.eye(dim))) > TOL.unitary:
        raise ValueError(f"{what} is not unitary within tolerance")
    m.setflags(write=False)
    return m


def _check_d_e(d_e: int, minimum: int = 1) -> int:
    d_e = int(d_e)
    if not minimum <= d_e <= _MAX_D_E:
        raise ValueError(f"ancilla dimension {d_e} outside [{minimum}, {_MAX_D_E}]")
    return d_e


@dataclass(frozen=True, eq=False)
class CollectiveAttack:
    """Unitary pair (forward, reverse) on T (x) E with ancilla starting at |0>."""

    u_forward: np.ndarray
    u_reverse: np.ndarray
    d_e: int

    def __post_init__(self) -> None:
        d_e = _check_d_e(self.d_e)
        object.__setattr__(self, "d_e", d_e)
        object.__setattr__(self, "u_forward", _frozen_unitary(self.u_forward, 2 * d_e, "u_forward"))
        object.__setattr__(self, "u_reverse", _frozen_unitary(self.u_reverse, 2 * d_e, "u_reverse"))


@dataclass(frozen=True, eq=False)
class RestrictedAttack:
    """Normal-form attack (q0, q1, eta0, eta1, U).

    Forward direction: the biasing isometry of :func:`forward_isometry`,
    which keeps |0> with amplitude q0 and |1> with amplitude q1 and leaks
    the flip events into a two-dimensional ancilla whose states are set by
    eta0 and eta1. Reverse direction: the arbitrary unitary U on T (x) E.
    The parameters must satisfy

        q0 * eta1 * sqrt(1 - q1^2) + q1 * conj(eta0) * sqrt(1 - q0^2) = 0,

    which is exactly the condition for the forward isometry to preserve
    inner products.
    """

    q0: float
    q1: float
    eta0: complex
    eta1: complex
    u: np.ndarray
    d_e: int

    def __post_init__(self) -> None:
        d_e = _check_d_e(self.d_e, minimum=2)
        object.__setattr__(self, "d_e", d_e)
        for name in ("q0", "q1"):
            value = float(getattr(self, name))
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise ValueError(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, min(max(value, 0.0), 1.0))
        for name in ("eta0", "eta1"):
            value = complex(getattr(self, name))
            if abs(value) > 1.0 + 1e-12:
                raise ValueError(f"|{name}|={abs(value)} exceeds 1")
            object.__setattr__(self, name, value)
        residual = abs(
            self.q0 * self.eta1 * math.sqrt(max(0.0, 1.0 - self.q1**2))
            + self.q1 * np.conj(self.eta0) * math.sqrt(max(0.0, 1.0 - self.q0**2))
        )
        if residual > TOL.constraint:
            raise ValueError(f"attack parameters violate the constraint, residual {residual:.3e}")
        object.__setattr__(self, "u", _frozen_unitary(self.u, 2 * d_e, "u"))


@dataclass(frozen=True, eq=False)
class SymmetricRestrictedAttack:
    """Restricted attack with equal Z error rate q in both channel directions.

    Expands to the restricted form (sqrt(1-q), sqrt(1-q), eta, -conj(eta), U),
    which satisfies the parameter constraint identically.
    """

    q: float
    eta: complex
    u: np.ndarray

    def __post_init__(self) -> None:
        q = float(self.q)
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"error rate {q} outside [0, 1]")
        object.__setattr__(self, "q", q)
        eta = complex(self.eta)
        if abs(eta) > 1.0 + 1e-12:
            raise ValueError(f"|eta|={abs(eta)} exceeds 1")
        object.__setattr__(self, "eta", eta)
        m = np.array(self.u, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"reverse unitary has invalid shape {m.shape}")
        d_e = _check_d_e(m.shape[0] // 2, minimum=2)
        object.__setattr__(self, "u", _frozen_unitary(m, 2 * d_e, "u"))

    @property
    def d_e(self) -> int:
        return self.u.shape[0] // 2

    def as_restricted(self) -> RestrictedAttack:
        amp = math.sqrt(1.0 - self.q)
        return RestrictedAttack(amp, amp, self.eta, -np.conj(self.eta), self.u, self.d_e)


@dataclass(frozen=True, eq=False)
class ReducedAttack:
    """One-shot attack (p0, U) on the protocol where B prepares both qubits.

    B prepares sqrt(p0)|000> + sqrt(1-p0)|11b> on (A1, A2, B) with b = 0
    for a reflect round and b = 1 for a measure-and-resend round; the
    eavesdropper applies the single unitary U to (A1, A2, E).
    """

    p0: float
    u: np.ndarray

    def __post_init__(self) -> None:
        p0 = float(self.p0)
        if not -1e-12 <= p0 <= 1.0 + 1e-12:
            raise ValueError(f"p0={p0} outside [0, 1]")
        object.__setattr__(self, "p0", min(max(p0, 0.0), 1.0))
        m = np.array(self.u, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 4:
            raise ValueError(f"attack unitary has invalid shape {m.shape}")
        d_e = _check_d_e(m.shape[0] // 4)
        object.__setattr__(self, "u", _frozen_unitary(m, 4 * d_e, "u"))

    @property
    def d_e(self) -> int:
        return self.u.shape[0] // 4


@dataclass(frozen=True)
class NoiseStats:
    """Observable error rates: forward Z, reverse Z, and X on reflect rounds."""

    q_fwd: float
    q_rev: float
    q_x: float

    def __post_init__(self) -> None:
        for name in ("q_fwd", "q_rev", "q_x"):
            value = float(getattr(self, name))
            if not -1e-12 <= value <= 1.0 + 1e-12:
                raise ValueError(f"{name}={value} outside [0, 1]")
            object.__setattr__(self, name, min(max(value, 0.0), 1.0))


def alice_states() -> list[np.ndarray]:
    """The four preparation states |0>, |1>, |+>, |-> in that order."""
    return [KET0.copy(), KET1.copy(), PLUS.copy(), MINUS.copy()]


def bob_operation(state: DensityOperator, op: str) -> DensityOperator:
    """Apply B's operation, appending their private register B after T.

    Measure-and-resend is the CNOT purification: the transit qubit's Z
    value is copied coherently onto a fresh B register, which decoheres T
    in the Z basis exactly like a projective measurement followed by
    resending the outcome. Reflect leaves the state untouched apart from
    the appended |0> register.
    """
    if op not in (MEASURE_RESEND, REFLECT):
        raise ValueError(f"unknown operation {op!r}")
    labels = state.layout.labels
    if "T" not in labels:
        raise ValueError(f"input has no T factor: {labels}")
    if "B" in labels:
        raise ValueError("input already has a B register")
    appended = np.kron(state.matrix, _P0)
    factors = state.layout.factors + (("B", 2),)
    dims = tuple(d for _, d in factors)
    t_pos = state.layout.position("T")
    n = len(factors)
    order = tuple(list(range(t_pos + 1)) + [n - 1] + list(range(t_pos + 1, n - 1)))
    new_layout = SubsystemLayout(tuple(factors[i] for i in order))
    matrix = permute_factors(appended, dims, order)
    if op == MEASURE_RESEND:
        cnot = embed_operator(_CNOT, new_layout, ["T", "B"])
        matrix = cnot @ matrix @ cnot.conj().T
    return DensityOperator(matrix, new_layout)


def _ancilla_pair(attack: RestrictedAttack) -> tuple[np.ndarray, np.ndarray]:
    """The ancilla states |e>, |f> attached to forward flip events."""
    e = np.array([attack.eta0, math.sqrt(max(0.0, 1.0 - abs(attack.eta0) ** 2))], dtype=complex)
    f = np.array([attack.eta1, math.sqrt(max(0.0, 1.0 - abs(attack.eta1) ** 2))], dtype=complex)
    return e, f


def forward_isometry(attack: RestrictedAttack) -> np.ndarray:
    """The forward channel isometry F from T into T (x) C^2.

    F|0> = q0 |0,0> + sqrt(1-q0^2) |1,e> and
    F|1> = sqrt(1-q1^2) |0,f> + q1 |1,0>, with |e> and |f> the ancilla
    states set by eta0 and eta1. The parameter constraint makes the two
    columns orthonormal, so F*F = I.
    """
    e, f = _ancilla_pair(attack)
    col0 = attack.q0 * np.kron(KET0, KET0) + math.sqrt(max(0.0, 1.0 - attack.q0**2)) * np.kron(KET1, e)
    col1 = math.sqrt(max(0.0, 1.0 - attack.q1**2)) * np.kron(KET0, f) + attack.q1 * np.kron(KET1, KET0)
    return np.column_stack([col0, col1])


def _forward_embedded(attack: RestrictedAttack) -> np.ndarray:
    """Forward isometry with its two-dimensional ancilla embedded into C^{d_e}."""
    small = forward_isometry(attack)
    out = np.zeros((2 * attack.d_e, 2), dtype=complex)
    for t in range(2):
        for anc in range(2):
            out[t * attack.d_e + anc, :] = small[t * 2 + anc, :]
    return out


def derive_restricted_from_collective(
    attack: CollectiveAttack, basis: np.ndarray | None = None
) -> RestrictedAttack:
    """Convert a collective attack to the restricted normal form.

    Reads the flip amplitudes and conditional ancilla states off the
    forward unitary applied to the basis pair (default Z), then builds the
    block-diagonal unitary V that maps the two-dimensional ancilla of the
    normal form onto those conditional states. Because V preserves the
    transit qubit's Z value, it commutes with B's CNOT, so folding it into
    the reverse unitary (U = u_reverse . V) leaves the final joint state
    observable by A and B unchanged.

    When a conditional-state overlap is degenerate (|eta| within 1e-8 of
    1) the corresponding V column is unreachable and is completed
    arbitrarily. Simulation helpers interpret the result in the Z basis,
    so protocol equivalence holds for the default pair.
    """
    d_e = attack.d_e
    if d_e < 2:
        raise ValueError("reduction needs an ancilla of dimension at least 2")
    if basis is None:
        v0, v1 = KET0, KET1
    else:
        pair = np.asarray(basis, dtype=complex)
        if pair.shape != (2, 2):
            raise ValueError(f"basis must be a 2x2 column pair, got shape {pair.shape}")
        if np.max(np.abs(pair.conj().T @ pair - np.eye(2))) > TOL.orthonormal:
            raise ValueError("basis columns are not orthonormal")
        v0, v1 = pair[:, 0], pair[:, 1]
    chi = basis_state(d_e, 0)
    w0 = (attack.u_forward @ np.kron(v0, chi)).reshape(2, d_e)
    w1 = (attack.u_forward @ np.kron(v1, chi)).reshape(2, d_e)

    def _split(block: np.ndarray) -> tuple[float, np.ndarray]:
        norm = float(np.linalg.norm(block))
        if norm < 1e-12:
            return 0.0, basis_state(d_e, 0)
        return norm, block / norm

    alpha, e0 = _split(w0[0])
    _, e1 = _split(w0[1])
    _, e2 = _split(w1[0])
    beta, e3 = _split(w1[1])
    if alpha > 1.0 + TOL.orthonormal or beta > 1.0 + TOL.orthonormal:
        raise ArithmeticError(f"flip amplitudes ({alpha}, {beta}) outside [0, 1]")
    alpha, beta = min(alpha, 1.0), min(beta, 1.0)
    eta0 = complex(e3.conj() @ e1)
    eta1 = complex(e0.conj() @ e2)
    placed = {
        0: np.kron(KET0, e0),
        d_e: np.kron(KET1, e3),
    }
    if abs(eta1) < 1.0 - TOL.eta_degenerate:
        g0 = (e2 - eta1 * e0) / math.sqrt(1.0 - abs(eta1) ** 2)
        placed[1] = np.kron(KET0, g0)
    if abs(eta0) < 1.0 - TOL.eta_degenerate:
        g1 = (e1 - eta0 * e3) / math.sqrt(1.0 - abs(eta0) ** 2)
        placed[d_e + 1] = np.kron(KET1, g1)
    v = unitary_fixing_columns(2 * d_e, placed)
    if abs(eta0) > 1.0:
        eta0 /= abs(eta0)
    if abs(eta1) > 1.0:
        eta1 /= abs(eta1)
    return RestrictedAttack(alpha, beta, eta0, eta1, attack.u_reverse @ v, d_e)


def _as_restricted(attack) -> RestrictedAttack:
    if isinstance(attack, SymmetricRestrictedAttack):
        return attack.as_restricted()
    return attack


def simulate_sqkd(attack, alice_state: np.ndarray, bob_op: str) -> DensityOperator:
    """One round of the prepare-and-measure protocol under attack.

    A sends ``alice_state`` through the forward channel, B applies
    ``bob_op``, and the qubit returns through the reverse channel. Returns
    the exact joint state over (T, B, E) just before A's final measurement.
    """
    attack = _as_restricted(attack)
    a = np.asarray(alice_state, dtype=complex).reshape(-1)
    if a.shape != (2,):
        raise ValueError(f"alice state must be a qubit, got dimension {a.shape}")
    if abs(np.linalg.norm(a) - 1.0) > TOL.norm:
        raise ValueError("alice state is not normalized")
    d_e = attack.d_e
    if isinstance(attack, CollectiveAttack):
        psi = attack.u_forward @ np.kron(a, basis_state(d_e, 0))
        u_rev = attack.u_reverse
    elif isinstance(attack, RestrictedAttack):
        psi = _forward_embedded(attack) @ a
        u_rev = attack.u
    else:
        raise TypeError(f"unsupported attack type {type(attack).__name__}")
    rho = DensityOperator.from_state(psi, layout(("T", 2), ("E", d_e)))
    rho = bob_operation(rho, bob_op)
    reverse = embed_operator(u_rev, rho.layout, ["T", "E"])
    return DensityOperator(reverse @ rho.matrix @ reverse.conj().T, rho.layout)


def simulate_entangled_sqkd(attack, bob_op: str) -> DensityOperator:
    """One round of the entangled protocol variant under attack.

    A prepares (|00> + |11>)/sqrt(2), keeps qubit A1, and sends the other
    half through the attacked two-way channel exactly as in
    :func:`simulate_sqkd`. Returns the joint state over (A1, A2, B, E).
    """
    attack = _as_restricted(attack)
    d_e = attack.d_e
    bell = (np.kron(KET0, KET0) + np.kron(KET1, KET1)) / math.sqrt(2.0)
    if isinstance(attack, CollectiveAttack):
        psi = np.kron(bell, basis_state(d_e, 0))
        lay = layout(("A1", 2), ("T", 2), ("E", d_e))
        psi = embed_operator(attack.u_forward, lay, ["T", "E"]) @ psi
        u_rev = attack.u_reverse
    elif isinstance(attack, RestrictedAttack):
        psi = np.kron(np.eye(2, dtype=complex), _forward_embedded(attack)) @ bell
        lay = layout(("A1", 2), ("T", 2), ("E", d_e))
        u_rev = attack.u
    else:
        raise TypeError(f"unsupported attack type {type(attack).__name__}")
    rho = DensityOperator.from_state(psi, lay)
    rho = bob_operation(rho, bob_op)
    reverse = embed_operator(u_rev, rho.layout, ["T", "E"])
    rho = DensityOperator(reverse @ rho.matrix @ reverse.conj().T, rho.layout)
    return rho.relabel({"T": "A2"})


def build_rewind(attack: RestrictedAttack) -> np.ndarray:
    """The rewind isometry from (A1, A2) into (A1, A2) (x) C^2.

    Undoes the statistics of the forward channel on the two preparations
    the classical party uses, so that a forward-then-reverse attack can be
    replayed against a state B prepares locally:

        Rw|00> = (q0 |000> + sqrt(1-q1^2) |10f>) / sqrt(1 - q1^2 + q0^2)
        Rw|11> = (sqrt(1-q0^2) |01e> + q1 |110>) / sqrt(1 - q0^2 + q1^2)

    Its action on |01> and |10> is never exercised and is completed
    arbitrarily; all four columns are orthonormal. A column whose
    normalizer vanishes (q0 = 0 with q1 = 1, or the mirror case) belongs
    to a preparation branch of weight zero and is likewise completed
    arbitrarily.
    """
    e, f = _ancilla_pair(attack)
    q0, q1 = attack.q0, attack.q1
    s0 = math.sqrt(max(0.0, 1.0 - q0**2))
    s1 = math.sqrt(max(0.0, 1.0 - q1**2))
    c00 = q0 * np.kron(np.kron(KET0, KET0), KET0) + s1 * np.kron(np.kron(KET1, KET0), f)
    c11 = s0 * np.kron(np.kron(KET0, KET1), e) + q1 * np.kron(np.kron(KET1, KET1), KET0)
    placed = {}
    for index, column in ((0, c00), (3, c11)):
        norm = float(np.linalg.norm(column))
        if norm > 1e-12:
            placed[index] = column / norm
    if not placed:
        raise ArithmeticError("both rewind columns vanished; attack parameters inconsistent")
    full = unitary_fixing_columns(8, placed)
    return full[:, :4]


def derive_reduced_attack(attack) -> ReducedAttack:
    """Convert a restricted attack into the B-prepares one-shot form.

    The reduced attack prepares nothing itself: it consists of the
    preparation weight p0 = (1 - q1^2 + q0^2) / 2 and the single unitary
    (I_A1 (x) u_reverse) . Rw, where Rw is the completed rewind isometry.
    The resulting joint state over (A1, A2, B, E) equals the entangled
    protocol's output exactly, for both of B's round types.
    """
    attack = _as_restricted(attack)
    d_e = attack.d_e
    p0 = 0.5 * (1.0 - attack.q1**2 + attack.q0**2)
    rewind = build_rewind(attack)
    placed: dict[int, np.ndarray] = {}
    for k in range(4):
        col = np.zeros(4 * d_e, dtype=complex)
        for pair in range(4):
            for anc in range(2):
                col[pair * d_e + anc] = rewind[pair * 2 + anc, k]
        placed[k * d_e] = col
    rewind_full = unitary_fixing_columns(4 * d_e, placed)
    lay = layout(("A1", 2), ("A2", 2), ("E", d_e))
    reverse_full = embed_operator(attack.u, lay, ["A2", "E"])
    return ReducedAttack(p0, reverse_full @ rewind_full)


def _reduced_run(attack: ReducedAttack, a1a2_amplitudes: tuple[complex, complex], b_bit: int) -> DensityOperator:
    """Apply a reduced attack to amp0 |00> + amp1 |11> on (A1, A2) with B = |b>."""
    d_e = attack.d_e
    amp0, amp1 = a1a2_amplitudes
    lay = layout(("A1", 2), ("A2", 2), ("B", 2), ("E", d_e))
    psi = np.zeros(lay.dim, dtype=complex)
    psi += amp0 * np.kron(np.kron(np.kron(KET0, KET0), KET0), basis_state(d_e, 0))
    psi += amp1 * np.kron(np.kron(np.kron(KET1, KET1), basis_state(2, b_bit)), basis_state(d_e, 0))
    u = embed_operator(attack.u, lay, ["A1", "A2", "E"])
    return DensityOperator.from_state(u @ psi, lay)


def simulate_reduced(attack: ReducedAttack, choice: str) -> DensityOperator:
    """One round of the B-prepares protocol under a reduced attack.

    B prepares sqrt(p0)|000> + sqrt(1-p0)|11b> over (A1, A2, B), with
    b = 0 on reflect rounds and b = 1 on measure-and-resend rounds, and
    the attack unitary acts on (A1, A2, E). Returns the pure joint state
    over (A1, A2, B, E).
    """
    if choice not in (MEASURE_RESEND, REFLECT):
        raise ValueError(f"unknown operation {choice!r}")
    amps = (math.sqrt(attack.p0), math.sqrt(max(0.0, 1.0 - attack.p0)))
    return _reduced_run(attack, amps, 0 if choice == REFLECT else 1)


def reduced_round_states(
    attack: ReducedAttack,
) -> tuple[DensityOperator, DensityOperator, DensityOperator]:
    """Key-register states (A1 measured in Z, everything but E discarded).

    Returns the classical-quantum states over (A1, E) for the three round
    flavors: reflect rounds, measure-and-resend rounds, and the auxiliary
    run whose preparation carries a flipped sign on the |11> branch. The
    resend state must equal the equal mixture of the other two (the B
    register decoheres exactly the branch coherence the sign flip
    negates); a residual above 1e-10 raises ArithmeticError.
    """
    def _key_state(full: DensityOperator) -> DensityOperator:
        return partial_trace(measure_register(full, "A1", "Z"), {"A1", "E"})

    reflect = _key_state(simulate_reduced(attack, REFLECT))
    resend = _key_state(simulate_reduced(attack, MEASURE_RESEND))
    amps = (math.sqrt(attack.p0), -math.sqrt(max(0.0, 1.0 - attack.p0)))
    aux = _key_state(_reduced_run(attack, amps, 0))
    residual = np.max(np.abs(resend.matrix - 0.5 * reflect.matrix - 0.5 * aux.matrix))
    if residual > TOL.decomposition:
        raise ArithmeticError(f"round-state decomposition residual {residual:.3e}")
    return reflect, resend, aux


def _probability(rho: DensityOperator, projectors: dict[str, np.ndarray]) -> float:
    op = np.eye(rho.dim, dtype=complex)
    for label, proj in projectors.items():
        op = op @ embed_operator(proj, rho.layout, [label])
    return float(np.real(np.trace(op @ rho.matrix)))


def estimate_noise_stats(attack) -> NoiseStats:
    """Exact channel error rates induced by an attack.

    q_fwd is the probability that B's measured bit differs from A's key
    bit, q_rev the probability that the returning qubit's Z value differs
    from B's bit, and q_x the probability that the two X measurements on
    reflect rounds disagree. All three are computed from exact density
    operators, averaging uniformly over A's preparations where relevant.
    """
    if isinstance(attack, ReducedAttack):
        resend = simulate_reduced(attack, MEASURE_RESEND)
        q_fwd = _probability(resend, {"A1": _P0, "B": _P1}) + _probability(resend, {"A1": _P1, "B": _P0})
        q_rev = _probability(resend, {"A2": _P0, "B": _P1}) + _probability(resend, {"A2": _P1, "B": _P0})
        reflect = simulate_reduced(attack, REFLECT)
        q_x = _probability(reflect, {"A1": _P_PLUS, "A2": _P_MINUS}) + _probability(
            reflect, {"A1": _P_MINUS, "A2": _P_PLUS}
        )
        return NoiseStats(q_fwd, q_rev, q_x)

    attack = _as_restricted(attack)
    z_projs = (_P0, _P1)
    runs = [simulate_sqkd(attack, state, MEASURE_RESEND) for state in (KET0, KET1)]
    q_fwd = 0.5 * sum(
        _probability(rho, {"B": z_projs[1 - sent]}) for sent, rho in enumerate(runs)
    )
    # Reverse error: condition on B's resent bit, averaged over the two bits
    # with A's preparation uniform. Branches B never produces contribute 0.
    mixed = DensityOperator(0.5 * (runs[0].matrix + runs[1].matrix), runs[0].layout)
    q_rev = 0.0
    for bit in range(2):
        p_bit = _probability(mixed, {"B": z_projs[bit]})
        if p_bit > 1e-15:
            p_flip = _probability(mixed, {"B": z_projs[bit], "T": z_projs[1 - bit]})
            q_rev += 0.5 * p_flip / p_bit
    x_projs = {0: _P_PLUS, 1: _P_MINUS}
    q_x = 0.0
    for sign, state in enumerate((PLUS, MINUS)):
        rho = simulate_sqkd(attack, state, REFLECT)
        q_x += 0.5 * _probability(rho, {"T": x_projs[1 - sign]})
    return NoiseStats(q_fwd, q_rev, q_x)


def random_collective_attack(d_e: int, rng: np.random.Generator) -> CollectiveAttack:
    """Haar-random unitary pair on T (x) E."""
    d_e = _check_d_e(d_e, minimum=2)
    return CollectiveAttack(
        haar_random_unitary(2 * d_e, rng), haar_random_unitary(2 * d_e, rng), d_e
    )


def _disc_sample(rng: np.random.Generator) -> complex:
    # uniform on the unit disc: sqrt for the radial density
    radius = math.sqrt(rng.uniform(0.0, 1.0))
    angle = rng.uniform(0.0, 2.0 * math.pi)
    return complex(radius * math.cos(angle), radius * math.sin(angle))


def random_restricted_attack(d_e: int, rng: np.random.Generator) -> RestrictedAttack:
    """Random restricted attack with a Haar reverse unitary.

    Draws the bias amplitudes uniformly (snapping occasionally to the
    exact endpoints to exercise the degenerate branches) and eta0 from the
    unit disc, then solves the parameter constraint for eta1, rejecting
    draws whose solution leaves the disc.
    """
    d_e = _check_d_e(d_e, minimum=2)
    while True:
        q0, q1 = float(rng.uniform(0.0, 1.0)), float(rng.uniform(0.0, 1.0))
        snap = rng.uniform(0.0, 1.0)
        if snap < 0.05:
            q0 = float(rng.integers(0, 2))
        elif snap < 0.1:
            q1 = float(rng.integers(0, 2))
        eta0 = _disc_sample(rng)
        c_eta1 = q0 * math.sqrt(max(0.0, 1.0 - q1**2))
        c_eta0 = q1 * math.sqrt(max(0.0, 1.0 - q0**2))
        if c_eta1 < 1e-12:
            eta0 = 0.0 if c_eta0 >= 1e-12 else eta0
            eta1 = _disc_sample(rng)
            break
        eta1 = -c_eta0 * np.conj(eta0) / c_eta1
        if abs(eta1) <= 1.0:
            break
    return RestrictedAttack(q0, q1, eta0, eta1, haar_random_unitary(2 * d_e, rng), d_e)


def random_symmetric_attack(
    q: float, rng: np.random.Generator, d_e: int = 2
) -> SymmetricRestrictedAttack:
    """Random symmetric attack with exact Z error rate q in both directions.

    The forward part is (sqrt(1-q), sqrt(1-q), eta, -conj(eta)) with eta
    uniform on the unit disc. The reverse unitary is C . (R(theta) (x) I)
    where R is a rotation with flip probability sin^2(theta/2) = q and C
    is Z-controlled on the transit qubit (block-diagonal, one Haar unitary
    on E per Z value). A Z-controlled C never changes the Z statistics, so
    the reverse error rate is exactly q while the ancilla correlation
    stays arbitrary.
    """
    q = float(q)
    if not 0.0 <= q <= 0.5:
        raise ValueError(f"error rate {q} outside [0, 0.5]")
    d_e = _check_d_e(d_e, minimum=2)
    eta = _disc_sample(rng)
    half_theta = math.asin(math.sqrt(q))
    rotation = np.array(
        [
            [math.cos(half_theta), -math.sin(half_theta)],
            [math.sin(half_theta), math.cos(half_theta)],
        ],
        dtype=complex,
    )
    controlled = np.zeros((2 * d_e, 2 * d_e), dtype=complex)
    controlled[:d_e, :d_e] = haar_random_unitary(d_e, rng)
    controlled[d_e:, d_e:] = haar_random_unitary(d_e, rng)
    u = controlled @ np.kron(rotation, np.eye(d_e, dtype=complex))
    return SymmetricRestrictedAttack(q, eta, u)
