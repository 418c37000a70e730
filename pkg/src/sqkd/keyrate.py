"""Closed-form key-rate bound and noise-tolerance thresholds.

The asymptotic key rate of the protocol is lower-bounded by

    r(Q) = g(Q, Q_X) - h(Q),

where h is the binary entropy, Q the Z error rate (assumed equal in both
channel directions), Q_X the X error rate on reflect rounds, and g chains
three analytic bounds: an entropic uncertainty relation lower-bounding the
eavesdropper's ignorance on reflect rounds by 1 - h(Q_X), a continuity
penalty delta(Q) for transporting that bound onto key rounds, and a floor
branch covering the regime where the penalty would exceed the bound. The
trade-off between the channel models linking Q_X to Q yields the noise
tolerances found by :func:`noise_threshold`.

All functions here are pure and operate on plain floats; attack
simulations live in :mod:`sqkd.attacks`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import binary_entropy

__all__ = [
    "MAIN_BRANCH",
    "FLOOR_BRANCH",
    "QxModel",
    "EQUAL",
    "DEPOLARIZING",
    "HALF",
    "explicit",
    "KeyRateReport",
    "ThresholdAtBoundary",
    "continuity_bound",
    "continuity_penalty",
    "reflect_entropy_bound",
    "resend_entropy_bound",
    "key_rate",
    "noise_threshold",
    "keyrate_curve",
]

MAIN_BRANCH = "main"
FLOOR_BRANCH = "floor"

_MODEL_KINDS = ("equal", "depolarizing", "half", "explicit")


@dataclass(frozen=True)
class QxModel:
    """Channel model linking the X error rate to the Z error rate.

    ``equal`` sets Q_X = Q, ``depolarizing`` Q_X = 2Q(1-Q), ``half``
    Q_X = Q/2, and ``explicit`` pins Q_X to a fixed value in [0, 1/2]
    regardless of Q.
    """

    kind: str
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in _MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {_MODEL_KINDS}")
        value = float(self.value)
        if self.kind == "explicit" and not 0.0 <= value <= 0.5:
            raise ValueError(f"explicit X error rate {value} outside [0, 0.5]")
        object.__setattr__(self, "value", value)

    def q_x(self, q: float) -> float:
        if self.kind == "equal":
            return q
        if self.kind == "depolarizing":
            return 2.0 * q * (1.0 - q)
        if self.kind == "half":
            return 0.5 * q
        return self.value

    @classmethod
    def parse(cls, text: str) -> "QxModel":
        """Parse ``equal``, ``depolarizing``, ``half``, or ``explicit:<value>``."""
        text = text.strip().lower()
        if text in ("equal", "depolarizing", "half"):
            return cls(text)
        if text.startswith("explicit:"):
            try:
                value = float(text.partition(":")[2])
            except ValueError:
                raise ValueError(f"cannot parse X error rate in {text!r}") from None
            return cls("explicit", value)
        raise ValueError(
            f"unknown model {text!r}; expected equal, depolarizing, half, or explicit:<value>"
        )

    def __str__(self) -> str:
        if self.kind == "explicit":
            return f"explicit:{self.value:.12g}"
        return self.kind


EQUAL = QxModel("equal")
DEPOLARIZING = QxModel("depolarizing")
HALF = QxModel("half")


def explicit(value: float) -> QxModel:
    """Model pinning Q_X to a fixed value."""
    return QxModel("explicit", value)


@dataclass(frozen=True)
class KeyRateReport:
    """All intermediate quantities of one key-rate evaluation.

    ``epsilon`` is the trace-distance bound 4Q(1-Q), ``delta`` the
    continuity penalty, ``s_tau_bound`` the uncertainty-relation bound
    1 - h(Q_X), ``branch`` which arm of the resend bound applied, ``g``
    the resulting bound on the eavesdropper's ignorance on key rounds,
    and ``r = g - h(Q)`` the key rate.
    """

    q: float
    q_x: float
    epsilon: float
    delta: float
    s_tau_bound: float
    branch: str
    g: float
    r: float

    def __post_init__(self) -> None:
        if self.branch not in (MAIN_BRANCH, FLOOR_BRANCH):
            raise ValueError(f"unknown branch {self.branch!r}")

    def as_dict(self) -> dict[str, float | str]:
        """Field mapping with the exact column names of the CSV schema."""
        return {
            "Q": self.q,
            "Q_X": self.q_x,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "s_tau_bound": self.s_tau_bound,
            "branch": self.branch,
            "g": self.g,
            "r": self.r,
        }


class ThresholdAtBoundary(RuntimeError):
    """The key rate stayed nonnegative on the whole domain [0, 1/2]."""

    def __init__(self, boundary_rate: float):
        super().__init__(
            f"no sign change on [0, 0.5]: key rate at the boundary is {boundary_rate}"
        )
        self.boundary_rate = boundary_rate


def _check_range(name: str, value: float, low: float, high: float) -> float:
    value = float(value)
    if not low - 1e-12 <= value <= high + 1e-12:
        raise ValueError(f"{name}={value} outside [{low}, {high}]")
    return min(max(value, low), high)


def continuity_bound(eps: float) -> float:
    """Entropy-difference bound eps + (1+eps) h(eps/(1+eps)).

    Two states of a qubit-environment pair at trace distance at most eps
    have conditional entropies S(qubit|environment) differing by at most
    this amount.
    """
    eps = _check_range("eps", eps, 0.0, 1.0)
    if eps == 0.0:
        return 0.0
    return eps + (1.0 + eps) * binary_entropy(eps / (1.0 + eps))


def continuity_penalty(q: float) -> float:
    """The penalty delta(Q) for carrying the reflect-round entropy bound
    over to key rounds:

        delta = 2Q(1-Q) + (1/2 + 2Q(1-Q)) h(4Q(1-Q) / (1 + 4Q(1-Q))),

    which equals half the continuity bound evaluated at eps = 4Q(1-Q),
    the trace-distance bound between the reflect and auxiliary states.
    """
    q = _check_range("Q", q, 0.0, 1.0)
    half_eps = 2.0 * q * (1.0 - q)
    if half_eps == 0.0:
        return 0.0
    eps = 2.0 * half_eps
    return half_eps + (0.5 + half_eps) * binary_entropy(eps / (1.0 + eps))


def reflect_entropy_bound(q_x: float) -> float:
    """Uncertainty-relation bound 1 - h(Q_X) on S(A1^Z|E) in reflect rounds.

    The eavesdropper's uncertainty about the Z value is at least one bit
    minus what the X-basis disagreement reveals.
    """
    q_x = _check_range("Q_X", q_x, 0.0, 0.5)
    return 1.0 - binary_entropy(q_x)


def resend_entropy_bound(s_tau: float, q: float) -> tuple[float, str]:
    """Lower bound on S(A1^Z|E) in key rounds, with the branch taken.

    Key rounds mix the reflect state with an auxiliary state that is
    within trace distance 4Q(1-Q) of it. When the reflect-round bound
    ``s_tau`` is at least twice the continuity penalty, the main branch
    s_tau - delta applies; otherwise concavity alone gives the floor
    branch s_tau / 2. The two branches agree at the crossover.
    """
    s_tau = _check_range("s_tau", s_tau, 0.0, 1.0)
    delta = continuity_penalty(q)
    if s_tau >= 2.0 * delta:
        return s_tau - delta, MAIN_BRANCH
    return 0.5 * s_tau, FLOOR_BRANCH


def key_rate(q: float, model: QxModel) -> KeyRateReport:
    """Key-rate bound r = g - h(Q) at Z error rate Q under a channel model."""
    q = _check_range("Q", q, 0.0, 0.5)
    q_x = model.q_x(q)
    s_tau = reflect_entropy_bound(q_x)
    g, branch = resend_entropy_bound(s_tau, q)
    return KeyRateReport(
        q=q,
        q_x=q_x,
        epsilon=4.0 * q * (1.0 - q),
        delta=continuity_penalty(q),
        s_tau_bound=s_tau,
        branch=branch,
        g=g,
        r=g - binary_entropy(q),
    )


_GRID_STEP = 1e-3
_MONOTONE_SLACK = 1e-12


def noise_threshold(model: QxModel, tol: float = 1e-6) -> float:
    """Largest Z error rate with a nonnegative key rate, to precision tol.

    Scans r(Q) on a grid of step 1e-3 over [0, 1/2], requiring it to be
    monotone decreasing (within 1e-12) so the first sign change is the
    only one, then bisects that bracket down to width ``tol`` and returns
    its midpoint. Raises :class:`ThresholdAtBoundary` if the rate never
    goes negative and ValueError if r(0) <= 0 or monotonicity fails.
    """
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    steps = round(0.5 / _GRID_STEP)
    grid = [i * _GRID_STEP for i in range(steps + 1)]
    rates = [key_rate(q, model).r for q in grid]
    if rates[0] <= 0.0:
        raise ValueError(f"key rate at Q=0 is {rates[0]}, not positive")
    for i in range(steps):
        if rates[i + 1] > rates[i] + _MONOTONE_SLACK:
            raise ValueError(
                f"key rate is not monotone decreasing near Q={grid[i]:.3f} "
                f"({rates[i]} -> {rates[i + 1]})"
            )
    bracket = next((i for i in range(steps) if rates[i] >= 0.0 > rates[i + 1]), None)
    if bracket is None:
        raise ThresholdAtBoundary(rates[-1])
    lo, hi = grid[bracket], grid[bracket + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if key_rate(mid, model).r >= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def keyrate_curve(q_min: float, q_max: float, steps: int, model: QxModel) -> list[KeyRateReport]:
    """Key-rate reports on a uniform grid of ``steps`` points over [q_min, q_max]."""
    q_min = _check_range("q_min", q_min, 0.0, 0.5)
    q_max = _check_range("q_max", q_max, 0.0, 0.5)
    if not q_min < q_max:
        raise ValueError(f"empty range: q_min={q_min} must be below q_max={q_max}")
    steps = int(steps)
    if steps < 2:
        raise ValueError(f"steps={steps} must be at least 2")
    return [key_rate(float(q), model) for q in np.linspace(q_min, q_max, steps)]
