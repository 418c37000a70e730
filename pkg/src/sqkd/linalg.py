"""Dense complex linear algebra and quantum-state bookkeeping.

State vectors and operators are plain numpy arrays with dtype complex128.
Multipartite systems carry a :class:`SubsystemLayout` naming each tensor
factor, so partial traces and measurements address registers by label
instead of by axis arithmetic. Everything here is a pure function of its
inputs; RNG state is always passed explicitly.

Dimensions are small by design (full systems never exceed 64), so all
operations use dense algebra with no attempt at sparsity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tolerances import DEFAULT as TOL

VALID_LABELS = ("A", "A1", "A2", "B", "T", "E")

__all__ = [
    "VALID_LABELS",
    "SubsystemLayout",
    "layout",
    "DensityOperator",
    "basis_state",
    "tensor",
    "permute_factors",
    "embed_operator",
    "partial_trace",
    "hermitian_eigen",
    "trace_norm",
    "trace_distance",
    "binary_entropy",
    "von_neumann_entropy",
    "conditional_entropy",
    "measure_register",
    "haar_random_unitary",
    "complete_isometry",
    "unitary_fixing_columns",
]


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered, labeled tensor factors of a multipartite Hilbert space.

    ``factors`` is a tuple of (label, dimension) pairs in tensor order.
    Labels are drawn from :data:`VALID_LABELS` and must be unique within
    one layout.
    """

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in layout: {labels}")
        for lab, dim in self.factors:
            if lab not in VALID_LABELS:
                raise ValueError(f"unknown label {lab!r}; expected one of {VALID_LABELS}")
            if int(dim) < 1:
                raise ValueError(f"factor {lab!r} has non-positive dimension {dim}")

    @property
    def dim(self) -> int:
        """Total dimension, the product of all factor dimensions."""
        return math.prod(d for _, d in self.factors)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    def position(self, label: str) -> int:
        """Index of the factor carrying ``label``."""
        for i, (lab, _) in enumerate(self.factors):
            if lab == label:
                return i
        raise ValueError(f"label {label!r} not in layout {self.labels}")

    def dim_of(self, label: str) -> int:
        return self.factors[self.position(label)][1]

    def relabel(self, mapping: dict[str, str]) -> "SubsystemLayout":
        """Rename factors; labels absent from ``mapping`` are kept."""
        return SubsystemLayout(
            tuple((mapping.get(lab, lab), d) for lab, d in self.factors)
        )


def layout(*factors: tuple[str, int]) -> SubsystemLayout:
    """Convenience constructor: ``layout(("T", 2), ("E", 4))``."""
    return SubsystemLayout(tuple((str(lab), int(d)) for lab, d in factors))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A Hermitian, positive-semidefinite, unit-trace matrix with a layout.

    Construction validates all three invariants (Hermiticity and trace
    entrywise within 1e-10, eigenvalues >= -1e-10) and stores a read-only
    copy of the matrix, so instances are safe to share.
    """

    matrix: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        if m.shape[0] != self.layout.dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match layout dimension {self.layout.dim}"
            )
        if np.max(np.abs(m - m.conj().T)) > TOL.hermitian:
            raise ValueError("density operator is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > TOL.trace_one or abs(np.trace(m).imag) > TOL.trace_one:
            raise ValueError(f"density operator trace {np.trace(m)} is not 1 within tolerance")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -TOL.psd:
            raise ValueError("density operator has a negative eigenvalue beyond tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_state(cls, psi: np.ndarray, lay: SubsystemLayout) -> "DensityOperator":
        """Projector |psi><psi| of a normalized state vector."""
        v = np.asarray(psi, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(v) - 1.0) > TOL.norm:
            raise ValueError(f"state vector norm {np.linalg.norm(v)} is not 1 within tolerance")
        return cls(np.outer(v, v.conj()), lay)

    @property
    def dim(self) -> int:
        return self.layout.dim

    def relabel(self, mapping: dict[str, str]) -> "DensityOperator":
        return DensityOperator(self.matrix, self.layout.relabel(mapping))


def basis_state(dim: int, index: int) -> np.ndarray:
    """Computational basis vector |index> in the given dimension."""
    if not 0 <= index < dim:
        raise ValueError(f"basis index {index} out of range for dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices or vectors."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def permute_factors(matrix: np.ndarray, dims: tuple[int, ...], order: tuple[int, ...]) -> np.ndarray:
    """Reorder the tensor factors of an operator.

    ``order[i]`` names the original factor that ends up at position ``i``.
    """
    n = len(dims)
    if sorted(order) != list(range(n)):
        raise ValueError(f"order {order} is not a permutation of {n} factors")
    t = np.asarray(matrix, dtype=complex).reshape(tuple(dims) * 2)
    axes = list(order) + [n + i for i in order]
    d = math.prod(dims)
    return t.transpose(axes).reshape(d, d)


def embed_operator(op: np.ndarray, lay: SubsystemLayout, labels: tuple[str, ...] | list[str]) -> np.ndarray:
    """Lift an operator acting on the named factors to the full space.

    ``op`` must act on the tensor product of the listed factors in the
    listed order; identity is applied to every other factor.
    """
    positions = [lay.position(lab) for lab in labels]
    dims = lay.dims
    n = len(dims)
    rest = [i for i in range(n) if i not in positions]
    d_act = math.prod(dims[i] for i in positions)
    d_rest = math.prod(dims[i] for i in rest) if rest else 1
    op = np.asarray(op, dtype=complex)
    if op.shape != (d_act, d_act):
        raise ValueError(f"operator shape {op.shape} does not match factor dimensions {d_act}")
    full = np.kron(op, np.eye(d_rest, dtype=complex))
    shape = tuple(dims[i] for i in positions) + tuple(dims[i] for i in rest)
    full = full.reshape(shape * 2)
    perm = positions + rest
    inv = np.argsort(perm)
    full = full.transpose([int(i) for i in inv] + [n + int(i) for i in inv])
    return full.reshape(lay.dim, lay.dim)


def partial_trace(rho: DensityOperator, keep: set[str] | tuple[str, ...] | list[str]) -> DensityOperator:
    """Trace out all factors not named in ``keep``.

    The reduced operator keeps the surviving factors in their original
    order; the trace is preserved exactly.
    """
    keep_set = set(keep)
    if not keep_set:
        raise ValueError("keep must name at least one factor")
    unknown = keep_set - set(rho.layout.labels)
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} not in layout {rho.layout.labels}")
    factors = rho.layout.factors
    n = len(factors)
    dims = rho.layout.dims
    t = rho.matrix.reshape(dims * 2)
    # einsum: traced factors repeat their row letter on the column side
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = [letters[n + i] if lab in keep_set else row[i] for i, (lab, _) in enumerate(factors)]
    out = [row[i] for i, (lab, _) in enumerate(factors) if lab in keep_set]
    out += [col[i] for i, (lab, _) in enumerate(factors) if lab in keep_set]
    reduced = np.einsum("".join(row + col) + "->" + "".join(out), t)
    kept = tuple(f for f in factors if f[0] in keep_set)
    d = math.prod(dim for _, dim in kept)
    return DensityOperator(reduced.reshape(d, d), SubsystemLayout(kept))


def _require_hermitian(m: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} requires a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > TOL.hermitian_input:
        raise ValueError(f"{what} requires a Hermitian matrix")
    return (m + m.conj().T) / 2


def hermitian_eigen(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with real eigenvalues ``w`` sorted in descending
    order and unitary ``v`` whose columns are the matching eigenvectors,
    so that ``m = v @ diag(w) @ v.conj().T``.
    """
    h = _require_hermitian(m, "hermitian_eigen")
    w, v = np.linalg.eigh(h)
    return w[::-1], v[:, ::-1]


def trace_norm(m: np.ndarray) -> float:
    """Trace norm ||m||_1 of a Hermitian matrix: sum of |eigenvalues|."""
    h = _require_hermitian(m, "trace_norm")
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))


def trace_distance(r1: DensityOperator, r2: DensityOperator) -> float:
    """Trace distance (1/2)||r1 - r2||_1 between two density operators."""
    if r1.dim != r2.dim:
        raise ValueError(f"dimension mismatch: {r1.dim} vs {r2.dim}")
    return 0.5 * trace_norm(r1.matrix - r2.matrix)


def binary_entropy(x: float) -> float:
    """Binary entropy h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 := 0.

    Inputs within 1e-12 outside [0, 1] (simulation roundoff) are clamped;
    anything further out raises ValueError.
    """
    x = float(x)
    if x < -1e-12 or x > 1.0 + 1e-12:
        raise ValueError(f"binary_entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Von Neumann entropy S(rho) = -sum_i lam_i log2 lam_i in bits.

    Eigenvalues below 1e-12 are clamped to zero before taking logs.
    """
    lam = np.linalg.eigvalsh(rho.matrix)
    lam = lam[lam > TOL.eigen_clamp]
    return float(-np.sum(lam * np.log2(lam)))


def conditional_entropy(
    rho: DensityOperator,
    a: set[str] | tuple[str, ...] | list[str],
    b: set[str] | tuple[str, ...] | list[str],
) -> float:
    """Conditional von Neumann entropy S(A|B) = S(AB) - S(B).

    ``a`` and ``b`` are disjoint label subsets of the layout; both
    entropies are computed on the relevant reduced operators. An empty
    ``b`` reduces to the plain entropy of ``a``.
    """
    a_set, b_set = set(a), set(b)
    if a_set & b_set:
        raise ValueError(f"label sets overlap: {sorted(a_set & b_set)}")
    if not a_set:
        raise ValueError("conditioned set a must be nonempty")
    s_ab = von_neumann_entropy(partial_trace(rho, a_set | b_set))
    if not b_set:
        return s_ab
    return s_ab - von_neumann_entropy(partial_trace(rho, b_set))


_Z_PROJECTORS = (np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex))
_X_PROJECTORS = (
    np.full((2, 2), 0.5, dtype=complex),
    np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex),
)


def measure_register(rho: DensityOperator, label: str, basis: str) -> DensityOperator:
    """Non-selective measurement (pinching) of one qubit register.

    Applies sum_k (P_k (x) I) rho (P_k (x) I) with P_k the rank-1
    projectors of the Z or X basis; the register becomes classical
    (diagonal) in that basis. Trace-preserving and idempotent.
    """
    if rho.layout.dim_of(label) != 2:
        raise ValueError(f"register {label!r} is not a qubit")
    basis = basis.upper()
    if basis == "Z":
        projectors = _Z_PROJECTORS
    elif basis == "X":
        projectors = _X_PROJECTORS
    else:
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    out = np.zeros_like(rho.matrix)
    for p in projectors:
        full = embed_operator(p, rho.layout, [label])
        out += full @ rho.matrix @ full
    return DensityOperator(out, rho.layout)


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary.

    QR decomposition of a complex Gaussian matrix with the R diagonal
    phase-normalized, which makes the distribution exactly Haar.
    """
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def complete_isometry(columns: np.ndarray) -> np.ndarray:
    """Complete orthonormal columns to a full unitary.

    ``columns`` is an (n, k) array of k mutually orthonormal vectors
    (within 1e-8). Returns an n x n unitary whose first k columns are the
    inputs, completed over the orthogonal complement by modified
    Gram-Schmidt with one re-orthogonalization pass.
    """
    cols = np.asarray(columns, dtype=complex)
    if cols.ndim == 1:
        cols = cols.reshape(-1, 1)
    n, k = cols.shape
    if k > n:
        raise ValueError(f"cannot complete {k} columns in dimension {n}")
    gram = cols.conj().T @ cols
    if np.max(np.abs(gram - np.eye(k))) > TOL.orthonormal:
        raise ValueError("input columns are not orthonormal within tolerance")
    basis = [cols[:, j].copy() for j in range(k)]
    for j in range(n):
        if len(basis) == n:
            break
        v = basis_state(n, j)
        for _ in range(2):  # one re-orthogonalization pass after the first
            for b in basis:
                v = v - (b.conj() @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    if len(basis) != n:
        raise ValueError("failed to complete the isometry to a unitary")
    return np.column_stack(basis)


def unitary_fixing_columns(dim: int, placed: dict[int, np.ndarray]) -> np.ndarray:
    """Unitary whose column at each given index equals the given vector.

    The fixed columns must be mutually orthonormal; all other columns are
    completed arbitrarily (deterministically) over the complement.
    """
    indices = sorted(placed)
    if not indices:
        raise ValueError("at least one column must be placed")
    if indices[0] < 0 or indices[-1] >= dim:
        raise ValueError(f"column index out of range for dimension {dim}")
    stacked = np.column_stack([np.asarray(placed[i], dtype=complex) for i in indices])
    if stacked.shape[0] != dim:
        raise ValueError(f"columns have dimension {stacked.shape[0]}, expected {dim}")
    w = complete_isometry(stacked)
    rest = [i for i in range(dim) if i not in placed]
    u = np.empty((dim, dim), dtype=complex)
    u[:, indices + rest] = w
    return u
