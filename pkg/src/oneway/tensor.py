"""Labeled dense linear algebra over registers of finite-dimensional subsystems.

States are stored densely in the register's own ordering. Subsystems are
addressed by label everywhere, so the physical ordering is a storage detail:
the protocol lays out doubled registers as ``[S1', S1, S2', S2, ...]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import InvalidOperatorError, InvalidStateError, RegisterError

PRINCIPAL = "principal"
ANCILLA = "ancilla"

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
# eigenvalues in [-NEGATIVE_TOL, 0) are round-off and get clamped
NEGATIVE_TOL = 1e-9
DEGENERACY_TOL = 1e-9


def prime(label: str) -> str:
    """Label of the ancilla paired with principal ``label``."""
    return label + "'"


@dataclass(frozen=True)
class Subsystem:
    label: str
    dim: int
    role: str = PRINCIPAL
    paired_with: str | None = None


@dataclass(frozen=True)
class Register:
    """Ordered collection of uniquely labeled subsystems."""

    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        object.__setattr__(self, "subsystems", tuple(self.subsystems))
        seen = set()
        for s in self.subsystems:
            if s.label in seen:
                raise RegisterError(f"duplicate label {s.label!r}")
            seen.add(s.label)
            if int(s.dim) != s.dim or s.dim < 2:
                raise RegisterError(f"subsystem {s.label!r} needs integer dim >= 2, got {s.dim}")
            if s.role not in (PRINCIPAL, ANCILLA):
                raise RegisterError(f"unknown role {s.role!r} for {s.label!r}")
            if s.role == ANCILLA and s.paired_with is None:
                raise RegisterError(f"ancilla {s.label!r} is not paired with a principal")
        by_label = {s.label: s for s in self.subsystems}
        for s in self.subsystems:
            partner = by_label.get(s.paired_with) if s.paired_with else None
            if partner is None:
                continue
            if partner.dim != s.dim:
                raise RegisterError(f"{s.label!r} and its partner {partner.label!r} differ in dimension")
            if partner.paired_with != s.label or partner.role == s.role:
                raise RegisterError(f"inconsistent pairing between {s.label!r} and {partner.label!r}")

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Register":
        """Register of principals, e.g. ``Register.of(("A", 2), ("B", 2))``."""
        return cls(tuple(Subsystem(label, int(dim)) for label, dim in pairs))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    @property
    def principals(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems if s.role == PRINCIPAL)

    def __len__(self):
        return len(self.subsystems)

    def __contains__(self, label):
        return label in self.labels

    def subsystem(self, label: str) -> Subsystem:
        for s in self.subsystems:
            if s.label == label:
                return s
        raise RegisterError(f"unknown label {label!r}")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise RegisterError(f"unknown label {label!r}") from None

    def positions(self, labels: Iterable[str]) -> list[int]:
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise RegisterError(f"repeated label in {labels}")
        return [self.index(lab) for lab in labels]

    def restrict(self, labels: Iterable[str]) -> "Register":
        """Sub-register over ``labels``, kept in this register's order."""
        wanted = set(labels)
        for lab in wanted:
            self.index(lab)
        return Register(tuple(s for s in self.subsystems if s.label in wanted))

    def reordered(self, labels: Sequence[str]) -> "Register":
        if sorted(labels) != sorted(self.labels):
            raise RegisterError(f"{list(labels)} is not a permutation of {list(self.labels)}")
        return Register(tuple(self.subsystem(lab) for lab in labels))

    def with_ancillas(self) -> "Register":
        """Doubled register ``[S1', S1, S2', S2, ...]`` for the principals."""
        out = []
        for s in self.subsystems:
            if s.role != PRINCIPAL:
                raise RegisterError("ancillas are already attached")
            out.append(Subsystem(prime(s.label), s.dim, ANCILLA, s.label))
            out.append(Subsystem(s.label, s.dim, PRINCIPAL, prime(s.label)))
        return Register(tuple(out))


def _concat(registers: Sequence[Register]) -> Register:
    subs = []
    seen = set()
    for reg in registers:
        for s in reg.subsystems:
            if s.label in seen:
                raise RegisterError(f"duplicate label {s.label!r} in tensor product")
            seen.add(s.label)
            subs.append(s)
    return Register(tuple(subs))


@dataclass(frozen=True, eq=False)
class PureState:
    register: Register
    amplitudes: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        vec = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if vec.shape[0] != self.register.dim:
            raise InvalidStateError(
                f"expected {self.register.dim} amplitudes for {self.register.labels}, got {vec.shape[0]}"
            )
        if self.check and abs(np.linalg.norm(vec) - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state vector has norm {np.linalg.norm(vec):.12g}")
        vec = vec.view()
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    @property
    def labels(self):
        return self.register.labels

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.register.dims)

    def density(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(self.register, np.outer(v, v.conj()), check=False)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    register: Register
    matrix: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        D = self.register.dim
        if mat.shape != (D, D):
            raise InvalidStateError(f"expected a {D}x{D} matrix for {self.register.labels}, got {mat.shape}")
        if self.check:
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise InvalidStateError("density matrix is not Hermitian")
            tr = np.trace(mat)
            if abs(tr - 1.0) > TRACE_TOL:
                raise InvalidStateError(f"density matrix has trace {tr.real:.12g}")
            lo = np.linalg.eigvalsh(mat)[0]
            if lo < -NEGATIVE_TOL:
                raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3e}")
        mat = mat.view()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def maximally_mixed(cls, register: Register) -> "DensityOperator":
        D = register.dim
        return cls(register, np.eye(D) / D, check=False)

    @property
    def labels(self):
        return self.register.labels

    def tensor_view(self) -> np.ndarray:
        return self.matrix.reshape(self.register.dims * 2)

    def density(self) -> "DensityOperator":
        return self


State = Union[PureState, DensityOperator]


def basis_ket(symbol: str, dim: int) -> np.ndarray:
    """Single-subsystem ket for a literal: a digit, ``+`` or ``-``.

    ``+`` and ``-`` are the d = 2 Hadamard states; digits index the
    computational basis.
    """
    if symbol in "+-":
        if dim != 2:
            raise InvalidStateError(f"ket {symbol!r} is only defined for d = 2")
        return np.array([1.0, 1.0 if symbol == "+" else -1.0], dtype=complex) / np.sqrt(2)
    if not symbol.isdigit() or int(symbol) >= dim:
        raise InvalidStateError(f"ket {symbol!r} is not a basis index for d = {dim}")
    v = np.zeros(dim, dtype=complex)
    v[int(symbol)] = 1.0
    return v


def ket(register: Register, symbols: str) -> PureState:
    """Product state from one literal per subsystem, e.g. ``ket(reg, "+0")``."""
    if len(symbols) != len(register):
        raise InvalidStateError(f"ket {symbols!r} does not match {len(register)} subsystems")
    vec = np.ones(1, dtype=complex)
    for s, sym in zip(register.subsystems, symbols):
        vec = np.kron(vec, basis_ket(sym, s.dim))
    return PureState(register, vec)


def tensor(states: Sequence[State]) -> State:
    """Kronecker product; pure only if every factor is pure."""
    if not states:
        raise ValueError("tensor of an empty list")
    reg = _concat([s.register for s in states])
    if all(isinstance(s, PureState) for s in states):
        vec = np.ones(1, dtype=complex)
        for s in states:
            vec = np.kron(vec, s.amplitudes)
        return PureState(reg, vec, check=False)
    mat = np.ones((1, 1), dtype=complex)
    for s in states:
        mat = np.kron(mat, s.density().matrix)
    return DensityOperator(reg, mat, check=False)


def check_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise InvalidOperatorError(f"unitary must be square, got shape {U.shape}")
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > tol:
        raise InvalidOperatorError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")
    return U


def _apply_to_axes(t: np.ndarray, op: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    sub = [t.shape[a] for a in axes]
    op_t = op.reshape(sub + sub)
    res = np.tensordot(op_t, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(res, list(range(k)), axes)


def apply_unitary(state: State, U: np.ndarray, labels: Sequence[str], check: bool = True) -> State:
    """Act with ``U`` on the subsystems ``labels`` (in that order).

    Pure vectors map to ``G v`` and density operators to ``G rho G^dagger``,
    where ``G`` is ``U`` embedded with identities elsewhere.
    """
    reg = state.register
    pos = reg.positions(labels)
    sub_dim = int(np.prod([reg.dims[p] for p in pos]))
    U = np.asarray(U, dtype=complex)
    if U.shape != (sub_dim, sub_dim):
        raise InvalidOperatorError(f"operator of shape {U.shape} cannot act on {list(labels)} (dim {sub_dim})")
    if check:
        check_unitary(U)
    if isinstance(state, PureState):
        out = _apply_to_axes(state.tensor_view(), U, pos)
        return PureState(reg, out.reshape(-1), check=False)
    n = len(reg)
    t = _apply_to_axes(state.tensor_view(), U, pos)
    t = _apply_to_axes(t, U.conj(), [p + n for p in pos])
    D = reg.dim
    return DensityOperator(reg, t.reshape(D, D), check=False)


def reduced_matrix(state: State, keep: Iterable[str]) -> np.ndarray:
    """Matrix of the marginal on ``keep``, in register order."""
    reg = state.register
    keep = set(keep)
    if not keep:
        raise RegisterError("partial trace needs a nonempty set of labels to keep")
    pos = sorted(reg.positions(keep))
    rest = [i for i in range(len(reg)) if i not in pos]
    dk = int(np.prod([reg.dims[p] for p in pos]))
    if isinstance(state, PureState):
        m = np.transpose(state.tensor_view(), pos + rest).reshape(dk, -1)
        return m @ m.conj().T
    n = len(reg)
    if not rest:
        return np.array(state.matrix)
    idx_row = list(range(n))
    idx_col = list(range(n, 2 * n))
    for r in rest:
        idx_col[r] = idx_row[r]
    out = [idx_row[p] for p in pos] + [idx_col[p] for p in pos]
    red = np.einsum(state.tensor_view(), idx_row + idx_col, out)
    return red.reshape(dk, dk)


def partial_trace(state: State, keep: Iterable[str]) -> DensityOperator:
    keep = set(keep)
    mat = reduced_matrix(state, keep)
    return DensityOperator(state.register.restrict(keep), mat, check=False)


def reorder(state: State, labels: Sequence[str]) -> State:
    """Same physical state with its subsystems stored in ``labels`` order."""
    reg = state.register
    new_reg = reg.reordered(labels)
    perm = reg.positions(labels)
    if isinstance(state, PureState):
        return PureState(new_reg, np.transpose(state.tensor_view(), perm).reshape(-1), check=False)
    n = len(reg)
    t = np.transpose(state.tensor_view(), perm + [p + n for p in perm])
    return DensityOperator(new_reg, t.reshape(reg.dim, reg.dim), check=False)


def _canonical_block(vecs: np.ndarray) -> np.ndarray:
    """Basis of span(vecs) that depends only on the subspace.

    Pivoted QR of the orthogonal projector picks columns greedily, so any
    rotation inside the block gives the same output.
    """
    k = vecs.shape[1]
    # rounding keeps pivot ties from flipping on round-off
    proj = np.round(vecs @ vecs.conj().T, 12)
    q, _, _ = scipy.linalg.qr(proj, pivoting=True)
    return q[:, :k]


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        # first component whose modulus is maximal (ties within round-off)
        i = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, j] = col * (abs(col[i]) / col[i])
    return out


def eig_hermitian(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and orthonormal eigenvector
    columns. Degenerate blocks are replaced by a canonical basis of the
    eigenspace, and each vector is rephased so that its first entry of
    largest modulus is real and positive.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidOperatorError(f"expected a square matrix, got shape {H.shape}")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise InvalidOperatorError("matrix is not Hermitian")
    w, v = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    start = 0
    d = len(w)
    while start < d:
        stop = start + 1
        while stop < d and w[start] - w[stop] <= DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            v[:, start:stop] = _canonical_block(v[:, start:stop])
        start = stop
    return w, _fix_phases(v)


def clamped_spectrum(mat: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density matrix with round-off negatives set to zero."""
    w = np.linalg.eigvalsh(mat)
    if w.size and w[0] < -NEGATIVE_TOL:
        raise InvalidStateError(f"negative eigenvalue {w[0]:.3e} in density matrix")
    return np.clip(w, 0.0, None)


def dephase(state: State, bases: Mapping[str, object]) -> DensityOperator:
    """Remove every off-diagonal element in a product reference basis.

    ``bases`` maps each label to a basis (a ``Basis`` or a unitary whose
    columns are the basis kets). Diagonal probabilities are preserved.
    """
    reg = state.register
    missing = [lab for lab in reg.labels if lab not in bases]
    if missing:
        raise RegisterError(f"no dephasing basis for {missing}")
    rho = state.density()
    mats = {lab: np.asarray(getattr(bases[lab], "columns", bases[lab]), dtype=complex) for lab in reg.labels}
    for lab in reg.labels:
        rho = apply_unitary(rho, mats[lab].conj().T, [lab], check=False)
    diag = np.real(np.diagonal(rho.matrix))
    rho = DensityOperator(reg, np.diag(diag).astype(complex), check=False)
    for lab in reg.labels:
        rho = apply_unitary(rho, mats[lab], [lab], check=False)
    return rho


def validate(state: State) -> State:
    """Re-run the full validity checks on a state built with ``check=False``."""
    if isinstance(state, PureState):
        return PureState(state.register, state.amplitudes)
    return DensityOperator(state.register, state.matrix)
