"""Controlled-shift gates, standard gates and their composition into channels.

A controlled shift reads its control in one basis and cyclically shifts its
target within another:

    C = sum_i |b_i><b_i| (x) X_c^(sign * i),   X_c |c_j> = |c_(j+1 mod d)>

With both bases computational and d = 2 this is the CNOT.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .bases import Basis, computational_basis
from .errors import InvalidOperatorError, RegisterError
from .tensor import ANCILLA, Register, State, apply_unitary, check_unitary

_cache: dict = {}
_cache_lock = threading.Lock()


def _memo(key, build):
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    value = build()
    value.setflags(write=False)
    with _cache_lock:
        _cache.setdefault(key, value)
    return value


def shift_matrix(d: int, k: int = 1) -> np.ndarray:
    """``X^k`` with ``X|j> = |j+1 mod d>``."""
    return np.roll(np.eye(d, dtype=complex), k % d, axis=0)


def clock_matrix(d: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def _shift_in(basis: Basis, k: int) -> np.ndarray:
    B = basis.columns
    return B @ shift_matrix(basis.dim, k) @ B.conj().T


def controlled_shift(control_basis: Basis, target_basis: Basis, sign: int = 1, d: int | None = None) -> np.ndarray:
    """Unitary on (control, target) shifting the target by ``sign * i`` for control ket ``i``."""
    if sign not in (1, -1):
        raise InvalidOperatorError(f"sign must be +1 or -1, got {sign}")
    if control_basis.dim != target_basis.dim or (d is not None and d != control_basis.dim):
        raise InvalidOperatorError(
            f"dimension mismatch: control d={control_basis.dim}, target d={target_basis.dim}"
            + ("" if d is None else f", requested d={d}")
        )

    def build():
        n = control_basis.dim
        out = np.zeros((n * n, n * n), dtype=complex)
        for i in range(n):
            b = control_basis.ket(i)
            out += np.kron(np.outer(b, b.conj()), _shift_in(target_basis, sign * i))
        return out

    return _memo(("cshift", control_basis.key, target_basis.key, sign), build)


def and_predicate(indices: tuple[int, ...]) -> int:
    """Shift by one exactly when every control reads 1 (Toffoli)."""
    return int(all(i == 1 for i in indices))


def multi_controlled(
    control_bases: Sequence[Basis],
    predicate: Union[Callable[[tuple], int], Mapping[tuple, int]],
    target_basis: Basis,
) -> np.ndarray:
    """``sum_i |i><i| (x) X_c^predicate(i)`` over tuples ``i`` of control kets.

    ``predicate`` may be a callable or a full table mapping index tuples to
    integer shift amounts.
    """
    dims = [b.dim for b in control_bases]
    d = target_basis.dim
    lookup = predicate.__getitem__ if isinstance(predicate, Mapping) else predicate
    D = int(np.prod(dims))
    out = np.zeros((D * d, D * d), dtype=complex)
    for idx in itertools.product(*(range(n) for n in dims)):
        try:
            amount = lookup(idx)
        except KeyError:
            raise InvalidOperatorError(f"shift table has no entry for control indices {idx}") from None
        if isinstance(amount, bool) or int(amount) != amount:
            raise InvalidOperatorError(f"shift amount {amount!r} for {idx} is not an integer")
        ket = np.ones(1, dtype=complex)
        for b, i in zip(control_bases, idx):
            ket = np.kron(ket, b.ket(i))
        out += np.kron(np.outer(ket, ket.conj()), _shift_in(target_basis, int(amount)))
    return out


def swap_matrix(d: int) -> np.ndarray:
    perm = [j * d + i for i in range(d) for j in range(d)]
    return np.eye(d * d, dtype=complex)[perm]


def standard(kind: str, d: int = 2) -> np.ndarray:
    """Matrix of ``X``, ``Z``, ``H`` or ``SWAP``.

    ``X`` and ``Z`` generalize to the shift and clock matrices for d > 2;
    ``H`` exists only for qubits.
    """
    kind = kind.upper()
    if d < 2:
        raise InvalidOperatorError(f"dimension must be >= 2, got {d}")
    if kind == "X":
        return shift_matrix(d)
    if kind == "Z":
        return clock_matrix(d)
    if kind == "H":
        if d != 2:
            raise InvalidOperatorError("H is only defined for d = 2")
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if kind == "SWAP":
        return swap_matrix(d)
    raise InvalidOperatorError(f"unsupported gate {kind!r} for d = {d}")


CONTROLLED = "controlled_shift"
MULTI = "multi_controlled"
SWAP = "swap"
LOCAL = "local"
CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class GateApplication:
    """One gate in a channel, addressed by subsystem labels.

    ``labels`` lists controls first and the target last for controlled
    kinds. Missing bases default to computational in the register's
    dimension. ``matrix`` holds the unitary for local/custom gates or a
    standard gate name (``"X"``, ``"Z"``, ``"H"``).
    """

    kind: str
    labels: tuple[str, ...]
    control_bases: tuple[Basis | None, ...] = ()
    target_basis: Basis | None = None
    sign: int = 1
    matrix: np.ndarray | str | None = None
    predicate: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise RegisterError(f"gate {self.kind} uses a label twice: {self.labels}")
        if self.kind not in (CONTROLLED, MULTI, SWAP, LOCAL, CUSTOM):
            raise InvalidOperatorError(f"unknown gate kind {self.kind!r}")
        if self.kind == CONTROLLED and len(self.labels) != 2:
            raise InvalidOperatorError("controlled shift needs exactly one control and one target")
        if self.kind == SWAP and len(self.labels) != 2:
            raise InvalidOperatorError("swap needs two labels")
        if self.kind == LOCAL and len(self.labels) != 1:
            raise InvalidOperatorError("local gate acts on one label")

    def matrix_for(self, register: Register) -> np.ndarray:
        """Unitary acting on ``self.labels`` with dimensions taken from ``register``."""
        dims = [register.subsystem(lab).dim for lab in self.labels]
        if self.kind == CONTROLLED:
            cb = self.control_bases[0] if self.control_bases and self.control_bases[0] else computational_basis(dims[0])
            tb = self.target_basis or computational_basis(dims[1])
            return controlled_shift(cb, tb, self.sign)
        if self.kind == MULTI:
            cbs = [
                (self.control_bases[k] if k < len(self.control_bases) and self.control_bases[k] else computational_basis(n))
                for k, n in enumerate(dims[:-1])
            ]
            tb = self.target_basis or computational_basis(dims[-1])
            pred = self.predicate or and_predicate
            key = ("multi", tuple(b.key for b in cbs), tb.key, pred)
            return _memo(key, lambda: multi_controlled(cbs, pred, tb))
        if self.kind == SWAP:
            if dims[0] != dims[1]:
                raise InvalidOperatorError(f"swap between unequal dimensions {dims}")
            return standard("SWAP", dims[0])
        if isinstance(self.matrix, str):
            return standard(self.matrix, dims[0])
        U = check_unitary(np.asarray(self.matrix, dtype=complex))
        if U.shape[0] != int(np.prod(dims)):
            raise InvalidOperatorError(f"matrix of size {U.shape[0]} does not fit {self.labels} (dim {np.prod(dims)})")
        return U

    def describe(self) -> str:
        name = self.matrix if isinstance(self.matrix, str) else self.kind
        return f"{name}({', '.join(self.labels)})"


def cnot(control: str, target: str) -> GateApplication:
    return GateApplication(CONTROLLED, (control, target))


def cshift(control: str, target: str, control_basis=None, target_basis=None, sign: int = 1) -> GateApplication:
    return GateApplication(CONTROLLED, (control, target), (control_basis,), target_basis, sign)


def ccnot(control1: str, control2: str, target: str) -> GateApplication:
    return GateApplication(MULTI, (control1, control2, target), predicate=and_predicate)


def swap(a: str, b: str) -> GateApplication:
    return GateApplication(SWAP, (a, b))


def local(label: str, U) -> GateApplication:
    """Single-subsystem gate: a unitary or one of ``"X"``, ``"Z"``, ``"H"``."""
    return GateApplication(LOCAL, (label,), matrix=U)


def custom(labels: Sequence[str], U) -> GateApplication:
    return GateApplication(CUSTOM, tuple(labels), matrix=np.asarray(U, dtype=complex))


@dataclass(frozen=True)
class ChannelSpec:
    applications: tuple[GateApplication, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "applications", tuple(self.applications))

    @property
    def labels(self) -> set[str]:
        return {lab for g in self.applications for lab in g.labels}

    def validate_for(self, register: Register) -> None:
        for g in self.applications:
            for lab in g.labels:
                sub = register.subsystem(lab)
                if sub.role == ANCILLA:
                    raise RegisterError(f"channel acts on ancilla {lab!r}; it may only touch principal systems")
            if g.kind == CONTROLLED or g.kind == MULTI:
                dims = {register.subsystem(lab).dim for lab in g.labels}
                if len(dims) != 1:
                    raise InvalidOperatorError(f"{g.describe()} mixes dimensions {sorted(dims)}")
                if g.kind == MULTI and g.predicate in (None, and_predicate) and dims != {2}:
                    raise InvalidOperatorError("the CCNOT preset requires qubits (d = 2)")


def apply_channel(state: State, channel: ChannelSpec) -> State:
    """Apply each gate in order (first application acts first)."""
    channel.validate_for(state.register)
    for g in channel.applications:
        state = apply_unitary(state, g.matrix_for(state.register), g.labels, check=False)
    return state


def compose(channel: ChannelSpec, register: Register) -> np.ndarray:
    """Total unitary of ``channel`` on ``register``, in register order."""
    channel.validate_for(register)
    D = register.dim
    out = np.eye(D, dtype=complex)
    for g in channel.applications:
        U = g.matrix_for(register)
        pos = register.positions(g.labels)
        t = out.reshape(register.dims * 2)
        k = len(pos)
        sub = [register.dims[p] for p in pos]
        res = np.tensordot(U.reshape(sub + sub), t, axes=(list(range(k, 2 * k)), pos))
        out = np.moveaxis(res, list(range(k)), pos).reshape(D, D)
    return out


def embed(U: np.ndarray, labels: Sequence[str], register: Register) -> np.ndarray:
    """Full-register matrix of ``U`` acting on ``labels``."""
    return compose(ChannelSpec((custom(labels, U),)), register)
