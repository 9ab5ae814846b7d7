"""Orthonormal bases of single subsystems.

A basis is a unitary matrix whose columns are the basis kets. Besides the
computational and Fourier bases this module picks the basis in which a
subsystem is copied onto its ancilla: one mutually unbiased with respect
to the eigenbasis of the subsystem's input marginal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidOperatorError, InvalidStateError
from .tensor import DEGENERACY_TOL, DensityOperator, check_unitary, eig_hermitian


@dataclass(frozen=True, eq=False)
class Basis:
    columns: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        cols = check_unitary(np.asarray(self.columns, dtype=complex))
        if cols.shape[0] < 2:
            raise InvalidOperatorError("a basis needs dimension >= 2")
        cols = cols.view()
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def key(self) -> bytes:
        return self.columns.tobytes()

    def ket(self, i: int) -> np.ndarray:
        return self.columns[:, i]

    def conj(self) -> "Basis":
        """Basis of complex-conjugated kets; equal to ``self`` for real bases."""
        return Basis(self.columns.conj(), f"conj({self.name})")

    def allclose(self, other: "Basis", atol: float = 1e-10) -> bool:
        return self.dim == other.dim and np.allclose(self.columns, other.columns, atol=atol, rtol=0)

    def __repr__(self):
        return f"Basis({self.name}, d={self.dim})"


def computational_basis(d: int) -> Basis:
    if int(d) != d or d < 2:
        raise InvalidOperatorError(f"basis dimension must be an integer >= 2, got {d}")
    return Basis(np.eye(int(d), dtype=complex), "comp")


def fourier_basis(reference: Basis) -> Basis:
    """Discrete Fourier transform of ``reference``.

    Column ``j`` is ``sum_k w^(jk) e_k / sqrt(d)`` with ``w = exp(2 pi i / d)``,
    so every overlap with the reference kets has squared modulus ``1/d``.
    """
    d = reference.dim
    jk = np.outer(np.arange(d), np.arange(d))
    F = np.exp(2j * np.pi * jk / d) / np.sqrt(d)
    name = "fourier" if reference.name == "comp" else f"fourier({reference.name})"
    return Basis(reference.columns @ F, name)


def overlaps(a: Basis, b: Basis) -> np.ndarray:
    """Matrix of ``|<a_i|b_k>|^2``."""
    return np.abs(a.columns.conj().T @ b.columns) ** 2


def are_unbiased(a: Basis, b: Basis, atol: float = 1e-10) -> bool:
    return bool(np.max(np.abs(overlaps(a, b) - 1.0 / a.dim)) <= atol)


def _single_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityOperator):
        if len(rho.register) != 1:
            raise InvalidStateError(f"expected a single-subsystem state, got {rho.register.labels}")
        return np.asarray(rho.matrix)
    return np.asarray(rho, dtype=complex)


def is_maximally_mixed(rho, atol: float = DEGENERACY_TOL) -> bool:
    mat = _single_matrix(rho)
    d = mat.shape[0]
    return bool(np.max(np.abs(mat - np.eye(d) / d)) <= atol)


def diagonalizes(basis: Basis, rho, atol: float = 1e-9) -> bool:
    """True when ``rho`` is diagonal in ``basis``."""
    m = basis.columns.conj().T @ _single_matrix(rho) @ basis.columns
    return bool(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0) <= atol)


def copy_basis_for(rho, reference: Basis | None = None) -> Basis:
    """Basis in which a subsystem with marginal ``rho`` is copied.

    Returns the Fourier transform of the deterministic eigenbasis from
    :func:`eig_hermitian`. The leading eigenvector has equal, real, positive
    overlaps with every returned ket, so a pure input is maximally coherent
    with uniform phases in this basis.

    A maximally mixed marginal has every basis as an eigenbasis. It is
    copied in ``reference`` (computational if omitted), which turns it
    into the classically correlated state ``sum_i |ii><ii| / d`` in the
    basis where it will later be read out.
    """
    mat = _single_matrix(rho)
    d = mat.shape[0]
    if is_maximally_mixed(mat):
        return reference if reference is not None else computational_basis(d)
    _, vecs = eig_hermitian(mat)
    return fourier_basis(Basis(vecs, "eig"))
