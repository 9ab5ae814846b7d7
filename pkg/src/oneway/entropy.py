"""Von Neumann entropy, mutual information and conditional mutual information, in bits."""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import IntegrityError, RegisterError
from .tensor import DensityOperator, PureState, State, clamped_spectrum, reduced_matrix

MI_TOL = 1e-9
CMI_TOL = 1e-8


def entropy_of_spectrum(eigenvalues) -> float:
    """``-sum p log2 p`` with ``0 log 0 = 0``."""
    p = np.asarray(eigenvalues, dtype=float)
    p = p[p > 0]
    h = float(-np.sum(p * np.log2(p)))
    return h if h > 0 else 0.0


def von_neumann_entropy(rho) -> float:
    """Entropy of a density operator (or raw density matrix) in bits."""
    if isinstance(rho, PureState):
        return 0.0
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    return entropy_of_spectrum(clamped_spectrum(mat))


def shannon_entropy(probabilities) -> float:
    return entropy_of_spectrum(np.clip(np.asarray(probabilities, dtype=float), 0.0, None))


class EntropyTable:
    """Memoized marginal entropies of one state, keyed by label set.

    For pure states the smaller of a subset and its complement is
    diagonalized, since both have the same spectrum.
    """

    def __init__(self, state: State):
        self.state = state
        self._values: dict[frozenset, float] = {}

    def __call__(self, labels: Iterable[str]) -> float:
        key = frozenset(labels)
        if key not in self._values:
            self._values[key] = self._compute(key)
        return self._values[key]

    def _compute(self, key: frozenset) -> float:
        reg = self.state.register
        for lab in key:
            reg.index(lab)
        if not key:
            return 0.0
        if isinstance(self.state, PureState):
            rest = frozenset(reg.labels) - key
            if not rest:
                return 0.0
            dk = int(np.prod([reg.subsystem(lab).dim for lab in key]))
            if dk > reg.dim // dk:
                key = rest
        return von_neumann_entropy(reduced_matrix(self.state, key))

    def values(self) -> Mapping[frozenset, float]:
        return dict(self._values)


def _table(state, table: EntropyTable | None) -> EntropyTable:
    if table is not None:
        return table
    return EntropyTable(state)


def _disjoint(*sets: Iterable[str]) -> list[frozenset]:
    out = [frozenset(s) for s in sets]
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            common = out[i] & out[j]
            if common:
                raise RegisterError(f"label sets overlap on {sorted(common)}")
    return out


def mutual_information(state: State, alpha: Iterable[str], beta: Iterable[str], table: EntropyTable | None = None) -> float:
    """``S(alpha) + S(beta) - S(alpha beta)``."""
    a, b = _disjoint(alpha, beta)
    S = _table(state, table)
    value = S(a) + S(b) - S(a | b)
    if value < -MI_TOL:
        raise IntegrityError(f"mutual information {value:.3e} < 0 for {sorted(a)} : {sorted(b)}")
    return value


def conditional_mutual_information(
    state: State,
    alpha: Iterable[str],
    gamma: Iterable[str],
    beta: Iterable[str],
    table: EntropyTable | None = None,
) -> float:
    """``I(alpha : gamma | beta) = I(alpha : beta gamma) - I(alpha : beta)``.

    Raises :class:`IntegrityError` when the result is below ``-1e-8``;
    strong subadditivity forbids that for any valid state.
    """
    a, g, b = _disjoint(alpha, gamma, beta)
    S = _table(state, table)
    value = mutual_information(state, a, b | g, S) - (mutual_information(state, a, b, S) if b else 0.0)
    if value < -CMI_TOL:
        raise IntegrityError(f"conditional mutual information {value:.3e} < 0 for {sorted(a)} : {sorted(g)} | {sorted(b)}")
    return value
