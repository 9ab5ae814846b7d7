"""Classical registers: the same copy / evolve / un-copy scheme on digit strings.

A classical device can only copy digits (``a' = a``), permute register
configurations and subtract (``a <- a - a' mod d``). The resulting
Shannon conditional mutual information is what a classical machine sees.
:func:`quantum_classical_owi` runs the same classical inputs through the
quantum pipeline followed by dephasing, which can detect more.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .entropy import CMI_TOL, shannon_entropy
from .errors import IntegrityError, InvalidOperatorError, InvalidStateError, RegisterError
from .gates import ChannelSpec, GateApplication, custom
from .tensor import DensityOperator, Register, State, prime

PROB_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ClassicalDist:
    """Sparse probability distribution over digit strings of a labeled register."""

    register: tuple[tuple[str, int], ...]
    probabilities: Mapping[tuple[int, ...], float]

    def __post_init__(self):
        reg = tuple((str(lab), int(d)) for lab, d in self.register)
        Register.of(*reg)  # label and dimension checks
        probs = {}
        for digits, p in dict(self.probabilities).items():
            digits = tuple(int(x) for x in digits)
            if len(digits) != len(reg) or any(not 0 <= x < d for x, (_, d) in zip(digits, reg)):
                raise InvalidStateError(f"digit string {digits} does not fit register {reg}")
            if p < -PROB_TOL:
                raise InvalidStateError(f"negative probability {p} for {digits}")
            if p > 0:
                probs[digits] = probs.get(digits, 0.0) + float(p)
        total = sum(probs.values())
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidStateError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "register", reg)
        object.__setattr__(self, "probabilities", probs)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.register)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.register)

    def __eq__(self, other):
        if not isinstance(other, ClassicalDist) or self.register != other.register:
            return NotImplemented
        keys = set(self.probabilities) | set(other.probabilities)
        return all(abs(self.probabilities.get(k, 0.0) - other.probabilities.get(k, 0.0)) <= PROB_TOL for k in keys)

    @classmethod
    def deterministic(cls, register, digits: Sequence[int]) -> "ClassicalDist":
        return cls(tuple(register), {tuple(digits): 1.0})

    @classmethod
    def uniform(cls, register) -> "ClassicalDist":
        register = tuple(register)
        configs = list(itertools.product(*(range(d) for _, d in register)))
        return cls(register, {c: 1.0 / len(configs) for c in configs})

    @classmethod
    def from_state(cls, state: State, atol: float = 1e-10) -> "ClassicalDist":
        """Distribution of a state that is diagonal in the computational basis."""
        mat = state.density().matrix
        off = mat - np.diag(np.diag(mat))
        if np.max(np.abs(off), initial=0.0) > atol:
            raise InvalidStateError("state has coherences in the computational basis; it is not classical")
        reg = state.register
        probs = {}
        for flat, p in enumerate(np.real(np.diag(mat))):
            if p > PROB_TOL:
                probs[tuple(int(x) for x in np.unravel_index(flat, reg.dims))] = float(p)
        total = sum(probs.values())
        return cls(tuple(zip(reg.labels, reg.dims)), {k: v / total for k, v in probs.items()})

    def to_density(self) -> DensityOperator:
        reg = Register.of(*self.register)
        diag = np.zeros(reg.dim)
        for digits, p in self.probabilities.items():
            diag[np.ravel_multi_index(digits, self.dims)] = p
        return DensityOperator(reg, np.diag(diag).astype(complex))

    def marginal(self, labels: Iterable[str]) -> dict[tuple[int, ...], float]:
        pos = sorted(self.labels.index(lab) for lab in set(labels))
        out = defaultdict(float)
        for digits, p in self.probabilities.items():
            out[tuple(digits[i] for i in pos)] += p
        return dict(out)

    def entropy(self, labels: Iterable[str]) -> float:
        labels = set(labels)
        for lab in labels:
            if lab not in self.labels:
                raise RegisterError(f"unknown label {lab!r}")
        if not labels:
            return 0.0
        return shannon_entropy(list(self.marginal(labels).values()))


@dataclass(frozen=True, eq=False)
class ClassicalGate:
    """Reversible gate: a bijection on the digit strings of ``labels``."""

    labels: tuple[str, ...]
    mapping: Mapping[tuple[int, ...], tuple[int, ...]]

    def __post_init__(self):
        labels = tuple(self.labels)
        mapping = {tuple(k): tuple(v) for k, v in dict(self.mapping).items()}
        if len(set(mapping.values())) != len(mapping) or set(mapping.values()) != set(mapping):
            raise InvalidOperatorError(f"gate on {labels} is not a permutation of digit strings")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def from_function(cls, labels: Sequence[str], dims: Sequence[int], fn) -> "ClassicalGate":
        configs = itertools.product(*(range(d) for d in dims))
        return cls(tuple(labels), {c: tuple(fn(c)) for c in configs})

    @classmethod
    def from_unitary(cls, labels: Sequence[str], dims: Sequence[int], U, atol: float = 1e-10) -> "ClassicalGate":
        """Read a permutation off a unitary that maps computational kets to
        computational kets (phases are irrelevant on classical inputs)."""
        U = np.asarray(U, dtype=complex)
        mags = np.abs(U)
        D = int(np.prod(dims))
        if U.shape != (D, D):
            raise InvalidOperatorError(f"matrix of shape {U.shape} does not fit {tuple(labels)}")
        rows = np.argmax(mags, axis=0)
        if not np.allclose(mags[rows, np.arange(D)], 1.0, atol=atol) or not np.allclose(mags.sum(axis=0), 1.0, atol=atol):
            raise InvalidOperatorError(f"gate on {tuple(labels)} does not permute computational basis states")
        mapping = {}
        for col in range(D):
            src = tuple(int(x) for x in np.unravel_index(col, dims))
            mapping[src] = tuple(int(x) for x in np.unravel_index(int(rows[col]), dims))
        return cls(tuple(labels), mapping)

    @classmethod
    def from_application(cls, g: GateApplication, register: Register) -> "ClassicalGate":
        if g.kind in ("controlled_shift", "multi_controlled"):
            bases = [b for b in (*g.control_bases, g.target_basis) if b is not None]
            if any(not np.allclose(b.columns, np.eye(b.dim)) for b in bases):
                raise InvalidOperatorError(f"{g.describe()} uses non-computational bases; not a classical gate")
        dims = [register.subsystem(lab).dim for lab in g.labels]
        return cls.from_unitary(g.labels, dims, g.matrix_for(register))

    def to_unitary(self, dims: Sequence[int]) -> np.ndarray:
        D = int(np.prod(dims))
        U = np.zeros((D, D), dtype=complex)
        for src, dst in self.mapping.items():
            U[np.ravel_multi_index(dst, dims), np.ravel_multi_index(src, dims)] = 1.0
        return U

    def apply(self, digits: dict[str, int]) -> None:
        key = tuple(digits[lab] for lab in self.labels)
        try:
            out = self.mapping[key]
        except KeyError:
            raise InvalidOperatorError(f"gate on {self.labels} has no entry for {key}") from None
        for lab, v in zip(self.labels, out):
            digits[lab] = v


def _as_gates(channel, register: Register) -> list[ClassicalGate]:
    if isinstance(channel, ChannelSpec):
        channel.validate_for(register)
        return [ClassicalGate.from_application(g, register) for g in channel.applications]
    return list(channel)


def _query_parts(query, given):
    if hasattr(query, "source"):
        return tuple(query.source), tuple(query.target), tuple(getattr(query, "given", ()))
    src, tgt = query[0], query[1]
    cond = query[2] if len(query) > 2 else given
    norm = lambda x: (x,) if isinstance(x, str) else tuple(x)
    return norm(src), norm(tgt), norm(cond)


def classical_final_dist(dist: ClassicalDist, channel) -> ClassicalDist:
    """Copy each digit to a zeroed ancilla, run the channel, subtract the ancilla."""
    reg = Register.of(*dist.register)
    gates = _as_gates(channel, reg)
    for g in gates:
        for lab in g.labels:
            if lab not in dist.labels:
                raise RegisterError(f"gate acts on unknown system {lab!r}")
    doubled = []
    for lab, d in dist.register:
        doubled += [(prime(lab), d), (lab, d)]
    dims = dict(dist.register)
    out = defaultdict(float)
    for digits, p in dist.probabilities.items():
        state = dict(zip(dist.labels, digits))
        anc = {lab: (0 + state[lab]) % dims[lab] for lab in dist.labels}
        for g in gates:
            g.apply(state)
        final = {lab: (state[lab] - anc[lab]) % dims[lab] for lab in dist.labels}
        key = []
        for lab in dist.labels:
            key += [anc[lab], final[lab]]
        out[tuple(key)] += p
    return ClassicalDist(tuple(doubled), dict(out))


def _shannon_owi(final: ClassicalDist, source, target, given) -> tuple[float, dict]:
    alpha = set(target)
    gamma = {prime(s) for s in source} | set(source)
    beta = {prime(t) for t in target} | {prime(c) for c in given} | set(given)
    overlap = (set(source) & set(target)) | (set(given) & (set(source) | set(target)))
    if overlap:
        raise RegisterError(f"source, target and conditioned sets overlap on {sorted(overlap)}")
    H = final.entropy
    value = H(alpha | beta) + H(beta | gamma) - H(beta) - H(alpha | beta | gamma)
    if value < -CMI_TOL:
        raise IntegrityError(f"classical conditional mutual information {value:.3e} < 0")
    order = final.labels
    entropies = {}
    for subset in (alpha, beta, alpha | beta, beta | gamma, alpha | beta | gamma):
        if subset:
            entropies[tuple(lab for lab in order if lab in subset)] = H(subset)
    return value, entropies


def run_classical_protocol(dist: ClassicalDist, channel, query, given: Sequence[str] = ()) -> float:
    """OWI a classical register detects: Shannon ``I(T : S'S | T' C'C)``.

    ``query`` is a :class:`~oneway.protocol.Query` or a ``(source, target[, given])`` tuple.
    """
    source, target, cond = _query_parts(query, given)
    for lab in (*source, *target, *cond):
        if lab not in dist.labels:
            raise RegisterError(f"query names unknown system {lab!r}")
    final = classical_final_dist(dist, channel)
    return _shannon_owi(final, source, target, cond)[0]


def quantum_classical_owi(dist: ClassicalDist, channel, query, given: Sequence[str] = ()) -> float:
    """Same classical inputs through the quantum pipeline plus final dephasing."""
    from .protocol import QUANTUM_PROJECT, ProtocolConfig, conditional_owi, prepare

    source, target, cond = _query_parts(query, given)
    reg = Register.of(*dist.register)
    if isinstance(channel, ChannelSpec):
        spec = channel
    else:
        spec = ChannelSpec(
            tuple(custom(g.labels, g.to_unitary([reg.subsystem(lab).dim for lab in g.labels])) for g in channel)
        )
    final = prepare(reg, [dist.to_density()], spec, ProtocolConfig(mode=QUANTUM_PROJECT))
    return conditional_owi(final, source, target, cond).value


def _classical_setup(exp, budget):
    from .protocol import check_capacity, joint_input

    check_capacity(exp.register, budget)
    for lab, b in exp.config.ref_bases.items():
        if not np.allclose(b.columns, np.eye(b.dim)):
            raise InvalidOperatorError(f"classical mode requires computational reference bases; {lab!r} uses {b.name}")
    dist = ClassicalDist.from_state(joint_input(exp.register, exp.inputs))
    return dist, classical_final_dist(dist, exp.channel)


def run_classical_experiment(exp, budget: int | None = None):
    from .protocol import CLASSICAL, QueryResult

    dist, final = _classical_setup(exp, budget)
    results = []
    for q in exp.queries:
        value, entropies = _shannon_owi(final, q.source, q.target, q.given)
        cut = set(q.source) | set(q.target)
        warnings = []
        mi = dist.entropy(q.source) + dist.entropy(q.target) - dist.entropy(cut)
        if mi > 1e-9:
            warnings.append(
                f"input is correlated across {','.join(q.source)}|{','.join(q.target)} "
                f"(mutual information {mi:.6g} bits); the measure ignores initial correlations"
            )
        metadata = {
            "mode": CLASSICAL,
            "bases": {"copy": {lab: "comp" for lab in dist.labels}, "reference": {lab: "comp" for lab in dist.labels}},
            "warnings": warnings,
            "notes": [],
        }
        results.append(QueryResult(value, q.source, q.target, q.given, entropies, metadata))
    return results


def classical_causal_matrix(exp, budget: int | None = None):
    from .protocol import build_causal_matrix

    _, final = _classical_setup(exp, budget)
    return build_causal_matrix(exp.register.labels, lambda s, t, c: _shannon_owi(final, s, t, c)[0])
