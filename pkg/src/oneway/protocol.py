"""Ancilla-assisted detection of one-way information (OWI) through a unitary channel.

Every principal system S gets an ancilla S'. The pipeline is

1. copy: a controlled shift S -> S' in the copy basis of S correlates each
   system with its ancilla;
2. evolve: the channel acts on the principals only;
3. un-copy: a negative controlled shift S' -> S in the reference basis;
4. (optional) dephase everything in the product reference basis.

The OWI that a source set sends to a target set is the conditional mutual
information ``I(T : S'S | T' [C'C])`` of the final state.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bases import Basis, computational_basis, copy_basis_for, diagonalizes, is_maximally_mixed
from .entropy import MI_TOL, EntropyTable, conditional_mutual_information, mutual_information
from .errors import CapacityError, InvalidStateError, RegisterError
from .gates import ChannelSpec, apply_channel, controlled_shift
from .tensor import (
    ANCILLA,
    PRINCIPAL,
    PureState,
    Register,
    State,
    apply_unitary,
    dephase,
    partial_trace,
    prime,
    reorder,
    tensor,
)

QUANTUM = "quantum"
QUANTUM_PROJECT = "quantum_project"
CLASSICAL = "classical"
MODES = (QUANTUM, QUANTUM_PROJECT, CLASSICAL)

DEFAULT_DIM_BUDGET = 4096
BUDGET_ENV = "ONEWAY_MAX_DIM"


def dimension_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise CapacityError(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    if value < 4:
        raise CapacityError(f"{BUDGET_ENV} must be at least 4, got {value}")
    return value


def check_capacity(register: Register, budget: int | None = None) -> int:
    """Doubled dimension of ``register``; raises when it exceeds the budget."""
    budget = dimension_budget() if budget is None else budget
    doubled = register.dim**2
    if doubled > budget:
        raise CapacityError(
            f"doubled Hilbert-space dimension {doubled} exceeds the budget of {budget} "
            f"(set {BUDGET_ENV} to raise it)"
        )
    return doubled


@dataclass(frozen=True)
class ProtocolConfig:
    """Basis choices and mode. Missing copy bases are chosen automatically,
    missing reference bases default to computational."""

    copy_bases: Mapping[str, Basis] = field(default_factory=dict)
    ref_bases: Mapping[str, Basis] = field(default_factory=dict)
    mode: str = QUANTUM

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def project_final(self) -> bool:
        return self.mode == QUANTUM_PROJECT


@dataclass(frozen=True)
class Query:
    source: tuple[str, ...]
    target: tuple[str, ...]
    given: tuple[str, ...] = ()

    def __post_init__(self):
        for name in ("source", "target", "given"):
            object.__setattr__(self, name, as_labels(getattr(self, name)))

    def describe(self) -> str:
        text = f"owi {','.join(self.source)}->{','.join(self.target)}"
        if self.given:
            text += f" given {','.join(self.given)}"
        return text


@dataclass(frozen=True, eq=False)
class QueryResult:
    value: float
    source: tuple[str, ...]
    target: tuple[str, ...]
    conditioned: tuple[str, ...]
    final_state_entropies: dict[tuple[str, ...], float]
    metadata: dict

    @property
    def query(self) -> Query:
        return Query(self.source, self.target, self.conditioned)


@dataclass(frozen=True, eq=False)
class FinalState:
    """Output of the pipeline plus what is needed to annotate queries."""

    state: State
    principals: Register
    joint_input: State
    copy_bases: dict[str, Basis]
    ref_bases: dict[str, Basis]
    mode: str
    notes: tuple[str, ...] = ()
    entropies: EntropyTable = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "entropies", EntropyTable(self.state))


@dataclass(frozen=True, eq=False)
class Experiment:
    """Principal systems, their input states, a channel and the queries to run."""

    register: Register
    inputs: tuple[State, ...]
    channel: ChannelSpec
    config: ProtocolConfig = field(default_factory=ProtocolConfig)
    queries: tuple[Query, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "queries", tuple(self.queries))


def joint_input(register: Register, inputs: Sequence[State]) -> State:
    """Product of the input groups, reordered to ``register`` order."""
    covered = [lab for s in inputs for lab in s.register.labels]
    missing = [lab for lab in register.labels if lab not in covered]
    if missing:
        raise InvalidStateError(f"no input state for {missing}")
    extra = [lab for lab in covered if lab not in register]
    if extra:
        raise RegisterError(f"input states name undeclared systems {extra}")
    for s in inputs:
        for sub in s.register.subsystems:
            if register.subsystem(sub.label).dim != sub.dim:
                raise RegisterError(f"input for {sub.label!r} has dimension {sub.dim}, declared {register.subsystem(sub.label).dim}")
    return reorder(tensor(list(inputs)), register.labels)


def resolve_bases(register: Register, joint: State, config: ProtocolConfig) -> tuple[dict, dict]:
    copy, ref = {}, {}
    for sub in register.subsystems:
        lab, d = sub.label, sub.dim
        r = config.ref_bases.get(lab) or computational_basis(d)
        if r.dim != d:
            raise RegisterError(f"reference basis for {lab!r} has d={r.dim}, system has d={d}")
        marginal = partial_trace(joint, [lab])
        c = config.copy_bases.get(lab)
        if c is None:
            c = copy_basis_for(marginal, reference=r)
        else:
            if c.dim != d:
                raise RegisterError(f"copy basis for {lab!r} has d={c.dim}, system has d={d}")
            if not is_maximally_mixed(marginal) and diagonalizes(c, marginal):
                raise InvalidStateError(
                    f"copy basis for {lab!r} is an eigenbasis of its input state; "
                    "choose a basis unbiased with respect to the eigenbasis"
                )
        copy[lab], ref[lab] = c, r
    return copy, ref


def _ancilla_zero(label: str, basis: Basis) -> PureState:
    sub_reg = Register.of((label, basis.dim))
    return PureState(sub_reg, basis.conj().ket(0))


def step1_couple(inputs: Sequence[State] | State, config: ProtocolConfig = ProtocolConfig(), register: Register | None = None) -> State:
    """Attach ancillas and copy each principal onto its ancilla.

    The ancilla of S starts in the zero ket of the conjugated copy basis and
    the copy shifts it to ``conj(b_i)`` when S reads ``b_i``. For real copy
    bases this is the plain copy; for complex ones it makes a maximally
    coherent pure input land in ``sum_i |ii>/sqrt(d)`` whatever the basis.
    """
    if not isinstance(inputs, (list, tuple)):
        inputs = [inputs]
    if register is None:
        register = Register.of(*[(s.label, s.dim) for st in inputs for s in st.register.subsystems])
    joint = joint_input(register, inputs)
    copy, _ = resolve_bases(register, joint, config)
    return _couple(register, joint, copy)


def _couple(register: Register, joint: State, copy: Mapping[str, Basis]) -> State:
    doubled = register.with_ancillas()
    ancillas = [_ancilla_zero(prime(lab), copy[lab]) for lab in register.labels]
    state = tensor(ancillas + [joint])
    state = reorder(state, doubled.labels)
    # reorder loses the ancilla/principal roles: reattach the doubled register
    state = _with_register(state, doubled)
    for lab in register.labels:
        b = copy[lab]
        state = apply_unitary(state, controlled_shift(b, b.conj(), +1), [lab, prime(lab)], check=False)
    return state


def _with_register(state: State, register: Register) -> State:
    if isinstance(state, PureState):
        return PureState(register, state.amplitudes, check=False)
    return type(state)(register, state.matrix, check=False)


def step2_evolve(state: State, channel: ChannelSpec) -> State:
    return apply_channel(state, channel)


def step3_decouple(state: State, ref_bases: Mapping[str, Basis] | ProtocolConfig | None = None) -> State:
    """Un-copy with control on each ancilla and a negative shift on its principal,
    both in the principal's reference basis."""
    if isinstance(ref_bases, ProtocolConfig):
        ref_bases = ref_bases.ref_bases
    ref_bases = ref_bases or {}
    reg = state.register
    for sub in reg.subsystems:
        if sub.role != PRINCIPAL:
            continue
        if sub.paired_with is None:
            raise RegisterError(f"principal {sub.label!r} has no ancilla attached")
        r = ref_bases.get(sub.label) or computational_basis(sub.dim)
        state = apply_unitary(state, controlled_shift(r, r, -1), [sub.paired_with, sub.label], check=False)
    return state


def step4_project(state: State, ref_bases: Mapping[str, Basis] | None = None):
    """Dephase in the product reference basis; ancillas use their partner's basis."""
    ref_bases = ref_bases or {}
    per_label = {}
    for sub in state.register.subsystems:
        owner = sub.paired_with if sub.role == ANCILLA else sub.label
        per_label[sub.label] = ref_bases.get(owner) or computational_basis(sub.dim)
    return dephase(state, per_label)


def prepare(
    register: Register,
    inputs: Sequence[State],
    channel: ChannelSpec,
    config: ProtocolConfig = ProtocolConfig(),
    budget: int | None = None,
) -> FinalState:
    """Run the quantum pipeline and return the final state of the doubled register."""
    if config.mode == CLASSICAL:
        raise ValueError("classical mode runs through oneway.classical, not the quantum pipeline")
    check_capacity(register, budget)
    joint = joint_input(register, inputs)
    channel.validate_for(register)
    copy, ref = resolve_bases(register, joint, config)
    state = _couple(register, joint, copy)
    state = step2_evolve(state, channel)
    state = step3_decouple(state, ref)
    if config.project_final:
        state = step4_project(state, ref)
    notes = []
    if any(d > 2 for d in register.dims):
        notes.append("d>2: un-copy applied as G rho G^dagger (identical to G rho G only for qubits)")
    return FinalState(state, register, joint, copy, ref, config.mode, tuple(notes))


def as_labels(labels) -> tuple[str, ...]:
    """A single label string or an iterable of labels, as a tuple."""
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


def _principal_set(final: FinalState, labels: Iterable[str], role: str) -> tuple[str, ...]:
    labels = as_labels(labels)
    for lab in labels:
        if lab not in final.principals:
            raise RegisterError(f"{role} label {lab!r} is not a principal system")
    return labels


def _canonical(final: FinalState, labels) -> tuple[str, ...]:
    return tuple(lab for lab in final.state.register.labels if lab in set(labels))


def _basis_summary(final: FinalState) -> dict:
    return {
        "copy": {lab: b.name for lab, b in final.copy_bases.items()},
        "reference": {lab: b.name for lab, b in final.ref_bases.items()},
    }


def _cut_warning(final: FinalState, source, target) -> list[str]:
    table = EntropyTable(final.joint_input)
    mi = mutual_information(final.joint_input, source, target, table)
    if mi > MI_TOL:
        return [
            f"input is correlated across {','.join(source)}|{','.join(target)} "
            f"(mutual information {mi:.6g} bits); the measure ignores initial correlations"
        ]
    return []


def conditional_owi(final: FinalState, source, target, conditioned=()) -> QueryResult:
    """``I(T : S'S | T' C'C)`` on the final state."""
    src = _principal_set(final, source, "source")
    tgt = _principal_set(final, target, "target")
    cond = _principal_set(final, conditioned, "conditioned")
    if not src or not tgt:
        raise RegisterError("source and target must be nonempty")
    common = (set(src) & set(tgt)) | (set(src) & set(cond)) | (set(tgt) & set(cond))
    if common:
        raise RegisterError(f"source, target and conditioned sets overlap on {sorted(common)}")
    alpha = set(tgt)
    gamma = {prime(s) for s in src} | set(src)
    beta = {prime(t) for t in tgt} | {prime(c) for c in cond} | set(cond)
    S = final.entropies
    value = conditional_mutual_information(final.state, alpha, gamma, beta, S)
    used = [alpha, beta, alpha | beta, beta | gamma, alpha | beta | gamma]
    entropies = {}
    for subset in used:
        if subset:
            entropies[_canonical(final, subset)] = S(subset)
    metadata = {
        "mode": final.mode,
        "bases": _basis_summary(final),
        "warnings": _cut_warning(final, src, tgt),
        "notes": list(final.notes),
    }
    return QueryResult(value, src, tgt, cond, entropies, metadata)


def owi(final: FinalState, source, target) -> QueryResult:
    """OWI sent from ``source`` to ``target``: ``I(T : S'S | T')``.

    Systems outside source and target are traced out, not conditioned on.
    """
    return conditional_owi(final, source, target, ())


def evaluate(final: FinalState, query: Query) -> QueryResult:
    return conditional_owi(final, query.source, query.target, query.given)


def _as_experiment(spec) -> Experiment:
    if isinstance(spec, Experiment):
        return spec
    build = getattr(spec, "to_experiment", None)
    if build is None:
        raise TypeError(f"cannot run a protocol from {type(spec).__name__}")
    return build()


def run_protocol(spec, budget: int | None = None) -> list[QueryResult]:
    """Evaluate every query of a parsed spec (or an :class:`Experiment`)."""
    exp = _as_experiment(spec)
    if not exp.queries:
        raise ValueError("experiment has no queries")
    if exp.config.mode == CLASSICAL:
        from .classical import run_classical_experiment

        return run_classical_experiment(exp, budget)
    final = prepare(exp.register, exp.inputs, exp.channel, exp.config, budget)
    return [evaluate(final, q) for q in exp.queries]


@dataclass(frozen=True, eq=False)
class CausalMatrix:
    """Pairwise conditional OWI: ``values[a, b]`` is ``C(a -> b | all others)``."""

    labels: tuple[str, ...]
    values: np.ndarray
    row_sums: dict[str, float]
    received: dict[str, float]
    chain: dict[str, list[tuple[str, float]]]

    def edges(self, threshold: float = 1e-6) -> list[tuple[str, str, float]]:
        out = []
        for i, a in enumerate(self.labels):
            for j, b in enumerate(self.labels):
                if i != j and self.values[i, j] > threshold:
                    out.append((a, b, float(self.values[i, j])))
        return out


def causal_matrix(spec, budget: int | None = None) -> CausalMatrix:
    """Conditional OWI over all ordered principal pairs.

    Also reports each row's total, the OWI each target receives from all
    other systems together, and its chain-rule split into terms
    ``I(T : S_k'S_k | T' S_1'S_1 ... S_(k-1)'S_(k-1))`` in declaration order.
    """
    exp = _as_experiment(spec)
    labels = exp.register.labels
    if len(labels) < 2:
        raise RegisterError("a causal matrix needs at least two principal systems")
    if exp.config.mode == CLASSICAL:
        from .classical import classical_causal_matrix

        return classical_causal_matrix(exp, budget)
    final = prepare(exp.register, exp.inputs, exp.channel, exp.config, budget)
    return build_causal_matrix(labels, lambda src, tgt, cond: conditional_owi(final, src, tgt, cond).value)


def build_causal_matrix(labels: Sequence[str], measure) -> CausalMatrix:
    """Assemble a :class:`CausalMatrix` from ``measure(source, target, given)``."""
    labels = tuple(labels)
    n = len(labels)
    values = np.full((n, n), np.nan)
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if i != j:
                others = [c for c in labels if c not in (a, b)]
                values[i, j] = measure([a], [b], others)
    row_sums = {a: float(np.nansum(values[i])) for i, a in enumerate(labels)}
    received, chain = {}, {}
    for b in labels:
        sources = [a for a in labels if a != b]
        received[b] = measure(sources, [b], [])
        chain[b] = [(a, measure([a], [b], sources[:k])) for k, a in enumerate(sources)]
    return CausalMatrix(labels, values, row_sums, received, chain)
