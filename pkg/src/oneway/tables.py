"""Reference scenarios with closed-form OWI values for bipartite and tripartite channels.

"Arbitrary" input states are drawn from a fixed-seed generator so that every
run is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log2
from typing import Callable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .bases import computational_basis, fourier_basis
from .gates import ChannelSpec, ccnot, cnot, cshift, custom, local, swap
from .protocol import Experiment, ProtocolConfig, Query, conditional_owi, prepare
from .tensor import DensityOperator, PureState, Register

SEED = 20190702


def random_pure(label_dims: Sequence[tuple[str, int]], rng) -> PureState:
    reg = Register.of(*label_dims)
    v = rng.normal(size=reg.dim) + 1j * rng.normal(size=reg.dim)
    return PureState(reg, v / np.linalg.norm(v))


def random_mixed(label_dims: Sequence[tuple[str, int]], rng) -> DensityOperator:
    reg = Register.of(*label_dims)
    G = rng.normal(size=(reg.dim, reg.dim)) + 1j * rng.normal(size=(reg.dim, reg.dim))
    M = G @ G.conj().T
    return DensityOperator(reg, M / np.trace(M).real)


def random_unitary(dim: int, rng) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def maximally_mixed(label_dims) -> DensityOperator:
    return DensityOperator.maximally_mixed(Register.of(*label_dims))


def max_entangled(a: str, b: str, d: int) -> PureState:
    v = np.zeros(d * d, dtype=complex)
    for i in range(d):
        v[i * d + i] = 1
    return PureState(Register.of((a, d), (b, d)), v / np.sqrt(d))


def classical_copy_pair(a: str, b: str, d: int) -> DensityOperator:
    """``sum_i |ii><ii| / d``."""
    diag = np.zeros(d * d)
    for i in range(d):
        diag[i * d + i] = 1.0 / d
    return DensityOperator(Register.of((a, d), (b, d)), np.diag(diag).astype(complex))


@dataclass(frozen=True)
class Formula:
    text: str
    fn: Callable[[int], float]

    def __call__(self, d: int) -> float:
        return float(self.fn(d))


ZERO = Formula("0", lambda d: 0.0)
TWO_LOG = Formula("2*log2(d)", lambda d: 2 * log2(d))
LOG = Formula("log2(d)", lambda d: log2(d))
ONE = Formula("1", lambda d: 1.0)
TWO = Formula("2", lambda d: 2.0)
HALF = Formula("1/2", lambda d: 0.5)


@dataclass(frozen=True)
class Row:
    number: int
    process: str
    build: Callable[[int, np.random.Generator], Experiment]
    expected: tuple[Formula, ...]
    qubits_only: bool = False


@dataclass(frozen=True)
class RowResult:
    table: int
    row: int
    process: str
    quantity: str
    computed: float
    formula: str
    expected: float

    @property
    def diff(self) -> float:
        return abs(self.computed - self.expected)


BIPARTITE_QUERIES = (Query(("A",), ("B",)), Query(("B",), ("A",)))
TRIPARTITE_QUERIES = (Query(("E", "A"), ("B",)), Query(("A",), ("B",), ("E",)), Query(("A",), ("B",)))


def _ab(d):
    return Register.of(("A", d), ("B", d))


def _eab(d):
    return Register.of(("E", d), ("A", d), ("B", d))


def _pure_ab(d, rng):
    return [random_pure([("A", d)], rng), random_pure([("B", d)], rng)]


def _exp(reg, inputs, gates, queries, config=None):
    return Experiment(reg, tuple(inputs), ChannelSpec(tuple(gates)), config or ProtocolConfig(), queries)


def _t1_local(d, rng):
    gates = [local("A", random_unitary(d, rng)), local("B", random_unitary(d, rng))]
    inputs = [random_mixed([("A", d)], rng), random_mixed([("B", d)], rng)]
    return _exp(_ab(d), inputs, gates, BIPARTITE_QUERIES)


def _t1_gate(gates_fn, pure: bool):
    def build(d, rng):
        inputs = _pure_ab(d, rng) if pure else [maximally_mixed([("A", d), ("B", d)])]
        return _exp(_ab(d), inputs, gates_fn(d), BIPARTITE_QUERIES)

    return build


def _pm(d):
    return fourier_basis(computational_basis(d))


TABLE1 = (
    Row(1, "V_A (x) W_B on rho_A (x) rho_B", _t1_local, (ZERO, ZERO)),
    Row(2, "C(A->B) on psi_A (x) phi_B", _t1_gate(lambda d: [cnot("A", "B")], True), (TWO_LOG, ZERO)),
    Row(3, "C(B->A) on psi_A (x) phi_B", _t1_gate(lambda d: [cnot("B", "A")], True), (ZERO, TWO_LOG)),
    Row(
        4,
        "C[01 -> +-](A->B) on psi_A (x) phi_B",
        _t1_gate(lambda d: [cshift("A", "B", computational_basis(d), _pm(d))], True),
        (ZERO, ZERO),
        qubits_only=True,
    ),
    Row(
        5,
        "C[+- -> +-](A->B) on psi_A (x) phi_B",
        _t1_gate(lambda d: [cshift("A", "B", _pm(d), _pm(d))], True),
        (ZERO, TWO),
        qubits_only=True,
    ),
    Row(6, "C(A->B) on I/d^2", _t1_gate(lambda d: [cnot("A", "B")], False), (LOG, ZERO)),
    Row(7, "C(B->A) on I/d^2", _t1_gate(lambda d: [cnot("B", "A")], False), (ZERO, LOG)),
    Row(8, "SWAP on psi_A (x) phi_B", _t1_gate(lambda d: [swap("A", "B")], True), (TWO_LOG, TWO_LOG)),
    Row(9, "SWAP on I/d^2", _t1_gate(lambda d: [swap("A", "B")], False), (LOG, LOG)),
)


def _t2_local(d, rng):
    gates = [custom(["E", "A"], random_unitary(d * d, rng)), local("B", random_unitary(d, rng))]
    inputs = [random_mixed([("E", d), ("A", d)], rng), random_mixed([("B", d)], rng)]
    return _exp(_eab(d), inputs, gates, TRIPARTITE_QUERIES)


def _t2(gates_fn, inputs_fn):
    def build(d, rng):
        return _exp(_eab(d), inputs_fn(d, rng), gates_fn(d), TRIPARTITE_QUERIES)

    return build


def _ent_ea_pure_b(d, rng):
    return [max_entangled("E", "A", d), random_pure([("B", d)], rng)]


def _product_pure(d, rng):
    return [random_pure([("E", d)], rng), random_pure([("A", d)], rng), random_pure([("B", d)], rng)]


def _classical_ea_mixed_b(d, rng):
    return [classical_copy_pair("E", "A", d), maximally_mixed([("B", d)])]


def _all_mixed(d, rng):
    return [maximally_mixed([("E", d), ("A", d), ("B", d)])]


L43 = Formula("3/4*log2(4/3)", lambda d: 0.75 * log2(4 / 3))
L43_HALF = Formula("3/4*log2(4/3)+1/2", lambda d: 0.75 * log2(4 / 3) + 0.5)
L43_ONE = Formula("3/2*log2(4/3)+1", lambda d: 1.5 * log2(4 / 3) + 1)

TABLE2 = (
    Row(1, "V_EA (x) W_B on rho_EA (x) rho_B", _t2_local, (ZERO, ZERO, ZERO)),
    Row(2, "C(A->B) on psi_EA (x) phi_B", _t2(lambda d: [cnot("A", "B")], _ent_ea_pure_b), (TWO_LOG, LOG, LOG)),
    Row(3, "C(B->A) on psi_EA (x) phi_B", _t2(lambda d: [cnot("B", "A")], _ent_ea_pure_b), (ZERO, ZERO, ZERO)),
    Row(4, "C(A->B) on xi_E (x) psi_A (x) phi_B", _t2(lambda d: [cnot("A", "B")], _product_pure), (TWO_LOG, TWO_LOG, TWO_LOG)),
    Row(5, "C(A->B) on sum_i |ii><ii|_EA/d (x) I_B/d", _t2(lambda d: [cnot("A", "B")], _classical_ea_mixed_b), (LOG, ZERO, LOG)),
    Row(6, "CCNOT(EA->B) on Bell_EA (x) phi_B", _t2(lambda d: [ccnot("E", "A", "B")], _ent_ea_pure_b), (TWO, ONE, ONE), True),
    Row(7, "CCNOT(EA->B) on xi_E (x) psi_A (x) phi_B", _t2(lambda d: [ccnot("E", "A", "B")], _product_pure), (L43_ONE, L43_HALF, L43_HALF), True),
    Row(8, "CCNOT(EA->B) on sum_i |ii><ii|_EA/2 (x) I_B/2", _t2(lambda d: [ccnot("E", "A", "B")], _classical_ea_mixed_b), (ONE, ZERO, ONE), True),
    Row(9, "CCNOT(EA->B) on I/8", _t2(lambda d: [ccnot("E", "A", "B")], _all_mixed), (L43_HALF, HALF, L43), True),
)

TABLES = {1: TABLE1, 2: TABLE2}
# (table, d) pairs with closed-form rows to compare against
SUPPORTED = {(1, 2), (1, 3), (2, 2)}


class UnsupportedTable(ValueError):
    pass


def rows_for(table: int, d: int) -> tuple[Row, ...]:
    if (table, d) not in SUPPORTED:
        raise UnsupportedTable(f"table {table} is not available for d = {d}; supported: {sorted(SUPPORTED)}")
    return tuple(r for r in TABLES[table] if d == 2 or not r.qubits_only)


def run_table(table: int, d: int, seed: int = SEED) -> list[RowResult]:
    """Compute every row of a reference table and pair it with its closed form."""
    out = []
    for row in rows_for(table, d):
        rng = np.random.default_rng([seed, table, row.number, d])
        exp = row.build(d, rng)
        final = prepare(exp.register, exp.inputs, exp.channel, exp.config)
        for q, formula in zip(exp.queries, row.expected):
            value = conditional_owi(final, q.source, q.target, q.given).value
            out.append(RowResult(table, row.number, row.process, q.describe(), value, formula.text, formula(d)))
    return out
