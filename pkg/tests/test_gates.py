import numpy as np
import pytest

from oneway.bases import computational_basis, fourier_basis
from oneway.errors import InvalidOperatorError, RegisterError
from oneway.gates import (
    ChannelSpec,
    and_predicate,
    ccnot,
    cnot,
    compose,
    controlled_shift,
    custom,
    local,
    multi_controlled,
    standard,
    swap,
)
from oneway.tensor import Register, apply_unitary, ket

COMP = computational_basis(2)
PM = fourier_basis(COMP)
H = standard("H")
CNOT = np.eye(4)[[0, 1, 3, 2]]
AB = Register.of(("A", 2), ("B", 2))


def test_cnot_from_controlled_shift():
    assert np.allclose(controlled_shift(COMP, COMP), CNOT)


def test_comp_control_pm_target_is_cz():
    assert np.allclose(controlled_shift(COMP, PM), np.diag([1, 1, 1, -1]))


def test_pm_pm_is_reversed_cnot():
    HH = np.kron(H, H)
    reversed_cnot = np.eye(4)[[0, 3, 2, 1]]
    assert np.allclose(controlled_shift(PM, PM), reversed_cnot)
    assert np.allclose(HH @ controlled_shift(PM, PM) @ HH, CNOT)


def test_shift_sign_inverts(rng):
    d = 3
    b = fourier_basis(computational_basis(d))
    fwd = controlled_shift(b, computational_basis(d), +1)
    back = controlled_shift(b, computational_basis(d), -1)
    assert np.allclose(back @ fwd, np.eye(9))
    with pytest.raises(InvalidOperatorError):
        controlled_shift(b, computational_basis(d), 2)
    with pytest.raises(InvalidOperatorError):
        controlled_shift(COMP, computational_basis(3))


def test_toffoli_truth_table():
    T = multi_controlled([COMP, COMP], and_predicate, COMP)
    reg = Register.of(("E", 2), ("A", 2), ("B", 2))
    assert np.allclose(apply_unitary(ket(reg, "110"), T, reg.labels).amplitudes, ket(reg, "111").amplitudes)
    assert np.allclose(apply_unitary(ket(reg, "100"), T, reg.labels).amplitudes, ket(reg, "100").amplitudes)
    assert np.allclose(multi_controlled([COMP, COMP], lambda i: 0, COMP), np.eye(8))


def test_multi_controlled_table_predicate():
    table = {(i, j): (i + j) % 3 for i in range(3) for j in range(3)}
    c3 = computational_basis(3)
    U = multi_controlled([c3, c3], table, c3)
    assert np.allclose(U @ U.conj().T, np.eye(27))
    with pytest.raises(InvalidOperatorError):
        multi_controlled([c3, c3], {(0, 0): 1}, c3)


def test_standard_gates():
    assert np.allclose(standard("SWAP"), np.eye(4)[[0, 2, 1, 3]])
    assert np.allclose(H, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    X3 = standard("X", 3)
    for j in range(3):
        assert np.allclose(X3 @ np.eye(3)[j], np.eye(3)[(j + 1) % 3])
    with pytest.raises(InvalidOperatorError):
        standard("H", 3)


def test_compose_examples():
    assert np.allclose(compose(ChannelSpec([cnot("A", "B")]), AB), CNOT)
    hh = [local("A", "H"), local("B", "H")]
    conj = ChannelSpec(hh + [cnot("B", "A")] + hh)
    assert np.allclose(compose(conj, AB), CNOT)
    three = ChannelSpec([cnot("A", "B"), cnot("B", "A"), cnot("A", "B")])
    assert np.allclose(compose(three, AB), compose(ChannelSpec([swap("A", "B")]), AB))


def test_compose_order_first_gate_acts_first():
    ch = ChannelSpec([local("A", "H"), cnot("A", "B")])
    expected = CNOT @ np.kron(H, np.eye(2))
    assert np.allclose(compose(ch, AB), expected)


def test_compose_chunking_invariant(rng):
    reg = Register.of(("A", 2), ("B", 2), ("C", 2))
    gates = [cnot("A", "B"), local("C", "H"), ccnot("A", "C", "B"), swap("A", "C")]
    whole = compose(ChannelSpec(gates), reg)
    halves = compose(ChannelSpec(gates[2:]), reg) @ compose(ChannelSpec(gates[:2]), reg)
    assert np.allclose(whole, halves)


def test_validation():
    reg = Register.of(("A", 2), ("B", 3))
    with pytest.raises(InvalidOperatorError):
        ChannelSpec([cnot("A", "B")]).validate_for(reg)
    with pytest.raises(RegisterError):
        ChannelSpec([cnot("A", "A")])
    doubled = AB.with_ancillas()
    with pytest.raises(RegisterError):
        ChannelSpec([cnot("A", "A'")]).validate_for(doubled)
    q3 = Register.of(("E", 3), ("A", 3), ("B", 3))
    with pytest.raises(InvalidOperatorError):
        ChannelSpec([ccnot("E", "A", "B")]).validate_for(q3)
    with pytest.raises(InvalidOperatorError):
        compose(ChannelSpec([custom(["A"], np.array([[1, 1], [0, 1]]))]), AB)
