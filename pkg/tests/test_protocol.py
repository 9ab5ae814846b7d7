import numpy as np
import pytest
from scipy.stats import unitary_group

from conftest import bell, haar_state, random_density
from oneway.bases import Basis, computational_basis, fourier_basis
from oneway.errors import CapacityError, InvalidStateError, RegisterError
from oneway.gates import ChannelSpec, ccnot, cnot, custom, local, swap
from oneway.protocol import (
    QUANTUM_PROJECT,
    Experiment,
    ProtocolConfig,
    Query,
    causal_matrix,
    check_capacity,
    conditional_owi,
    owi,
    prepare,
    run_protocol,
    step1_couple,
    step2_evolve,
)
from oneway.tensor import DensityOperator, PureState, Register, dephase, ket, partial_trace

AB = Register.of(("A", 2), ("B", 2))
EAB = Register.of(("E", 2), ("A", 2), ("B", 2))
PM = fourier_basis(computational_basis(2))
K0, K1 = np.eye(2)
KP, KM = (K0 + K1) / np.sqrt(2), (K0 - K1) / np.sqrt(2)


def kron(*vs):
    out = np.ones(1)
    for v in vs:
        out = np.kron(out, v)
    return out


def plus0():
    return [ket(Register.of(("A", 2)), "+"), ket(Register.of(("B", 2)), "0")]


def pair(final, a="A", b="B"):
    return owi(final, [a], [b]).value, owi(final, [b], [a]).value


def fidelity(state, psi):
    if isinstance(state, PureState):
        return abs(np.vdot(psi, state.amplitudes)) ** 2
    return float(np.real(psi.conj() @ state.matrix @ psi))


# CNOT on |+0>, step by step (order A', A, B', B)


def test_step1_plus_zero():
    s = step1_couple(plus0(), ProtocolConfig(copy_bases={"A": computational_basis(2), "B": PM}))
    expected = (kron(K0, K0) + kron(K1, K1)) / np.sqrt(2)
    expected = kron(expected, (kron(K0, K0) + kron(K1, K1)) / np.sqrt(2))
    assert fidelity(s, expected) == pytest.approx(1, abs=1e-12)


def test_step1_maximally_mixed_is_classical_copy():
    s = step1_couple([DensityOperator.maximally_mixed(Register.of(("A", 2)))], register=Register.of(("A", 2)))
    assert np.allclose(s.matrix, np.diag([0.5, 0, 0, 0.5]))


def test_step2_plus_zero():
    s = step1_couple(plus0())
    s = step2_evolve(s, ChannelSpec([cnot("A", "B")]))
    phi = kron(K0, K0) + kron(K1, K1)  # on (B', B)
    psi = kron(K0, K1) + kron(K1, K0)
    expected = (kron(K0, K0, phi) + kron(K1, K1, psi)) / 2
    assert fidelity(s, expected) == pytest.approx(1, abs=1e-12)


def test_cnot_plus_zero_final_state_and_values():
    final = prepare(AB, plus0(), ChannelSpec([cnot("A", "B")]))
    target = kron((kron(K0, K0, K0) + kron(K1, K0, K1)) / np.sqrt(2), KP)  # A' A B | B'
    target = target.reshape(2, 2, 2, 2).transpose(0, 1, 3, 2).reshape(16)  # to A' A B' B
    assert fidelity(final.state, target) >= 1 - 1e-9
    assert np.allclose(partial_trace(final.state, ["B'"]).matrix, np.outer(KP, KP))
    a2b, b2a = pair(final)
    assert a2b == pytest.approx(2, abs=1e-9)
    assert b2a == pytest.approx(0, abs=1e-9)


def test_cnot_plus_zero_dephased():
    final = prepare(AB, plus0(), ChannelSpec([cnot("A", "B")]), ProtocolConfig(mode=QUANTUM_PROJECT))
    diag = np.zeros(16)
    for a_, b_ in ((0, 0), (1, 1)):
        for bp in (0, 1):
            diag[a_ * 8 + 0 * 4 + bp * 2 + b_] = 0.25
    assert np.allclose(final.state.matrix, np.diag(diag))
    comp = {lab: np.eye(2) for lab in final.state.register.labels}
    assert np.allclose(dephase(final.state, comp).matrix, final.state.matrix)


def test_asymmetry_with_pm_references():
    cfg = ProtocolConfig(ref_bases={"A": PM, "B": PM})
    a2b, b2a = pair(prepare(AB, plus0(), ChannelSpec([cnot("A", "B")]), cfg))
    assert a2b == pytest.approx(0, abs=1e-9)
    assert b2a == pytest.approx(2, abs=1e-9)


def test_identity_with_reference_copies_is_product():
    cfg = ProtocolConfig(copy_bases={"A": PM, "B": PM}, ref_bases={"A": PM, "B": PM})
    final = prepare(AB, [ket(Register.of(("A", 2)), "0"), ket(Register.of(("B", 2)), "0")], ChannelSpec(), cfg)
    S = final.entropies
    assert S({"A'", "A"}) == pytest.approx(0, abs=1e-12)
    # each principal ends in the first reference ket, here |+>
    for lab in "AB":
        assert np.allclose(partial_trace(final.state, [lab]).matrix, np.outer(KP, KP))


def test_reverse_cnot_leaves_a_bprime_correlated():
    final = prepare(AB, plus0(), ChannelSpec([cnot("B", "A")]))
    from oneway.entropy import mutual_information

    assert mutual_information(final.state, ["A"], ["B'"]) > 0.5


def test_cnot_on_00_detects_do_nothing_instruction():
    inputs = [ket(Register.of(("A", 2)), "0"), ket(Register.of(("B", 2)), "0")]
    assert pair(prepare(AB, inputs, ChannelSpec([cnot("A", "B")])))[0] == pytest.approx(2, abs=1e-9)


# independent oracle


def _oracle_mixed_cnot() -> float:
    """Dense kron-and-trace rebuild of the pipeline for one mixed input."""
    rho_a = 0.9 * np.outer(KP, KP) + 0.1 * np.outer(KM, KM)
    rho_b = np.outer(K0, K0)
    I2 = np.eye(2)
    P = [np.outer(v, v) for v in (K0, K1)]
    Pm = [np.outer(v, v) for v in (KP, KM)]
    X = np.array([[0, 1], [1, 0]])
    Z = np.diag([1, -1])
    # copy A in {0,1} (shift X on A'), copy B in {+,-} (shift is Z on B'); order A' A B' B
    copy_a = np.kron(I2, P[0]) + np.kron(X, P[1])
    copy_b = np.kron(I2, Pm[0]) + np.kron(Z, Pm[1])
    step1 = np.kron(copy_a, copy_b)
    cnot_ab = np.kron(np.kron(I2, P[0]), np.eye(4)) + np.kron(np.kron(I2, P[1]), np.kron(I2, X))
    uncopy = np.kron(np.kron(P[0], I2) + np.kron(P[1], X), np.kron(P[0], I2) + np.kron(P[1], X))
    rho0 = np.kron(np.kron(np.outer(K0, K0), rho_a), np.kron(np.outer(KP, KP), rho_b))
    U = uncopy @ cnot_ab @ step1
    rho = U @ rho0 @ U.conj().T

    def S(keep):
        t = rho.reshape([2] * 8)
        idx = list("abcdefgh")
        out = [idx[i] for i in keep] + [idx[i + 4] for i in keep]
        for i in range(4):
            if i not in keep:
                idx[i + 4] = idx[i]
        m = np.einsum("".join(idx) + "->" + "".join(out), t).reshape(2 ** len(keep), -1)
        p = np.linalg.eigvalsh(m)
        p = p[p > 1e-15]
        return float(-(p * np.log2(p)).sum())

    Ap, A, Bp, B = 0, 1, 2, 3
    return S([B, Bp]) + S([Bp, Ap, A]) - S([Bp]) - S([B, Bp, Ap, A])


def test_mixed_input_matches_oracle():
    rho_a = DensityOperator(Register.of(("A", 2)), 0.9 * np.outer(KP, KP) + 0.1 * np.outer(KM, KM))
    final = prepare(AB, [rho_a, ket(Register.of(("B", 2)), "0")], ChannelSpec([cnot("A", "B")]))
    expected = _oracle_mixed_cnot()
    assert 0 < expected < 2
    assert owi(final, ["A"], ["B"]).value == pytest.approx(expected, abs=1e-9)


# copy-basis freedom for pure inputs


def aligned_mub(psi, rng):
    """Random basis whose kets all have overlap exactly 1/sqrt(d) with psi."""
    d = len(psi)
    M = np.column_stack([psi, rng.normal(size=(d, d - 1)) + 1j * rng.normal(size=(d, d - 1))])
    V, R = np.linalg.qr(M)
    V[:, 0] *= R[0, 0] / abs(R[0, 0])
    jk = np.outer(np.arange(d), np.arange(d))
    return Basis(V @ (np.exp(2j * np.pi * jk / d) / np.sqrt(d)))


@pytest.mark.parametrize("d", [2, 3])
def test_result_independent_of_aligned_copy_basis(d, rng):
    reg = Register.of(("A", d), ("B", d))
    ch = ChannelSpec([cnot("A", "B"), local("B", unitary_group.rvs(d, random_state=1))])
    for _ in range(10):
        a, b = haar_state(Register.of(("A", d)), rng), haar_state(Register.of(("B", d)), rng)
        base = pair(prepare(reg, [a, b], ch))
        cfg = ProtocolConfig(copy_bases={"A": aligned_mub(a.amplitudes, rng), "B": aligned_mub(b.amplitudes, rng)})
        other = pair(prepare(reg, [a, b], ch, cfg))
        assert other == pytest.approx(base, abs=1e-9)


def test_copy_basis_equal_to_eigenbasis_is_rejected():
    cfg = ProtocolConfig(copy_bases={"A": computational_basis(2)})
    with pytest.raises(InvalidStateError):
        prepare(AB, [ket(Register.of(("A", 2)), "0"), ket(Register.of(("B", 2)), "0")], ChannelSpec(), cfg)


# structural properties


def test_local_unitaries_give_zero(rng):
    worst = 0.0
    for _ in range(100):
        inputs = [random_density(Register.of(("A", 2)), rng), random_density(Register.of(("B", 2)), rng)]
        ch = ChannelSpec([local("A", unitary_group.rvs(2, random_state=rng)), local("B", unitary_group.rvs(2, random_state=rng))])
        worst = max(worst, *pair(prepare(AB, inputs, ch)))
    assert worst <= 1e-8


def test_chain_rule_haar_unitaries(rng):
    worst = 0.0
    for _ in range(100):
        inputs = [haar_state(Register.of((lab, 2)), rng) for lab in "EAB"]
        final = prepare(EAB, inputs, ChannelSpec([custom(["E", "A", "B"], unitary_group.rvs(8, random_state=rng))]))
        total = conditional_owi(final, ["E", "A"], ["B"]).value
        parts = conditional_owi(final, ["E"], ["B"]).value + conditional_owi(final, ["A"], ["B"], ["E"]).value
        worst = max(worst, abs(total - parts))
    assert worst <= 1e-8


def test_swap_independent_of_decomposition(rng):
    for _ in range(10):
        inputs = [random_density(Register.of(("A", 2)), rng), haar_state(Register.of(("B", 2)), rng)]
        mono = pair(prepare(AB, inputs, ChannelSpec([swap("A", "B")])))
        three = pair(prepare(AB, inputs, ChannelSpec([cnot("A", "B"), cnot("B", "A"), cnot("A", "B")])))
        assert three == pytest.approx(mono, abs=1e-10)


def test_two_way_flow():
    pp = [ket(Register.of(("A", 2)), "+"), ket(Register.of(("B", 2)), "+")]
    # V = C(A->B) C(B->A): the rightmost factor acts first
    a2b, b2a = pair(prepare(AB, pp, ChannelSpec([cnot("B", "A"), cnot("A", "B")])))
    assert a2b == pytest.approx(2, abs=1e-9)
    assert b2a == pytest.approx(2, abs=1e-9)


def test_non_additivity(rng):
    inputs = [haar_state(Register.of(("A", 2)), rng), haar_state(Register.of(("B", 2)), rng)]
    hh = [local("A", "H"), local("B", "H")]
    factors = [ChannelSpec(hh), ChannelSpec([cnot("B", "A")]), ChannelSpec(hh)]
    separate = sum(owi(prepare(AB, inputs, f), ["A"], ["B"]).value for f in factors)
    composed = owi(prepare(AB, inputs, ChannelSpec(hh + [cnot("B", "A")] + hh)), ["A"], ["B"]).value
    assert separate == pytest.approx(0, abs=1e-9)
    assert composed == pytest.approx(2, abs=1e-9)


def test_causation_without_correlation():
    s10 = [ket(Register.of(("A", 2)), "1"), ket(Register.of(("B", 2)), "0")]
    with_cnot = owi(prepare(AB, s10, ChannelSpec([cnot("A", "B")])), ["A"], ["B"]).value
    with_flip = owi(prepare(AB, s10, ChannelSpec([local("B", "X")])), ["A"], ["B"]).value
    assert with_cnot > 1
    assert with_flip < 1e-8


# tripartite


def test_conditional_examples():
    prod = [ket(Register.of(("E", 2)), "+"), ket(Register.of(("A", 2)), "0"), ket(Register.of(("B", 2)), "1")]
    final = prepare(EAB, prod, ChannelSpec([cnot("A", "B")]))
    assert conditional_owi(final, ["A"], ["B"], ["E"]).value == pytest.approx(2, abs=1e-9)

    ent = [bell("E", "A"), ket(Register.of(("B", 2)), "0")]
    final = prepare(EAB, ent, ChannelSpec([ccnot("E", "A", "B")]))
    assert conditional_owi(final, ["E", "A"], ["B"]).value == pytest.approx(2, abs=1e-9)
    assert conditional_owi(final, ["A"], ["B"], ["E"]).value == pytest.approx(1, abs=1e-9)
    assert conditional_owi(final, ["A"], ["B"]).value == pytest.approx(1, abs=1e-9)

    mixed = [DensityOperator.maximally_mixed(EAB)]
    final = prepare(EAB, mixed, ChannelSpec([ccnot("E", "A", "B")]))
    assert conditional_owi(final, ["A"], ["B"], ["E"]).value == pytest.approx(0.5, abs=1e-9)


def test_query_validation():
    final = prepare(AB, plus0(), ChannelSpec([cnot("A", "B")]))
    with pytest.raises(RegisterError):
        owi(final, ["A"], ["A"])
    with pytest.raises(RegisterError):
        owi(final, ["A'"], ["B"])
    with pytest.raises(RegisterError):
        owi(final, [], ["B"])


def test_metadata_and_warnings():
    final = prepare(AB, [bell()], ChannelSpec([cnot("A", "B")]))
    res = owi(final, ["A"], ["B"])
    assert res.metadata["warnings"]
    assert res.metadata["mode"] == "quantum"
    clean = owi(prepare(AB, plus0(), ChannelSpec([cnot("A", "B")])), ["A"], ["B"])
    assert clean.metadata["warnings"] == []
    assert clean.final_state_entropies[("B",)] == pytest.approx(1, abs=1e-12)
    q3 = Register.of(("A", 3), ("B", 3))
    inputs = [ket(Register.of(("A", 3)), "0"), ket(Register.of(("B", 3)), "0")]
    assert prepare(q3, inputs, ChannelSpec([cnot("A", "B")])).notes


# experiments and causal matrices


def test_run_protocol_and_causal_matrix():
    exp = Experiment(AB, tuple(plus0()), ChannelSpec([cnot("A", "B")]), queries=(Query(("A",), ("B",)), Query(("B",), ("A",))))
    values = [r.value for r in run_protocol(exp)]
    assert values == pytest.approx([2, 0], abs=1e-9)
    cm = causal_matrix(exp)
    assert np.isnan(cm.values[0, 0])
    assert cm.values[0, 1] == pytest.approx(2, abs=1e-9)
    assert cm.values[1, 0] == pytest.approx(0, abs=1e-9)
    assert [(a, b) for a, b, _ in cm.edges()] == [("A", "B")]


def test_causal_matrix_tripartite():
    exp = Experiment(EAB, (bell("E", "A"), ket(Register.of(("B", 2)), "0")), ChannelSpec([ccnot("E", "A", "B")]))
    cm = causal_matrix(exp)
    assert cm.values[1, 2] == pytest.approx(1, abs=1e-9)
    assert cm.received["B"] == pytest.approx(2, abs=1e-9)
    assert sum(v for _, v in cm.chain["B"]) == pytest.approx(cm.received["B"], abs=1e-8)
    ident = Experiment(EAB, (DensityOperator.maximally_mixed(EAB),), ChannelSpec())
    assert np.nanmax(np.abs(causal_matrix(ident).values)) < 1e-9


def test_capacity(monkeypatch):
    big = Register.of(*[(f"Q{i}", 2) for i in range(7)])
    with pytest.raises(CapacityError):
        check_capacity(big)
    assert check_capacity(big, budget=1 << 14) == 1 << 14
    monkeypatch.setenv("ONEWAY_MAX_DIM", "16")
    with pytest.raises(CapacityError):
        check_capacity(Register.of(("A", 2), ("B", 2), ("C", 2)))
