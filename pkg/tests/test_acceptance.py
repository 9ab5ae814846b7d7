"""Acceptance criteria 1-9. Each test prints one PASS/FAIL line with its measurements."""

import time

import numpy as np
from scipy.stats import unitary_group

from conftest import haar_state, random_density
from oneway.bases import computational_basis, fourier_basis
from oneway.classical import ClassicalDist, quantum_classical_owi, run_classical_protocol
from oneway.cli import main
from oneway.entropy import conditional_mutual_information
from oneway.gates import ChannelSpec, cnot, custom, local, swap
from oneway.protocol import ProtocolConfig, conditional_owi, owi, prepare, run_protocol
from oneway.specfile import format_complex, parse, serialize
from oneway.errors import SpecError
from oneway.tables import run_table
from oneway.tensor import Register, ket

AB = Register.of(("A", 2), ("B", 2))


def matrix_text(m):
    return "[" + ", ".join("[" + ", ".join(format_complex(z) for z in row) + "]" for row in m) + "]"


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _plus0():
    return [ket(Register.of(("A", 2)), "+"), ket(Register.of(("B", 2)), "0")]


def test_1_table1(capsys):
    t0 = time.perf_counter()
    qubit, qutrit = run_table(1, 2), run_table(1, 3)
    elapsed = time.perf_counter() - t0
    rows = qubit + qutrit
    worst = max(r.diff for r in rows)
    n2, n3 = len({r.row for r in qubit}), len({r.row for r in qutrit})
    ok = worst <= 1e-9 and elapsed < 5.0 and n2 == 9
    report(capsys, 1, ok, f"table 1: {n2} rows at d=2, {n3} rows at d=3, max |diff| {worst:.1e}, {elapsed:.2f} s (< 5 s)")


def test_2_cnot_plus_zero(capsys):
    final = prepare(AB, _plus0(), ChannelSpec([cnot("A", "B")]))
    k0, k1 = np.eye(2)
    kp = (k0 + k1) / np.sqrt(2)
    # (|000> + |101>)_{A'AB} / sqrt2 (x) |+>_{B'}, reordered to A' A B' B
    target = (np.kron(np.kron(k0, k0), k0) + np.kron(np.kron(k1, k0), k1)) / np.sqrt(2)
    target = np.kron(target, kp).reshape(2, 2, 2, 2).transpose(0, 1, 3, 2).reshape(16)
    fid = abs(np.vdot(target, final.state.amplitudes)) ** 2
    a2b, b2a = owi(final, "A", "B").value, owi(final, "B", "A").value
    ok = fid >= 1 - 1e-9 and abs(a2b - 2) <= 1e-9 and abs(b2a) <= 1e-9
    report(capsys, 2, ok, f"fidelity {fid:.12f}, C(A->B) = {a2b:.12f}, C(B->A) = {b2a:.12f}")


def test_3_table2(capsys):
    t0 = time.perf_counter()
    rows = run_table(2, 2)
    elapsed = time.perf_counter() - t0
    worst = max(r.diff for r in rows)
    ok = worst <= 1e-9 and elapsed < 10.0 and len({r.row for r in rows}) == 9
    report(capsys, 3, ok, f"table 2 at d=2 ({len(rows)} values), max |diff| {worst:.1e}, {elapsed:.2f} s (< 10 s)")


def test_4_asymmetry(capsys):
    pm = fourier_basis(computational_basis(2))
    final = prepare(AB, _plus0(), ChannelSpec([cnot("A", "B")]), ProtocolConfig(ref_bases={"A": pm, "B": pm}))
    a2b, b2a = owi(final, "A", "B").value, owi(final, "B", "A").value
    ok = abs(a2b) <= 1e-9 and abs(b2a - 2) <= 1e-9
    report(capsys, 4, ok, f"{{+,-}} references: C(A->B) = {a2b:.12f}, C(B->A) = {b2a:.12f}")


def test_5_classical_comparison(capsys):
    dist = ClassicalDist.deterministic((("A", 2), ("B", 2)), (0, 0))
    ch = ChannelSpec([cnot("A", "B")])
    classical = run_classical_protocol(dist, ch, ("A", "B"))
    quantum = quantum_classical_owi(dist, ch, ("A", "B"))
    ok = classical == 0 and abs(quantum - 1) <= 1e-9
    report(capsys, 5, ok, f"classical register {classical!r}, quantum with final dephasing {quantum:.12f}")


def test_6_chain_rule(capsys):
    rng = np.random.default_rng(6)
    reg = Register.of(("E", 2), ("A", 2), ("B", 2))
    worst = 0.0
    for _ in range(100):
        inputs = [haar_state(Register.of((lab, 2)), rng) for lab in "EAB"]
        final = prepare(reg, inputs, ChannelSpec([custom(["E", "A", "B"], unitary_group.rvs(8, random_state=rng))]))
        total = conditional_owi(final, ["E", "A"], ["B"]).value
        split = conditional_owi(final, ["E"], ["B"]).value + conditional_owi(final, ["A"], ["B"], ["E"]).value
        worst = max(worst, abs(total - split))
    report(capsys, 6, worst <= 1e-8, f"100 Haar 3-qubit unitaries, max |C(EA->B) - C(E->B) - C(A->B|E)| = {worst:.1e}")


def test_7_property_suites(capsys):
    rng = np.random.default_rng(7)
    reg3 = Register.of(("X", 2), ("Y", 2), ("Z", 2))
    ssa = min(
        conditional_mutual_information(random_density(reg3, rng, rank=int(rng.integers(1, 9))), ["X"], ["Z"], ["Y"])
        for _ in range(500)
    )

    local_worst = 0.0
    for _ in range(100):
        inputs = [random_density(Register.of(("A", 2)), rng), random_density(Register.of(("B", 2)), rng)]
        ch = ChannelSpec([local("A", unitary_group.rvs(2, random_state=rng)), local("B", unitary_group.rvs(2, random_state=rng))])
        final = prepare(AB, inputs, ch)
        local_worst = max(local_worst, owi(final, "A", "B").value, owi(final, "B", "A").value)

    s10 = [ket(Register.of(("A", 2)), "1"), ket(Register.of(("B", 2)), "0")]
    causal = owi(prepare(AB, s10, ChannelSpec([cnot("A", "B")])), "A", "B").value
    flip = owi(prepare(AB, s10, ChannelSpec([local("B", "X")])), "A", "B").value

    swap_gap = 0.0
    for _ in range(20):
        inputs = [random_density(Register.of(("A", 2)), rng), haar_state(Register.of(("B", 2)), rng)]
        mono = prepare(AB, inputs, ChannelSpec([swap("A", "B")]))
        three = prepare(AB, inputs, ChannelSpec([cnot("A", "B"), cnot("B", "A"), cnot("A", "B")]))
        for s, t in (("A", "B"), ("B", "A")):
            swap_gap = max(swap_gap, abs(owi(mono, s, t).value - owi(three, s, t).value))

    ok = ssa >= -1e-8 and local_worst <= 1e-8 and causal > 1 and flip < 1e-8 and swap_gap <= 1e-10
    report(
        capsys,
        7,
        ok,
        f"min CMI {ssa:.1e} over 500 states; local max {local_worst:.1e} over 100 channels; "
        f"CNOT vs X_B on |10>: {causal:.6f} vs {flip:.1e}; SWAP decomposition gap {swap_gap:.1e}",
    )


def test_8_parser(capsys):
    from hypothesis import HealthCheck, given, settings

    from test_specfile import PLUS_ZERO, specs

    count = 0

    @settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(specs())
    def round_trip(spec):
        nonlocal count
        count += 1
        text = serialize(spec)
        assert parse(text) == spec
        assert serialize(parse(text)) == text

    round_trip()

    broken = {
        "syntax": PLUS_ZERO.replace("system B dim 2", "system B dim"),
        "undeclared label": PLUS_ZERO + "query owi C -> A\n",
        "non-unitary matrix": PLUS_ZERO.replace("cnot A B", "unitary [[1, 1], [0, 1]] on A"),
    }
    lines = {}
    for name, text in broken.items():
        try:
            parse(text)
            lines[name] = None
        except SpecError as exc:
            lines[name] = exc.line if str(exc).startswith(f"line {exc.line},") else None
    ok = count >= 200 and all(v for v in lines.values())
    detail = ", ".join(f"{k} -> line {v}" for k, v in lines.items())
    report(capsys, 8, ok, f"{count} generated specs round-trip; diagnostics: {detail}")


def test_9_capacity(capsys, tmp_path):
    rng = np.random.default_rng(9)
    n = 5  # doubled dimension (2^5)^2 = 1024
    labels = [f"Q{i}" for i in range(n)]
    reg = Register.of(*[(lab, 2) for lab in labels])
    rho = random_density(reg, rng)
    lines = [f"system {lab} dim 2" for lab in labels]
    U = unitary_group.rvs(2**n, random_state=rng)
    lines.append(f"state {' '.join(labels)} mixed {matrix_text(rho.matrix)}")
    lines.append(f"channel {{ unitary {matrix_text(U)} on {' '.join(labels)} }}")
    for a in labels:
        for b in labels:
            if a != b:
                lines.append(f"query owi {a} -> {b} given {' '.join(c for c in labels if c not in (a, b))}")
    spec_text = "\n".join(lines) + "\n"
    t0 = time.perf_counter()
    results = run_protocol(parse(spec_text))
    elapsed = time.perf_counter() - t0

    big = tmp_path / "big.owi"
    big.write_text("\n".join([f"system Q{i} dim 2" for i in range(12)] + [f'state Q{i} pure "0"' for i in range(12)]
                             + ["channel { }", "query owi Q0 -> Q1"]) + "\n")
    t1 = time.perf_counter()
    code = main(["evaluate", str(big)])
    fail_time = time.perf_counter() - t1

    ok = len(results) == n * (n - 1) and elapsed < 10.0 and code == 2 and fail_time < 1.0
    report(
        capsys,
        9,
        ok,
        f"D = 1024 spec with {len(results)} queries in {elapsed:.2f} s (< 10 s); "
        f"12-qubit spec exits {code} after {fail_time * 1000:.0f} ms",
    )
