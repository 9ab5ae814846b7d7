"""Line-oriented text format describing an OWI experiment.

Example::

    # CNOT on |+0>
    system A dim 2
    system B dim 2
    state A pure "+"
    state B pure "0"
    channel { cnot A B }
    query owi A -> B
    query owi B -> A

Statements::

    system LABEL dim INT
    state LABEL+ (pure KET | pure [amp, ...] | mixed MATRIX | maximally_mixed | classical {"01": p, ...})
    copybasis|refbasis LABEL (comp | fourier | auto | custom MATRIX)
    mode quantum|quantum_project|classical
    channel { gate ; gate ... }       (gates separated by newlines or ';')
    query owi LABEL+ -> LABEL+ [given LABEL+]

Gates: ``cnot C T``, ``cshift C T BASIS BASIS SIGN``, ``swap A B``,
``ccnot C1 C2 T``, ``h|x|z L``, ``unitary MATRIX on LABEL+``. A BASIS is
``comp``, ``fourier`` or ``custom MATRIX``; SIGN is ``+1`` or ``-1``.
Complex numbers are written ``a``, ``bi`` or ``a+bi``. A multi-label
``state`` declares a joint input for that group.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .bases import Basis, computational_basis, fourier_basis
from .errors import SpecError
from .gates import ChannelSpec, GateApplication, ccnot, cshift, custom, local, swap
from .protocol import MODES, QUANTUM, Experiment, ProtocolConfig, Query
from .tensor import DensityOperator, PureState, Register, basis_ket

NORM_TOL = 1e-9
UNITARY_TOL = 1e-9

Matrix = tuple  # tuple[tuple[complex, ...], ...]


def _pos():
    return field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class SystemDecl:
    label: str
    dim: int
    pos: tuple = _pos()


@dataclass(frozen=True)
class StateDecl:
    """``kind`` is one of ``ket``, ``amplitudes``, ``mixed``, ``maximally_mixed``,
    ``classical``; ``value`` holds the matching literal."""

    labels: tuple[str, ...]
    kind: str
    value: object = None
    pos: tuple = _pos()
    label_pos: tuple = _pos()


@dataclass(frozen=True)
class BasisRef:
    kind: str  # comp | fourier | auto | custom
    matrix: Matrix | None = None
    pos: tuple = _pos()


@dataclass(frozen=True)
class BasisDecl:
    role: str  # copy | ref
    label: str
    basis: BasisRef
    pos: tuple = _pos()
    label_pos: tuple = _pos()


@dataclass(frozen=True)
class GateDecl:
    name: str
    labels: tuple[str, ...]
    bases: tuple[BasisRef, ...] = ()
    sign: int = 1
    matrix: Matrix | None = None
    pos: tuple = _pos()
    label_pos: tuple = _pos()


@dataclass(frozen=True)
class QueryDecl:
    source: tuple[str, ...]
    target: tuple[str, ...]
    given: tuple[str, ...] = ()
    pos: tuple = _pos()
    label_pos: tuple = _pos()

    def to_query(self) -> Query:
        return Query(self.source, self.target, self.given)


@dataclass(frozen=True)
class ProcessSpec:
    systems: tuple[SystemDecl, ...]
    states: tuple[StateDecl, ...]
    bases: tuple[BasisDecl, ...] = ()
    channel: tuple[GateDecl, ...] = ()
    queries: tuple[QueryDecl, ...] = ()
    mode: str = QUANTUM

    @property
    def register(self) -> Register:
        return Register.of(*[(s.label, s.dim) for s in self.systems])

    def validate(self) -> "ProcessSpec":
        _validate(self)
        return self

    def to_experiment(self) -> Experiment:
        self.validate()
        reg = self.register
        inputs = [_build_state(s, reg) for s in self.states]
        copy, ref = {}, {}
        for b in self.bases:
            built = _build_basis(b.basis, reg.subsystem(b.label).dim)
            if built is not None:
                (copy if b.role == "copy" else ref)[b.label] = built
        gates = tuple(_build_gate(g, reg) for g in self.channel)
        config = ProtocolConfig(copy_bases=copy, ref_bases=ref, mode=self.mode)
        return Experiment(reg, tuple(inputs), ChannelSpec(gates), config, tuple(q.to_query() for q in self.queries))


# ---------------------------------------------------------------- lexing

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<arrow>->)
  | (?P<number>[+-]?{_NUM}(?:[+-]{_NUM}i|i)?)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{{}}\[\],:;+-])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise SpecError(f"unexpected character {text[i]!r}", line, i - line_start + 1)
        kind = m.lastgroup
        if kind == "newline":
            tokens.append(Token("newline", "\n", line, i - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, i - line_start + 1))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens


def parse_complex(text: str) -> complex:
    if text.endswith("i"):
        body = text[:-1]
        # split at the last sign that is not part of an exponent
        m = re.match(rf"^([+-]?{_NUM})([+-]{_NUM})$", body)
        if m:
            return complex(float(m.group(1)), float(m.group(2)))
        return complex(0.0, float(body))
    return complex(float(text), 0.0)


# ---------------------------------------------------------------- parsing

_GATE_ARITY = {"cnot": 2, "swap": 2, "ccnot": 3, "h": 1, "x": 1, "z": 1}
_KEYWORDS = {
    "system", "dim", "state", "pure", "mixed", "maximally_mixed", "classical", "copybasis", "refbasis",
    "comp", "fourier", "auto", "custom", "channel", "query", "owi", "given", "mode", "on", "unitary",
    "cnot", "cshift", "swap", "ccnot", "h", "x", "z",
}


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise SpecError(message, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            got = "end of line" if tok.kind == "newline" else ("end of file" if tok.kind == "eof" else repr(tok.text))
            self.fail(f"expected {want}, found {got}", tok)
        return self.next()

    def skip_newlines(self):
        while self.peek().kind == "newline":
            self.next()

    def end_statement(self):
        tok = self.peek()
        if tok.kind not in ("newline", "eof"):
            self.fail(f"unexpected {tok.text!r} at end of statement", tok)
        if tok.kind == "newline":
            self.next()

    def label(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in _KEYWORDS:
            got = "end of line" if tok.kind == "newline" else repr(tok.text)
            self.fail(f"expected a system label, found {got}", tok)
        return self.next()

    def labels(self, stop: set[str]) -> list[Token]:
        out = [self.label()]
        while self.peek().kind == "ident" and self.peek().text not in stop and self.peek().text not in _KEYWORDS:
            out.append(self.next())
        return out

    def number(self) -> complex:
        tok = self.peek()
        if tok.kind != "number":
            self.fail(f"expected a number, found {tok.text!r}", tok)
        self.next()
        return parse_complex(tok.text)

    def _inner(self):
        # newlines are insignificant inside literals
        self.skip_newlines()

    def vector(self) -> tuple:
        self.expect("punct", "[")
        out = []
        self._inner()
        while True:
            out.append(self.number())
            self._inner()
            if self.peek().text == ",":
                self.next()
                self._inner()
                continue
            break
        self.expect("punct", "]")
        return tuple(out)

    def matrix(self) -> tuple[Matrix, Token]:
        start = self.expect("punct", "[")
        rows = []
        self._inner()
        while True:
            rows.append(self.vector())
            self._inner()
            if self.peek().text == ",":
                self.next()
                self._inner()
                continue
            break
        self.expect("punct", "]")
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            self.fail("matrix must be square", start)
        return tuple(rows), start

    def basis_ref(self, allow_auto: bool) -> BasisRef:
        tok = self.peek()
        kinds = ("comp", "fourier", "auto", "custom") if allow_auto else ("comp", "fourier", "custom")
        if tok.kind != "ident" or tok.text not in kinds:
            self.fail(f"expected a basis ({' | '.join(kinds)}), found {tok.text!r}", tok)
        self.next()
        if tok.text == "custom":
            mat, start = self.matrix()
            _require_unitary(mat, start)
            return BasisRef("custom", mat, (start.line, start.col))
        return BasisRef(tok.text, None, (tok.line, tok.col))

    def parse(self) -> ProcessSpec:
        systems, states, bases, queries = [], [], [], []
        channel = None
        mode = None
        while True:
            self.skip_newlines()
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind != "ident":
                self.fail(f"expected a statement keyword, found {tok.text!r}", tok)
            kw = tok.text
            if kw == "system":
                systems.append(self.system())
            elif kw == "state":
                states.append(self.state())
            elif kw in ("copybasis", "refbasis"):
                bases.append(self.basis_decl())
            elif kw == "channel":
                if channel is not None:
                    self.fail("channel declared twice", tok)
                channel = self.channel()
            elif kw == "query":
                queries.append(self.query())
            elif kw == "mode":
                if mode is not None:
                    self.fail("mode declared twice", tok)
                self.next()
                m = self.expect("ident")
                if m.text not in MODES:
                    self.fail(f"unknown mode {m.text!r}; expected one of {', '.join(MODES)}", m)
                mode = m.text
                self.end_statement()
            else:
                self.fail(f"unknown keyword {kw!r}", tok)
        return ProcessSpec(tuple(systems), tuple(states), tuple(bases), tuple(channel or ()), tuple(queries), mode or QUANTUM)

    def system(self) -> SystemDecl:
        kw = self.next()
        lab = self.label()
        self.expect("ident", "dim")
        num = self.peek()
        if num.kind != "number" or not num.text.isdigit():
            self.fail(f"expected an integer dimension, found {num.text!r}", num)
        self.next()
        self.end_statement()
        return SystemDecl(lab.text, int(num.text), (kw.line, kw.col))

    def state(self) -> StateDecl:
        kw = self.next()
        labs = self.labels({"pure", "mixed", "maximally_mixed", "classical"})
        kind_tok = self.peek()
        names = tuple(t.text for t in labs)
        lpos = tuple((t.line, t.col) for t in labs)
        pos = (kw.line, kw.col)
        if kind_tok.text == "pure":
            self.next()
            if self.peek().kind == "string":
                s = self.next()
                decl = StateDecl(names, "ket", s.text[1:-1], pos, lpos)
            else:
                decl = StateDecl(names, "amplitudes", self.vector(), pos, lpos)
        elif kind_tok.text == "mixed":
            self.next()
            mat, _ = self.matrix()
            decl = StateDecl(names, "mixed", mat, pos, lpos)
        elif kind_tok.text == "maximally_mixed":
            self.next()
            decl = StateDecl(names, "maximally_mixed", None, pos, lpos)
        elif kind_tok.text == "classical":
            self.next()
            decl = StateDecl(names, "classical", self.pairs(), pos, lpos)
        else:
            self.fail(f"expected pure, mixed, maximally_mixed or classical, found {kind_tok.text!r}", kind_tok)
        self.end_statement()
        return decl

    def pairs(self) -> tuple:
        self.expect("punct", "{")
        out = []
        self._inner()
        while True:
            key = self.expect("string")
            self.expect("punct", ":")
            p = self.number()
            if p.imag != 0:
                self.fail("probabilities must be real", key)
            out.append((key.text[1:-1], p.real))
            self._inner()
            if self.peek().text == ",":
                self.next()
                self._inner()
                continue
            break
        self.expect("punct", "}")
        return tuple(out)

    def basis_decl(self) -> BasisDecl:
        kw = self.next()
        lab = self.label()
        ref = self.basis_ref(allow_auto=True)
        self.end_statement()
        role = "copy" if kw.text == "copybasis" else "ref"
        if role == "ref" and ref.kind == "auto":
            raise SpecError("reference bases cannot be 'auto'", *ref.pos)
        return BasisDecl(role, lab.text, ref, (kw.line, kw.col), (lab.line, lab.col))

    def channel(self) -> list[GateDecl]:
        self.next()
        self.expect("punct", "{")
        gates = []
        while True:
            while self.peek().kind == "newline" or self.peek().text == ";":
                self.next()
            tok = self.peek()
            if tok.text == "}":
                self.next()
                break
            if tok.kind == "eof":
                self.fail("unterminated channel block: missing '}'", tok)
            gates.append(self.gate())
            nxt = self.peek()
            if nxt.kind != "newline" and nxt.text not in (";", "}"):
                self.fail(f"unexpected {nxt.text!r} after gate", nxt)
        self.end_statement()
        return gates

    def gate(self) -> GateDecl:
        tok = self.next()
        name = tok.text
        pos = (tok.line, tok.col)
        if tok.kind != "ident":
            self.fail(f"expected a gate name, found {tok.text!r}", tok)
        if name in _GATE_ARITY:
            labs = [self.label() for _ in range(_GATE_ARITY[name])]
            return GateDecl(name, tuple(t.text for t in labs), pos=pos, label_pos=tuple((t.line, t.col) for t in labs))
        if name == "cshift":
            labs = [self.label(), self.label()]
            b1 = self.basis_ref(allow_auto=False)
            b2 = self.basis_ref(allow_auto=False)
            sign = self.sign()
            return GateDecl(name, tuple(t.text for t in labs), (b1, b2), sign, None, pos, tuple((t.line, t.col) for t in labs))
        if name == "unitary":
            mat, start = self.matrix()
            _require_unitary(mat, start)
            self.expect("ident", "on")
            labs = self.labels(set())
            return GateDecl(name, tuple(t.text for t in labs), (), 1, mat, pos, tuple((t.line, t.col) for t in labs))
        self.fail(f"unknown gate {name!r}", tok)

    def sign(self) -> int:
        tok = self.next()
        if tok.text in ("+", "+1", "1"):
            return 1
        if tok.text in ("-", "-1"):
            return -1
        self.fail(f"expected a sign (+1 or -1), found {tok.text!r}", tok)

    def query(self) -> QueryDecl:
        kw = self.next()
        self.expect("ident", "owi")
        src = self.labels({"given"})
        self.expect("arrow")
        tgt = self.labels({"given"})
        given = []
        if self.peek().text == "given":
            self.next()
            given = self.labels(set())
        self.end_statement()
        lpos = tuple((t.line, t.col) for t in (*src, *tgt, *given))
        return QueryDecl(
            tuple(t.text for t in src), tuple(t.text for t in tgt), tuple(t.text for t in given), (kw.line, kw.col), lpos
        )


def _require_unitary(mat: Matrix, tok: Token):
    U = np.array(mat, dtype=complex)
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > UNITARY_TOL:
        raise SpecError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})", tok.line, tok.col)


def parse(text: str) -> ProcessSpec:
    """Parse and validate a spec; raises :class:`SpecError` with a line and column."""
    return _Parser(text).parse().validate()


# ------------------------------------------------------------- validation


def _err(message: str, pos):
    raise SpecError(message, *(pos or (0, 0)))


def _validate(spec: ProcessSpec) -> None:
    dims = {}
    for s in spec.systems:
        if s.label in dims:
            _err(f"system {s.label!r} declared twice", s.pos)
        if s.dim < 2:
            _err(f"system {s.label!r} needs dim >= 2", s.pos)
        dims[s.label] = s.dim
    if not dims:
        _err("no systems declared", None)

    def known(labels, positions, what):
        for k, lab in enumerate(labels):
            if lab not in dims:
                p = positions[k] if k < len(positions) else None
                _err(f"{what} names undeclared system {lab!r}", p)

    covered = {}
    for st in spec.states:
        known(st.labels, st.label_pos, "state")
        if len(set(st.labels)) != len(st.labels):
            _err("state repeats a label", st.pos)
        for lab in st.labels:
            if lab in covered:
                _err(f"system {lab!r} already has an input state", st.pos)
            covered[lab] = st
        _check_state(st, [dims[lab] for lab in st.labels])
    missing = [lab for lab in dims if lab not in covered]
    if missing:
        _err(f"no input state for system(s) {', '.join(missing)}", spec.states[-1].pos if spec.states else None)

    seen = set()
    for b in spec.bases:
        known([b.label], [b.label_pos], f"{b.role}basis")
        if (b.role, b.label) in seen:
            _err(f"{b.role}basis for {b.label!r} declared twice", b.pos)
        seen.add((b.role, b.label))
        if b.basis.kind == "custom" and len(b.basis.matrix) != dims[b.label]:
            _err(f"basis matrix is {len(b.basis.matrix)}x{len(b.basis.matrix)}, system {b.label!r} has dim {dims[b.label]}", b.basis.pos)

    for g in spec.channel:
        known(g.labels, g.label_pos, f"gate {g.name}")
        if len(set(g.labels)) != len(g.labels):
            _err(f"gate {g.name} uses a system twice", g.pos)
        gd = [dims[lab] for lab in g.labels]
        if g.name in ("cnot", "cshift", "swap", "ccnot") and len(set(gd)) != 1:
            _err(f"gate {g.name} needs equal dimensions, got {gd}", g.pos)
        if g.name == "ccnot" and gd[0] != 2:
            _err("ccnot requires qubits (dim 2)", g.pos)
        if g.name == "h" and gd[0] != 2:
            _err("h requires a qubit (dim 2)", g.pos)
        if g.name == "cshift":
            for b in g.bases:
                if b.kind == "custom" and len(b.matrix) != gd[0]:
                    _err(f"basis matrix is {len(b.matrix)}x{len(b.matrix)}, gate acts on dim {gd[0]}", b.pos)
        if g.name == "unitary" and len(g.matrix) != int(np.prod(gd)):
            _err(f"unitary is {len(g.matrix)}x{len(g.matrix)} but {' '.join(g.labels)} has dimension {int(np.prod(gd))}", g.pos)

    if not spec.queries:
        _err("no queries: add at least one 'query owi ...' line", None)
    for q in spec.queries:
        known((*q.source, *q.target, *q.given), q.label_pos, "query")
        parts = [set(q.source), set(q.target), set(q.given)]
        total = len(q.source) + len(q.target) + len(q.given)
        if len(parts[0] | parts[1] | parts[2]) != total:
            _err("query source, target and given sets must be disjoint", q.pos)
    if spec.mode not in MODES:
        _err(f"unknown mode {spec.mode!r}", None)


def _check_state(st: StateDecl, dims: list[int]) -> None:
    D = int(np.prod(dims))
    if st.kind == "ket":
        if len(st.value) != len(dims):
            _err(f"ket {st.value!r} needs one symbol per system ({len(dims)})", st.pos)
        for sym, d in zip(st.value, dims):
            try:
                basis_ket(sym, d)
            except ValueError as exc:
                _err(str(exc), st.pos)
    elif st.kind == "amplitudes":
        v = np.array(st.value, dtype=complex)
        if v.shape[0] != D:
            _err(f"expected {D} amplitudes, got {v.shape[0]}", st.pos)
        if abs(np.linalg.norm(v) - 1) > NORM_TOL:
            _err(f"state is not normalized (norm {np.linalg.norm(v):.12g})", st.pos)
    elif st.kind == "mixed":
        m = np.array(st.value, dtype=complex)
        if m.shape != (D, D):
            _err(f"expected a {D}x{D} density matrix, got {m.shape[0]}x{m.shape[1]}", st.pos)
        if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
            _err("density matrix is not Hermitian", st.pos)
        if abs(np.trace(m) - 1) > NORM_TOL:
            _err(f"density matrix has trace {np.trace(m).real:.12g}, not 1", st.pos)
        if np.linalg.eigvalsh((m + m.conj().T) / 2)[0] < -NORM_TOL:
            _err("density matrix is not positive semidefinite", st.pos)
    elif st.kind == "classical":
        total = 0.0
        keys = set()
        for key, p in st.value:
            if len(key) != len(dims) or any(not c.isdigit() or int(c) >= d for c, d in zip(key, dims)):
                _err(f"digit string {key!r} does not fit dims {dims}", st.pos)
            if key in keys:
                _err(f"digit string {key!r} listed twice", st.pos)
            keys.add(key)
            if p < 0:
                _err(f"negative probability for {key!r}", st.pos)
            total += p
        if abs(total - 1) > NORM_TOL:
            _err(f"probabilities sum to {total:.12g}, not 1", st.pos)
    elif st.kind != "maximally_mixed":
        _err(f"unknown state kind {st.kind!r}", st.pos)


# --------------------------------------------------------------- building


def _build_state(st: StateDecl, reg: Register):
    sub = reg.restrict(st.labels).reordered(st.labels)
    dims = sub.dims
    if st.kind == "ket":
        vec = np.ones(1, dtype=complex)
        for sym, d in zip(st.value, dims):
            vec = np.kron(vec, basis_ket(sym, d))
        return PureState(sub, vec)
    if st.kind == "amplitudes":
        v = np.array(st.value, dtype=complex)
        return PureState(sub, v / np.linalg.norm(v))
    if st.kind == "mixed":
        m = np.array(st.value, dtype=complex)
        m = (m + m.conj().T) / 2
        return DensityOperator(sub, m / np.trace(m).real)
    if st.kind == "maximally_mixed":
        return DensityOperator.maximally_mixed(sub)
    diag = np.zeros(sub.dim)
    total = sum(p for _, p in st.value)
    for key, p in st.value:
        diag[np.ravel_multi_index(tuple(int(c) for c in key), dims)] = p / total
    return DensityOperator(sub, np.diag(diag).astype(complex))


def _build_basis(ref: BasisRef, d: int) -> Basis | None:
    if ref.kind == "auto":
        return None
    if ref.kind == "comp":
        return computational_basis(d)
    if ref.kind == "fourier":
        return fourier_basis(computational_basis(d))
    return Basis(np.array(ref.matrix, dtype=complex))


def _build_gate(g: GateDecl, reg: Register) -> GateApplication:
    d = reg.subsystem(g.labels[0]).dim
    if g.name == "cnot":
        return cshift(g.labels[0], g.labels[1])
    if g.name == "cshift":
        return cshift(g.labels[0], g.labels[1], _build_basis(g.bases[0], d), _build_basis(g.bases[1], d), g.sign)
    if g.name == "swap":
        return swap(*g.labels)
    if g.name == "ccnot":
        return ccnot(*g.labels)
    if g.name in ("h", "x", "z"):
        return local(g.labels[0], g.name.upper())
    return custom(g.labels, np.array(g.matrix, dtype=complex))


# ----------------------------------------------------------- serializing


def format_real(x: float) -> str:
    text = format(float(x), ".17g")
    return "0" if text == "-0" else text


def format_complex(z: complex) -> str:
    z = complex(z)
    re_, im = z.real, z.imag
    if im == 0:
        return format_real(re_)
    if re_ == 0:
        return f"{format_real(im)}i"
    sign = "-" if im < 0 else "+"
    return f"{format_real(re_)}{sign}{format_real(abs(im))}i"


def _vector_text(v) -> str:
    return "[" + ", ".join(format_complex(z) for z in v) + "]"


def _matrix_text(m) -> str:
    return "[" + ", ".join(_vector_text(row) for row in m) + "]"


def _basis_text(b: BasisRef) -> str:
    return f"custom {_matrix_text(b.matrix)}" if b.kind == "custom" else b.kind


def _lines(spec: ProcessSpec) -> Iterator[str]:
    for s in spec.systems:
        yield f"system {s.label} dim {s.dim}"
    for st in spec.states:
        head = f"state {' '.join(st.labels)}"
        if st.kind == "ket":
            yield f'{head} pure "{st.value}"'
        elif st.kind == "amplitudes":
            yield f"{head} pure {_vector_text(st.value)}"
        elif st.kind == "mixed":
            yield f"{head} mixed {_matrix_text(st.value)}"
        elif st.kind == "maximally_mixed":
            yield f"{head} maximally_mixed"
        else:
            body = ", ".join(f'"{k}": {format_real(p)}' for k, p in st.value)
            yield f"{head} classical {{{body}}}"
    for b in spec.bases:
        yield f"{'copybasis' if b.role == 'copy' else 'refbasis'} {b.label} {_basis_text(b.basis)}"
    yield f"mode {spec.mode}"
    if spec.channel:
        yield "channel {"
        for g in spec.channel:
            if g.name == "cshift":
                sign = "+1" if g.sign > 0 else "-1"
                yield f"  cshift {' '.join(g.labels)} {_basis_text(g.bases[0])} {_basis_text(g.bases[1])} {sign}"
            elif g.name == "unitary":
                yield f"  unitary {_matrix_text(g.matrix)} on {' '.join(g.labels)}"
            else:
                yield f"  {g.name} {' '.join(g.labels)}"
        yield "}"
    else:
        yield "channel { }"
    for q in spec.queries:
        text = f"query owi {' '.join(q.source)} -> {' '.join(q.target)}"
        if q.given:
            text += f" given {' '.join(q.given)}"
        yield text


def serialize(spec: ProcessSpec) -> str:
    """Canonical text for ``spec``; reals use 17 significant digits so parsing
    the output reproduces the spec exactly."""
    spec.validate()
    return "\n".join(_lines(spec)) + "\n"
