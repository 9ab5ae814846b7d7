"""Command-line front end: ``evaluate``, ``tables`` and ``graph``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .errors import CapacityError, OnewayError, SpecError
from .protocol import QueryResult, causal_matrix, run_protocol
from .specfile import parse
from .tables import UnsupportedTable, run_table

EXIT_OK = 0
EXIT_SPEC = 1
EXIT_CAPACITY = 2
EXIT_MISMATCH = 3
TABLE_TOL = 1e-9
EDGE_THRESHOLD = 1e-6
SCHEMA = 1


def fmt(x: float, digits: int = 12) -> str:
    text = f"{x:.{digits}f}"
    # never print a signed zero
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def _stable(x: float) -> float:
    return float(fmt(x))


def _record(r: QueryResult) -> dict:
    return {
        "query": r.query.describe(),
        "source": list(r.source),
        "target": list(r.target),
        "given": list(r.conditioned),
        "value": _stable(r.value),
        "entropies": {",".join(k): _stable(v) for k, v in r.final_state_entropies.items()},
        "mode": r.metadata.get("mode"),
        "bases": r.metadata.get("bases", {}),
        "warnings": list(r.metadata.get("warnings", [])),
        "notes": list(r.metadata.get("notes", [])),
    }


def render_results(results: list[QueryResult], form: str) -> str:
    records = [_record(r) for r in results]
    if form == "json":
        return json.dumps({"schema": SCHEMA, "results": records}, indent=2) + "\n"
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query", "source", "target", "given", "value", "mode", "warnings"])
        for rec, r in zip(records, results):
            w.writerow([rec["query"], " ".join(rec["source"]), " ".join(rec["target"]), " ".join(rec["given"]),
                        fmt(r.value), rec["mode"], "; ".join(rec["warnings"])])
        return buf.getvalue()
    lines = []
    for rec, r in zip(records, results):
        lines.append(f"{rec['query']} = {fmt(r.value)}")
        lines.extend(f"  warning: {w}" for w in rec["warnings"])
    return "\n".join(lines) + "\n"


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from exc
    return parse(text)


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_evaluate(path: str, form: str = "text", out=None) -> int:
    out = out or sys.stdout
    try:
        results = run_protocol(_load(path))
    except CapacityError as exc:
        return _fail(EXIT_CAPACITY, str(exc))
    except SpecError as exc:
        return _fail(EXIT_SPEC, f"{path}: {exc}")
    except (OnewayError, ValueError) as exc:
        return _fail(EXIT_SPEC, f"{path}: {exc}")
    out.write(render_results(results, form))
    return EXIT_OK


def render_table(rows, table: int, d: int, form: str) -> str:
    if form == "json":
        payload = {
            "schema": SCHEMA,
            "table": table,
            "d": d,
            "rows": [
                {"row": r.row, "process": r.process, "quantity": r.quantity, "computed": _stable(r.computed),
                 "formula": r.formula, "expected": _stable(r.expected), "diff": r.diff, "ok": r.diff <= TABLE_TOL}
                for r in rows
            ],
        }
        return json.dumps(payload, indent=2) + "\n"
    if form == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table", "d", "row", "process", "quantity", "computed", "formula", "expected", "diff"])
        for r in rows:
            w.writerow([table, d, r.row, r.process, r.quantity, fmt(r.computed), r.formula, fmt(r.expected), f"{r.diff:.3e}"])
        return buf.getvalue()
    lines = [f"table {table} (d = {d})"]
    for r in rows:
        status = "ok" if r.diff <= TABLE_TOL else "MISMATCH"
        lines.append(
            f"{r.row:>2}  {r.process:<46} {r.quantity:<16} {fmt(r.computed):>16}  "
            f"{r.formula:<18} {fmt(r.expected):>16}  {r.diff:.1e}  {status}"
        )
    bad = sum(r.diff > TABLE_TOL for r in rows)
    lines.append(f"{len(rows) - bad}/{len(rows)} values within {TABLE_TOL:g}")
    return "\n".join(lines) + "\n"


def cmd_tables(table: int, d: int = 2, form: str = "text", out=None) -> int:
    out = out or sys.stdout
    try:
        rows = run_table(table, d)
    except UnsupportedTable as exc:
        return _fail(EXIT_SPEC, str(exc))
    out.write(render_table(rows, table, d, form))
    return EXIT_MISMATCH if any(r.diff > TABLE_TOL for r in rows) else EXIT_OK


def _quote(label: str) -> str:
    return '"' + label.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(cm, threshold: float = EDGE_THRESHOLD) -> str:
    lines = ["digraph owi {", "  rankdir=LR;"]
    lines += [f"  {_quote(lab)};" for lab in cm.labels]
    for a, b, v in cm.edges(threshold):
        lines.append(f'  {_quote(a)} -> {_quote(b)} [label="{fmt(v, 6)}", weight={fmt(v, 6)}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def adjacency(cm, threshold: float = EDGE_THRESHOLD) -> dict:
    n = len(cm.labels)
    matrix = [[None if i == j else _stable(cm.values[i, j]) for j in range(n)] for i in range(n)]
    return {
        "schema": SCHEMA,
        "threshold": threshold,
        "nodes": list(cm.labels),
        "edges": [{"source": a, "target": b, "value": _stable(v)} for a, b, v in cm.edges(threshold)],
        "matrix": matrix,
        "received": {k: _stable(v) for k, v in cm.received.items()},
        "chain": {k: [[a, _stable(v)] for a, v in terms] for k, terms in cm.chain.items()},
    }


def cmd_graph(path: str, dot_path: str, out=None) -> int:
    out = out or sys.stdout
    try:
        cm = causal_matrix(_load(path))
    except CapacityError as exc:
        return _fail(EXIT_CAPACITY, str(exc))
    except (SpecError, OnewayError, ValueError) as exc:
        return _fail(EXIT_SPEC, f"{path}: {exc}")
    dot = Path(dot_path)
    json_path = dot.with_suffix(".json")
    dot.write_text(render_dot(cm))
    json_path.write_text(json.dumps(adjacency(cm), indent=2) + "\n")
    edges = cm.edges(EDGE_THRESHOLD)
    for a, b, v in edges:
        out.write(f"{a} -> {b} = {fmt(v)}\n")
    out.write(f"wrote {dot} and {json_path} ({len(edges)} edges)\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oneway", description="One-way information through unitary channels.")
    sub = p.add_subparsers(dest="command", required=True)
    formats = ("text", "json", "csv")

    ev = sub.add_parser("evaluate", help="evaluate the queries of a spec file")
    ev.add_argument("file")
    ev.add_argument("--format", choices=formats, default="text")

    tb = sub.add_parser("tables", help="recompute a reference table and compare with its closed forms")
    tb.add_argument("--table", type=int, choices=(1, 2), required=True)
    tb.add_argument("--d", type=int, default=2)
    tb.add_argument("--format", choices=formats, default="text")

    gr = sub.add_parser("graph", help="export the pairwise causal graph as DOT plus JSON adjacency")
    gr.add_argument("file")
    gr.add_argument("--dot", required=True, help="DOT output path; the JSON file is written next to it")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "evaluate":
        return cmd_evaluate(args.file, args.format)
    if args.command == "tables":
        return cmd_tables(args.table, args.d, args.format)
    return cmd_graph(args.file, args.dot)


if __name__ == "__main__":
    sys.exit(main())
