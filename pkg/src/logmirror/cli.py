"""Command line front end: parse a fan description, run one command, print a
deterministic report."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .checks import run_checks
from .errors import InputError, LogMirrorError, ValidationFailure
from .model import Model, ModelInput
from .monoidring import HodgeElement, basis_labels
from .primitive import birkhoff_fixed_point, mirror_map_check, primitive_form
from .scalars import qfmt

COMMANDS = ("validate", "basis", "cohomology", "connection", "flatframe", "periodmap", "check")


def _series(s) -> dict:
    return {"text": s.render(), "terms": s.to_json()}


def _matrix(M) -> list:
    return [[_series(s) for s in row] for row in M]


def _qmatrix(M) -> list:
    return [[qfmt(v) for v in row] for row in M]


def _one_based(idx) -> list:
    return [i + 1 for i in idx]


def _header(model: Model, command: str) -> dict:
    out = {"command": command, "truncation": model.K}
    if model.inp.name:
        out["name"] = model.inp.name
    return out


def report_validate(model: Model) -> dict:
    out = _header(model, "validate")
    out["validation"] = model.report.to_json()
    if model.report.ok:
        out["primitive_collections"] = [_one_based(p) for p in model.primitive_collections]
        out["walls"] = [{"cones": _one_based(w.cones), "relation": list(w.relation)}
                        for w in model.walls]
    return out


def report_basis(model: Model) -> dict:
    model.require_valid()
    fo, cd, mr = model.fulton, model.curves, model.mr
    out = _header(model, "basis")
    out["cone_order"] = [_one_based(model.fan.max_cones[k]) for k in fo.cone_order]
    out["taus"] = [_one_based(t) for t in fo.taus]
    out["basis"] = basis_labels(mr)
    out["weights"] = list(mr.basis_w)
    out["reference_cone"] = _one_based(model.ref.rays)
    out["curve_data"] = {
        "kernel_basis": [list(v) for v in cd.kernel_basis],
        "wall_classes": [list(v) for v in cd.wall_classes],
        "nef_inequalities": [list(v) for v in cd.nef_inequalities],
        "qc_weights": list(cd.qc),
        "lambda": list(cd.lam),
        "semi_fano": cd.semi_fano,
        "fano": cd.fano,
    }
    out["ray_excess"] = [list(p) for p in model.ray_excess]
    return out


def report_cohomology(model: Model) -> dict:
    model.require_valid()
    out = _header(model, "cohomology")
    out["basis"] = basis_labels(model.mr)
    out["structure_constants"] = [[[qfmt(v) for v in c] for c in row] for row in model.ring_table]
    out["pairing"] = _qmatrix(model.pairing)
    return out


def _reference_annotations(model: Model) -> list:
    conn = model.connection
    mr = model.mr
    names = mr.names
    out = []
    for ref in model.inp.reference_entries:
        d = ref["direction"]
        if d not in names:
            raise InputError(f"reference entry direction {d!r} is not a variable")
        a = names.index(d)
        k = ref["column"] - 1
        if not 0 <= k < conn.table.mu:
            raise InputError("reference entry column out of range")
        expected = conn.table.reduce(HodgeElement.parse(mr, ref["u_nabla"]))
        computed = [conn.mats[a][i][k] for i in range(conn.table.mu)]
        item = {"direction": d, "column": k + 1, "reference": ref["u_nabla"],
                "match": all(x == y for x, y in zip(expected, computed)),
                "computed": conn.table.element(computed).render()}
        if "label" in ref:
            item["label"] = ref["label"]
        out.append(item)
    return out


def report_connection(model: Model) -> dict:
    model.require_valid()
    conn = model.connection
    mr = model.mr
    out = _header(model, "connection")
    out["basis"] = basis_labels(mr)
    out["variables"] = list(mr.names)
    out["convention"] = "column k holds u*nabla(phi_k); q-directions are q_a d/dq_a"
    out["matrices"] = [{"direction": name, "u_nabla": _matrix(M)}
                       for name, M in zip(mr.names, conn.mats)]
    out["nabla_u"] = _matrix(conn.U)
    out["residues"] = [{"direction": mr.names[a], "matrix": _qmatrix(N)}
                       for a, N in enumerate(conn.residues)]
    if model.inp.reference_entries:
        out["reference_entries"] = _reference_annotations(model)
    return out


def report_flatframe(model: Model) -> dict:
    model.require_valid()
    out = _header(model, "flatframe")
    out["basis"] = basis_labels(model.mr)
    out["A"] = _matrix(model.frame.A)
    bp = model.birkhoff
    out["B"] = _matrix(bp.B)
    out["C"] = _matrix(bp.C)
    out["zeta"] = [_series(s) for s in primitive_form(bp)]
    alt = birkhoff_fixed_point(model.frame)
    out["birkhoff_schedules_agree"] = bp.B == alt.B and bp.C == alt.C
    return out


def report_periodmap(model: Model) -> dict:
    model.require_valid()
    pm = model.period_map
    mr = model.mr
    labels = basis_labels(mr)
    out = _header(model, "periodmap")
    out["flat_coordinates"] = [
        {"index": i + 1, "basis": labels[i], "log_linear": list(pm.linear[i]),
         "correction": _series(pm.corrections[i]), "tau": _series(pm.tau(i))}
        for i in pm.flat_indices()]
    out["other_coordinates"] = [
        {"index": i + 1, "basis": labels[i], "series": _series(pm.corrections[i])}
        for i in range(len(labels)) if i not in pm.flat_indices()]
    out["log_linear_matrix"] = [list(pm.linear[i]) for i in pm.flat_indices()]
    out["zeta"] = [_series(s) for s in pm.zeta]
    out["flat_unit"] = [p.to_json() for p in model.flat_unit]
    out["flat_unit_text"] = [p.render() for p in model.flat_unit]
    if model.inp.closed_forms:
        out["mirror_map_checks"] = mirror_map_check(pm, model.inp.closed_forms)
    return out


def report_check(model: Model) -> dict:
    out = _header(model, "check")
    out["checks"] = run_checks(model)
    out["ok"] = all(v["ok"] for v in out["checks"].values())
    return out


REPORTS = {
    "validate": report_validate, "basis": report_basis, "cohomology": report_cohomology,
    "connection": report_connection, "flatframe": report_flatframe,
    "periodmap": report_periodmap, "check": report_check,
}


def run(command: str, inp: ModelInput, parallel: bool = False,
        ref_cone: int | None = None) -> tuple[dict, int]:
    """Run a command; returns the payload and the exit code."""
    if command not in REPORTS:
        raise InputError(f"unknown command {command!r}")
    model = Model(inp, parallel=parallel, ref_cone=ref_cone)
    payload = REPORTS[command](model)
    if not model.report.ok:
        return payload, 2
    if command == "check" and not payload["ok"]:
        return payload, 3
    return payload, 0


def dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def render_text(payload, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(payload, dict):
        if set(payload) == {"text", "terms"}:
            return pad + payload["text"]
        for k in sorted(payload):
            v = payload[k]
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(payload, list):
        if all(not isinstance(v, (dict, list)) for v in payload):
            return pad + "[" + ", ".join(str(v) for v in payload) + "]"
        for v in payload:
            lines.append(render_text(v, indent))
    else:
        return pad + str(payload)
    return "\n".join(lines)


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logmirror", description=__doc__)
    p.add_argument("--input", required=True, help="fan description (JSON file, '-' for stdin)")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--trunc", type=int, default=None, help="truncation order K (default: input or 8)")
    p.add_argument("--format", choices=("json", "text"), default=None)
    p.add_argument("--parallel", type=_bool, nargs="?", const=True, default=False)
    p.add_argument("--ref-cone", type=int, default=None, help="1-based maximal cone for the frame")
    return p


def load_input(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = load_input(args.input)
        inp = ModelInput.from_json(data)
        if args.trunc is not None:
            if args.trunc < 1:
                raise InputError("--trunc must be >= 1")
            inp.truncation = args.trunc
        fmt = args.format or inp.format
        payload, code = run(args.command, inp, parallel=args.parallel, ref_cone=args.ref_cone)
    except ValidationFailure as exc:
        payload = {"command": args.command, "error": str(exc),
                   "validation": exc.report.to_json() if exc.report else None}
        fmt, code = args.format or "json", exc.exit_code
    except LogMirrorError as exc:
        payload = {"command": args.command, "error": str(exc), "kind": type(exc).__name__}
        fmt, code = args.format or "json", exc.exit_code
    sys.stdout.write(dumps(payload) if fmt == "json" else render_text(payload) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
