"""Batch front end: definition files in, deterministic JSON reports out.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 input or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Any, Sequence

from .algebroid import AlgebroidError, AlgebroidPresentation, check_axioms, library
from .cohomology import TruncationError, betti, bott_shulman_row_cohomology
from .exactpoly import Chart, ChartError, PolySyntaxError, UndeclaredVariable, poly_parse
from .groupoid import (BSForm, GroupoidError, NotNormalized, SplitGroupoid, check_groupoid, check_simplicial,
                       compatibility_check, groupoid_library, lie_algebroid_of, vanest)
from .imforms import PreconditionError, check_im, check_transgression, int_pr_equivalence
from .polyforms import PolyForm
from .report import CertReport
from .weilflat import check_d2

MAX_FAILURES = 20
KINDS = ("algebroid", "groupoid", "im-data", "transgression-data", "bs-form")
ALGEBROID_KEYS = {"kind", "name", "vars", "rank", "anchor", "structure"}
GROUPOID_KEYS = ALGEBROID_KEYS | {"fiber_dim", "fiber_vars", "target", "unit", "mult", "inverse", "naming"}


class InputError(Exception):
    """Malformed or schema-invalid input; ``where`` locates the problem."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(message)
        self.where = where


# --- loading ----------------------------------------------------------------------------------

def read_json(path: str) -> tuple[Any, bytes]:
    try:
        raw = open(path, "rb").read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", path)
    try:
        return json.loads(raw.decode("utf-8")), raw
    except UnicodeDecodeError as e:
        raise InputError(f"not UTF-8: {e.reason}", f"{path}: byte {e.start}")
    except json.JSONDecodeError as e:
        raise InputError(e.msg, f"{path}: line {e.lineno} column {e.colno}")


def _expect(d: dict, keys: set, required: set, where: str):
    if not isinstance(d, dict):
        raise InputError("expected a JSON object", where)
    unknown = sorted(set(d) - keys)
    if unknown:
        raise InputError(f"unknown key {unknown[0]!r}", where)
    missing = sorted(required - set(d))
    if missing:
        raise InputError(f"missing key {missing[0]!r}", where)


def _int(v, where: str, low: int = 0) -> int:
    if not isinstance(v, int) or isinstance(v, bool) or v < low:
        raise InputError(f"expected an integer >= {low}", where)
    return v


def _names(v, where: str) -> tuple[str, ...]:
    if not isinstance(v, list) or not all(isinstance(s, str) for s in v):
        raise InputError("expected a list of names", where)
    return tuple(v)


def _text(v, where: str) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise InputError("expected a string or integer", where)
    return str(v)


def _poly(v, c: Chart, where: str):
    try:
        return poly_parse(_text(v, where), c)
    except PolySyntaxError as e:
        raise InputError(str(e), f"{where}: position {e.pos}")
    except (UndeclaredVariable, ChartError, ValueError) as e:
        raise InputError(str(e), where)


def _form(v, c: Chart, where: str) -> PolyForm:
    try:
        return PolyForm.parse(_text(v, where), c)
    except PolySyntaxError as e:
        raise InputError(str(e), f"{where}: position {e.pos}")
    except (UndeclaredVariable, ChartError, ValueError) as e:
        raise InputError(str(e), where)


def _poly_list(v, c: Chart, n: int, where: str) -> list:
    if not isinstance(v, list) or len(v) != n:
        raise InputError(f"expected a list of {n} polynomials", where)
    return [_poly(s, c, f"{where}[{i}]") for i, s in enumerate(v)]


def _base_chart(d: dict, where: str) -> Chart:
    names = _names(d["vars"], f"{where}.vars")
    try:
        return Chart(names)
    except (ChartError, ValueError) as e:
        raise InputError(str(e), f"{where}.vars")


def parse_algebroid(d: dict, where: str = "$") -> AlgebroidPresentation:
    _expect(d, ALGEBROID_KEYS, {"vars", "rank", "anchor", "structure"}, where)
    if d.get("kind", "algebroid") != "algebroid":
        raise InputError("expected kind 'algebroid'", f"{where}.kind")
    c = _base_chart(d, where)
    rank = _int(d["rank"], f"{where}.rank", 1)
    anchor, structure = _algebroid_data(d, c, rank, where)
    try:
        return AlgebroidPresentation(c, rank, anchor, structure, name=str(d.get("name", "")))
    except (AlgebroidError, ChartError) as e:
        raise InputError(str(e), where)


def _algebroid_data(d: dict, c: Chart, rank: int, where: str):
    rows = d["anchor"]
    if not isinstance(rows, list) or len(rows) != rank:
        raise InputError(f"anchor must have {rank} rows", f"{where}.anchor")
    anchor = [_poly_list(r, c, c.dim, f"{where}.anchor[{i}]") for i, r in enumerate(rows)]
    st = d["structure"]
    if not isinstance(st, dict):
        raise InputError("structure must be an object keyed by 'j,k'", f"{where}.structure")
    structure = {}
    for key in sorted(st):
        loc = f"{where}.structure[{key!r}]"
        try:
            j, k = (int(t) for t in key.split(","))
        except ValueError:
            raise InputError("structure keys must look like '1,2'", loc)
        if not (1 <= j <= rank and 1 <= k <= rank):
            raise InputError("structure index out of range", loc)
        structure[(j - 1, k - 1)] = _poly_list(st[key], c, rank, loc)
    return anchor, structure


def parse_groupoid(d: dict, where: str = "$") -> tuple[SplitGroupoid, AlgebroidPresentation | None]:
    """The groupoid plus the algebroid it declares (if anchor/structure are given)."""
    req = {"vars", "fiber_dim", "target", "unit", "mult", "inverse"}
    _expect(d, GROUPOID_KEYS, req, where)
    if d.get("kind", "groupoid") != "groupoid":
        raise InputError("expected kind 'groupoid'", f"{where}.kind")
    c = _base_chart(d, where)
    fd = _int(d["fiber_dim"], f"{where}.fiber_dim")
    if "fiber_vars" in d:
        fiber = _names(d["fiber_vars"], f"{where}.fiber_vars")
        if len(fiber) != fd:
            raise InputError(f"fiber_vars must have {fd} names", f"{where}.fiber_vars")
    else:
        fiber = ("u",) if fd == 1 else tuple(f"u{i + 1}" for i in range(fd))
    naming = d.get("naming", "indexed")
    if naming not in ("indexed", "pair"):
        raise InputError("naming must be 'indexed' or 'pair'", f"{where}.naming")
    try:
        arrow = Chart(fiber + c.coords)
        mc = Chart(tuple(f"{u}_g" for u in fiber) + tuple(f"{u}_h" for u in fiber) + c.coords)
    except (ChartError, ValueError) as e:
        raise InputError(str(e), f"{where}.fiber_vars")
    target = _poly_list(d["target"], arrow, c.dim, f"{where}.target")
    unit = _poly_list(d["unit"], c, fd, f"{where}.unit")
    mult = _poly_list(d["mult"], mc, fd, f"{where}.mult")
    inverse = _poly_list(d["inverse"], arrow, fd, f"{where}.inverse")
    try:
        G = SplitGroupoid(c, fiber, target, unit, mult, inverse, name=str(d.get("name", "groupoid")), naming=naming)
    except (GroupoidError, ChartError) as e:
        raise InputError(str(e), where)
    declared = None
    if "anchor" in d or "structure" in d or "rank" in d:
        if not {"anchor", "structure", "rank"} <= set(d):
            raise InputError("a declared algebroid needs rank, anchor and structure", where)
        rank = _int(d["rank"], f"{where}.rank", 1)
        anchor, structure = _algebroid_data(d, c, rank, where)
        try:
            declared = AlgebroidPresentation(c, rank, anchor, structure, name=G.name)
        except (AlgebroidError, ChartError) as e:
            raise InputError(str(e), where)
    return G, declared


def load_definition(path: str) -> tuple[dict, bytes]:
    data, raw = read_json(path)
    if not isinstance(data, dict):
        raise InputError("expected a JSON object", f"{path}: $")
    kind = data.get("kind")
    if kind not in KINDS:
        raise InputError(f"kind must be one of {', '.join(KINDS)}", f"{path}: $.kind")
    return data, raw


# --- serialization of library objects ----------------------------------------------------------

def algebroid_to_json(P: AlgebroidPresentation) -> dict:
    structure = {}
    for (j, k), vec in sorted(P.structure.items()):
        if any(vec):
            structure[f"{j + 1},{k + 1}"] = [str(p) for p in vec]
    return {"kind": "algebroid", "name": P.name, "vars": list(P.base.coords), "rank": P.rank,
            "anchor": [[str(p) for p in row] for row in P.anchor], "structure": structure}


def groupoid_to_json(G: SplitGroupoid) -> dict:
    return {"kind": "groupoid", "name": G.name, "vars": list(G.M.coords), "fiber_dim": G.d,
            "fiber_vars": list(G.fiber), "naming": G.naming,
            "target": [str(p) for p in G.target.components], "unit": [str(p) for p in G.unit.components],
            "mult": [str(p) for p in G.mult.components], "inverse": [str(p) for p in G.inverse.components]}


# --- reports ----------------------------------------------------------------------------------

def finding(rep: CertReport, **extra) -> dict:
    out = {"name": rep.name, "ok": rep.ok, "checked": rep.checked, "failure_count": len(rep.failures),
           "failures": [f.as_dict() for f in rep.failures[:MAX_FAILURES]]}
    if rep.info:
        out["info"] = _jsonable(rep.info)
    out.update(extra)
    return out


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if v is None or isinstance(v, (bool, int, str)):
        return v
    return str(v)


class Run:
    def __init__(self, command: str, args):
        self.command = command
        self.seed = getattr(args, "seed", 0)
        self.want_timings = getattr(args, "timings", False)
        self.digest = hashlib.sha256()
        self.findings: list[dict] = []
        self.timings: dict[str, float] = {}
        self.extra: dict = {}

    def add_input(self, raw: bytes):
        self.digest.update(hashlib.sha256(raw).digest())

    def timed(self, label: str, fn, *a, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            if self.want_timings:
                self.timings[label] = round(time.perf_counter() - t0, 4)

    def report(self, ok: bool, error: dict | None = None) -> dict:
        out = {"command": self.command, "ok": ok, "input_digest": self.digest.hexdigest(), "seed": self.seed,
               "findings": self.findings, "timings": self.timings}
        out.update(self.extra)
        if error is not None:
            out["error"] = error
        return out


def emit(report: dict, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n")


# --- commands ---------------------------------------------------------------------------------

def cmd_check(args, run: Run) -> bool:
    data, raw = load_definition(args.path)
    run.add_input(raw)
    if data["kind"] == "algebroid":
        P = parse_algebroid(data, f"{args.path}: $")
        run.findings.append(finding(run.timed("axioms", check_axioms, P)))
        run.findings.append(finding(run.timed("d2", check_d2, P, seed=run.seed, samples=args.samples)))
    elif data["kind"] == "groupoid":
        G, declared = parse_groupoid(data, f"{args.path}: $")
        axioms = run.timed("groupoid", check_groupoid, G)
        run.findings.append(finding(axioms))
        if axioms.ok:
            run.findings.append(finding(run.timed("simplicial", check_simplicial, G, args.max_p)))
            A = run.timed("lie_algebroid", lie_algebroid_of, G)
            run.extra["lie_algebroid"] = algebroid_to_json(A)
            run.findings.append(finding(run.timed("algebroid_axioms", check_axioms, A)))
            run.findings.append(finding(run.timed("d2", check_d2, A, seed=run.seed, samples=args.samples)))
            if declared is not None:
                run.findings.append(finding(_compare_algebroids(declared, A)))
    else:
        raise InputError("check expects an algebroid or groupoid file", f"{args.path}: $.kind")
    return all(f["ok"] for f in run.findings)


def _compare_algebroids(declared: AlgebroidPresentation, derived: AlgebroidPresentation) -> CertReport:
    rep = CertReport(name="declared algebroid")
    if declared.rank != derived.rank:
        rep.require("rank", "declared", False, f"{declared.rank} != {derived.rank}")
        return rep
    for i in range(declared.rank):
        for a in range(declared.base.dim):
            rep.record("anchor", f"rho[{i + 1}][{a + 1}]", declared.anchor[i][a] - derived.anchor[i][a])
    for j in range(declared.rank):
        for k in range(j + 1, declared.rank):
            for i in range(declared.rank):
                rep.record("structure", f"c^{i + 1}_{j + 1}{k + 1}",
                           declared.c(i, j, k) - derived.c(i, j, k))
    return rep


def cmd_cohomology(args, run: Run) -> bool:
    data, raw = load_definition(args.path)
    run.add_input(raw)
    degrees = range(0, args.max_p + 1)
    try:
        if data["kind"] == "algebroid":
            P = parse_algebroid(data, f"{args.path}: $")
            D = args.poly_degree
            if args.truncation == "weight":
                if args.mode != "row":
                    raise InputError("weight truncation applies to --mode row", "--truncation")
                D += args.q
            res = run.timed("betti", betti, P, mode=args.mode, degrees=degrees, q=args.q, D=D,
                            truncation=args.truncation)
        elif data["kind"] == "groupoid":
            if args.mode != "row":
                raise InputError("groupoid files support --mode row only", f"{args.path}: $.kind")
            G, _ = parse_groupoid(data, f"{args.path}: $")
            res = run.timed("betti", bott_shulman_row_cohomology, G, args.q, args.max_p, args.poly_degree)
        else:
            raise InputError("cohomology expects an algebroid or groupoid file", f"{args.path}: $.kind")
    except TruncationError as e:
        raise InputError(str(e), f"witness: {e.witness}")
    run.findings.append({"name": "betti", "ok": True, **_jsonable(res.as_dict())})
    return True


def cmd_vanest(args, run: Run) -> bool:
    gdata, graw = load_definition(args.groupoid)
    run.add_input(graw)
    if gdata["kind"] != "groupoid":
        raise InputError("expected a groupoid file", f"{args.groupoid}: $.kind")
    G, _ = parse_groupoid(gdata, f"{args.groupoid}: $")
    w = _load_form(args, G, run)
    try:
        V = run.timed("vanest", vanest, w)
    except NotNormalized as e:
        rep = CertReport(name="normalized")
        rep.require(f"s_{e.index}^* w = 0", f"p={w.p}", False, str(e.residual))
        run.findings.append(finding(rep))
        return False
    run.extra["element"] = str(V)
    run.findings.append(finding(run.timed("compatibility", compatibility_check, w)))
    return all(f["ok"] for f in run.findings)


def _load_form(args, G: SplitGroupoid, run: Run) -> BSForm:
    try:
        raw = open(args.form, "rb").read()
    except OSError as e:
        raise InputError(f"cannot read {args.form}: {e.strerror}", args.form)
    run.add_input(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise InputError(f"not UTF-8: {e.reason}", f"{args.form}: byte {e.start}")
    p = args.p
    stripped = text.strip()
    where = args.form
    if stripped.startswith("{"):
        try:
            d = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise InputError(e.msg, f"{args.form}: line {e.lineno} column {e.colno}")
        _expect(d, {"kind", "level", "form"}, {"kind", "level", "form"}, f"{args.form}: $")
        if d["kind"] != "bs-form":
            raise InputError("expected kind 'bs-form'", f"{args.form}: $.kind")
        level = _int(d["level"], f"{args.form}: $.level")
        if p is not None and p != level:
            raise InputError(f"--p {p} disagrees with level {level}", f"{args.form}: $.level")
        p, stripped, where = level, d["form"], f"{args.form}: $.form"
    if p is None:
        raise InputError("--p is required for a plain form file", args.form)
    form = _form(stripped, G.nerve(p).chart, where)
    if args.q is not None and form and form.degrees() != {args.q}:
        raise InputError(f"form is not homogeneous of degree {args.q}", where)
    return BSForm(G, p, form)


def _im_payload(path: str, kind: str, keys: set, required: set):
    data, raw = load_definition(path)
    if data["kind"] != kind:
        raise InputError(f"expected kind {kind!r}", f"{path}: $.kind")
    _expect(data, keys, required, f"{path}: $")
    P = parse_algebroid(data["algebroid"], f"{path}: $.algebroid")
    k = _int(data["k"], f"{path}: $.k", 1) if "k" in data else None
    return data, raw, P, k


def _frame_forms(v, P: AlgebroidPresentation, where: str) -> list[PolyForm]:
    if not isinstance(v, list) or len(v) != P.rank:
        raise InputError(f"expected a list of {P.rank} forms (one per frame section)", where)
    return [_form(s, P.base, f"{where}[{i}]") for i, s in enumerate(v)]


def cmd_imcheck(args, run: Run) -> bool:
    data, raw, P, k = _im_payload(args.path, "im-data", {"kind", "algebroid", "tau", "phi", "k"},
                                  {"kind", "algebroid", "tau"})
    run.add_input(raw)
    tau = _frame_forms(data["tau"], P, f"{args.path}: $.tau")
    phi = _form(data["phi"], P.base, f"{args.path}: $.phi") if "phi" in data else None
    if k is None:
        k = next((t.degree() + 1 for t in tau if t), None)
        if k is None and phi:
            k = phi.degree() - 1
        if k is None:
            raise InputError("all data vanish; give k explicitly", f"{args.path}: $")
    try:
        im = run.timed("equations", check_im, P, tau, phi, k, seed=run.seed, samples=args.samples)
        dual = run.timed("dual_route", int_pr_equivalence, P, tau, phi, k, seed=run.seed)
    except PreconditionError as e:
        raise InputError(str(e), f"{args.path}: $.phi")
    except ValueError as e:
        raise InputError(str(e), f"{args.path}: $")
    run.findings.append(finding(im))
    run.findings.append(finding(dual))
    return im.ok and dual.ok


def cmd_transgression(args, run: Run) -> bool:
    data, raw, P, k = _im_payload(args.path, "transgression-data", {"kind", "algebroid", "tau", "l", "k"},
                                  {"kind", "algebroid", "tau", "l", "k"})
    run.add_input(raw)
    tau = _frame_forms(data["tau"], P, f"{args.path}: $.tau")
    l = _frame_forms(data["l"], P, f"{args.path}: $.l")
    if k < 2:
        raise InputError("k must be at least 2", f"{args.path}: $.k")
    try:
        rep = run.timed("transgression", check_transgression, P, l, tau, k, seed=run.seed, samples=args.samples)
    except PreconditionError as e:
        raise InputError(str(e), f"{args.path}: $.tau")
    except ValueError as e:
        raise InputError(str(e), f"{args.path}: $")
    run.findings.append(finding(rep))
    return rep.ok and bool(rep.info.get("equations_ok"))


def cmd_library(args, run: Run) -> bool:
    algs, grps = library(), groupoid_library()
    if args.name is None:
        run.extra["algebroids"] = sorted(algs)
        run.extra["groupoids"] = sorted(grps)
    elif args.name in algs:
        run.extra["definition"] = algebroid_to_json(algs[args.name])
    elif args.name in grps:
        run.extra["definition"] = groupoid_to_json(grps[args.name])
    else:
        raise InputError(f"no library object named {args.name!r}", "name")
    return True


# --- argument parsing -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weilalg", description="Exact certification for Lie algebroids, "
                                 "their Weil algebras and polynomial groupoids.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
        p.add_argument("--timings", action="store_true", help="record wall-clock timings in the report")

    p = sub.add_parser("check", help="certify an algebroid or groupoid definition")
    p.add_argument("path")
    p.add_argument("--samples", type=int, default=20, help="random elements for the d^2 suite")
    p.add_argument("--max-p", type=int, default=3, help="top nerve level for the simplicial identities")
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("cohomology", help="exact Betti numbers of a truncated complex")
    p.add_argument("path")
    p.add_argument("--mode", choices=("total", "row"), default="total")
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--max-p", type=int, default=3)
    p.add_argument("--poly-degree", type=int, default=0)
    p.add_argument("--truncation", choices=("coeff", "weight"), default="coeff",
                   help="bound the coefficient degree, or the scaling weight (coefficient degree plus generators)")
    common(p)
    p.set_defaults(fn=cmd_cohomology)

    p = sub.add_parser("vanest", help="Van Est image of a normalized form and its compatibility identities")
    p.add_argument("groupoid")
    p.add_argument("form")
    p.add_argument("--p", type=int, default=None, help="nerve level of a plain form file")
    p.add_argument("--q", type=int, default=None, help="expected form degree")
    common(p)
    p.set_defaults(fn=cmd_vanest)

    for name, fn, help_ in (("imcheck", cmd_imcheck, "IM-form equations and the flat-cocycle route"),
                            ("transgression", cmd_transgression, "transgression equations and the xi route")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("path")
        p.add_argument("--samples", type=int, default=6, help="random f-scaled section pairs")
        common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("library", help="list built-in examples or print one as a definition file")
    p.add_argument("name", nargs="?")
    common(p)
    p.set_defaults(fn=cmd_library)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    run = Run(args.command, args)
    try:
        ok = args.fn(args, run)
    except InputError as e:
        emit(run.report(False, {"message": str(e), "where": e.where}))
        print(f"error: {e.where}: {e}" if e.where else f"error: {e}", file=sys.stderr)
        return 2
    emit(run.report(ok))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
