"""``oddkh`` command line.

Exit codes: 0 ok, 1 a verification failed, 2 bad input, 3 crossing cap hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import homology as H
from . import pipeline
from .cube import Cube
from .linkdiag import (
    DEFAULT_MAX_CROSSINGS,
    TABLE_ENV,
    KnotRecord,
    PDError,
    ResourceLimitError,
    load_table,
    orient,
    parse_pd,
    select,
)
from .signs import edge_assignment

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    flavor: str = "odd"
    reduced: bool = False
    coeffs: str = "Z"
    assignment_type: str = "X"
    basepoint: int | None = None
    cap: int = DEFAULT_MAX_CROSSINGS
    jobs: int = 1
    output: str = "text"


def _config(args) -> RunConfig:
    return RunConfig(
        flavor=getattr(args, "flavor", "odd"),
        reduced=getattr(args, "reduced", False),
        coeffs=getattr(args, "coeffs", "Z"),
        assignment_type=getattr(args, "type", "X"),
        basepoint=getattr(args, "basepoint", None),
        cap=args.cap,
        jobs=getattr(args, "jobs", 1),
        output="json" if getattr(args, "json", False) else "text",
    )


def _records(args, default_all: bool = False) -> list[KnotRecord]:
    """Records named by --knot / --pd / table filters."""
    out: list[KnotRecord] = []
    for k, text in enumerate(getattr(args, "pd", None) or []):
        try:
            pd = parse_pd(text)
        except PDError as exc:
            raise InputError(f"--pd {text!r}: {exc}") from None
        out.append(KnotRecord(name=f"pd{k + 1}" if len(args.pd) > 1 else "pd", pd=pd))
    names = getattr(args, "knot", None) or []
    want_table = names or getattr(args, "all", False) or (default_all and not out)
    if want_table:
        try:
            table = load_table(args.table)
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read knot table: {exc}") from None
        if names:
            missing = [n for n in names if n not in table]
            if missing:
                raise InputError(f"unknown knot(s): {', '.join(missing)}")
            out += [table[n] for n in names]
        else:
            out += select(table, getattr(args, "max_crossings", None),
                          True if getattr(args, "alternating_only", False) else None)
    if not out:
        raise InputError("nothing to do: give --knot, --pd or --all")
    for rec in out:
        if rec.pd.n > args.cap:
            raise ResourceLimitError(
                f"{rec.name} has {rec.pd.n} crossings, above the cap of {args.cap}"
            )
    return out


def _emit(args, payload, text: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=1))
    else:
        print(text)


def _fmt_group(g) -> str:
    if isinstance(g, H.BigradedGroup):
        free = H.poincare_string(g.rational())
        tors = [f"Z/{t} at (m={m}, s={s})" for (m, s), (_, ts) in g.groups.items() for t in ts]
        return free + ("" if not tors else "\n  torsion: " + ", ".join(tors))
    return H.poincare_string(g)


def _compute_one(job):
    rec, flavor, cfg = job
    return pipeline.compute(rec, flavor, cfg.reduced, cfg.coeffs,
                            assignment_type=cfg.assignment_type,
                            basepoint=cfg.basepoint, max_crossings=cfg.cap)


def _map(fn, jobs: list, width: int) -> list:
    """Ordered map; a process pool when ``width > 1`` (results stay in input order)."""
    if width <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=width) as pool:
        return list(pool.map(fn, jobs))


def cmd_compute(args) -> int:
    cfg = _config(args)
    flavors = ["odd", "even"] if cfg.flavor == "both" else [cfg.flavor]
    jobs = [(rec, flavor, cfg) for rec in _records(args) for flavor in flavors]
    results, lines = [], []
    kind = "reduced" if cfg.reduced else "unreduced"
    for (rec, flavor, _), g in zip(jobs, _map(_compute_one, jobs, cfg.jobs)):
        results.append(H.results_json(rec.name, flavor, cfg.reduced, cfg.coeffs, g))
        lines.append(f"{rec.name} {flavor} {kind} {cfg.coeffs}: {_fmt_group(g)}")
    _emit(args, results if len(results) > 1 else results[0], "\n".join(lines))
    return EXIT_OK


def _verify_one(job):
    rec, checks, cap = job
    return pipeline.run_checks(rec, checks, cap)


def cmd_verify(args) -> int:
    checks = args.check or list(pipeline.DEFAULT_CHECKS)
    if "all" in checks:
        checks = list(pipeline.CHECKS)
    records = _records(args, default_all=True)
    failures = []
    jobs = [(rec, tuple(checks), args.cap) for rec in records]
    for found in _map(_verify_one, jobs, args.jobs):
        failures.extend(found)
        if failures and not args.keep_going:
            break
    report = {"checked": len(records), "checks": checks,
              "failures": [f.to_json() for f in failures]}
    if failures:
        _emit(args, report, "FAIL " + json.dumps(failures[0].to_json()))
        return EXIT_FAIL
    _emit(args, report, f"ok: {len(records)} diagram(s), checks {', '.join(checks)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    rows, lines = [], []
    lines.append(f"{'knot':10} {'odd':>5} {'even':>5}  status")
    for rec in _records(args, default_all=True):
        odd = pipeline.compute(rec, "odd", True, "Q", max_crossings=args.cap)
        even = pipeline.compute(rec, "even", True, "Q", max_crossings=args.cap)
        thin_o, _ = H.thinness(odd, rec.signature)
        thin_e, _ = H.thinness(even, rec.signature)
        if odd == even:
            status = "both thin" if thin_o and thin_e else "equal"
        else:
            status = "differ"
        rows.append({"knot": rec.name, "odd_rank": sum(odd.values()), "even_rank": sum(even.values()),
                     "odd_thin": thin_o, "even_thin": thin_e, "status": status,
                     "odd": H.poincare_string(odd), "even": H.poincare_string(even)})
        if status == "differ" or not args.differ_only:
            lines.append(f"{rec.name:10} {rows[-1]['odd_rank']:5d} {rows[-1]['even_rank']:5d}  {status}")
    if args.differ_only:
        rows = [r for r in rows if r["status"] == "differ"]
    _emit(args, rows, "\n".join(lines))
    return EXIT_OK


def cmd_invariance(args) -> int:
    records = _records(args)
    diagrams = [orient(r.pd) for r in records]
    fail = pipeline.check_invariance(diagrams, records[0].name, args.coeffs,
                                     arrows_limit=args.arrow_samples)
    if fail is not None:
        _emit(args, fail.to_json(), "FAIL " + json.dumps(fail.to_json()))
        return EXIT_FAIL
    g = pipeline.compute(diagrams[0], "odd", False, args.coeffs)
    _emit(args, {"diagrams": len(diagrams), "status": "identical"},
          f"ok: {len(diagrams)} diagram(s) agree: {_fmt_group(g)}")
    return EXIT_OK


def cmd_dump_cube(args) -> int:
    rec = _records(args)[0]
    cube = Cube(orient(rec.pd), args.cap)
    out = cube.to_json()
    out["knot"] = rec.name
    out["assignment_type"] = args.type
    out["edge_signs"] = edge_assignment(cube, args.type).to_json()
    print(json.dumps(out, indent=None if args.compact else 1))
    return EXIT_OK


def cmd_dump_complex(args) -> int:
    rec = _records(args)[0]
    c = pipeline.build_complex(rec, args.flavor, args.reduced, args.type,
                               args.basepoint, max_crossings=args.cap)
    out = c.to_json(with_generators=not args.no_generators)
    out["knot"] = rec.name
    print(json.dumps(out, indent=None if args.compact else 1))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oddkh", description="Odd and even Khovanov homology from PD codes.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, many=True):
        sp.add_argument("--knot", action="append", help="knot name from the table (repeatable)")
        sp.add_argument("--pd", action="append", help="PD code text or JSON (repeatable)")
        sp.add_argument("--table", default=None,
                        help=f"knot table JSON (default: ${TABLE_ENV} or the bundled table)")
        sp.add_argument("--cap", type=int, default=DEFAULT_MAX_CROSSINGS,
                        help="refuse diagrams with more crossings than this")
        sp.add_argument("--json", action="store_true", help="JSON output")
        if many:
            sp.add_argument("--all", action="store_true", help="every knot in the table")
            sp.add_argument("--max-crossings", type=int, default=None, help="table filter")
            sp.add_argument("--alternating-only", action="store_true", help="table filter")

    c = sub.add_parser("compute", help="bigraded homology")
    common(c)
    c.add_argument("--flavor", choices=["odd", "even", "both"], default="odd")
    c.add_argument("--reduced", action="store_true")
    c.add_argument("--coeffs", choices=sorted(H.COEFFS), default="Z")
    c.add_argument("--type", choices=["X", "Y"], default="X", help="edge assignment type")
    c.add_argument("--basepoint", type=int, default=None, help="arc label for reduction")
    c.add_argument("--jobs", type=int, default=1, help="worker processes")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run the property checks")
    common(v)
    v.add_argument("--check", action="append", choices=list(pipeline.CHECKS) + ["all"],
                   help="check to run (repeatable; default: all but thin)")
    v.add_argument("--keep-going", action="store_true", help="collect every failure")
    v.add_argument("--jobs", type=int, default=1, help="worker processes")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("compare", help="reduced odd vs even ranks over Q")
    common(k)
    k.add_argument("--differ-only", action="store_true", help="list only knots where they differ")
    k.set_defaults(func=cmd_compare)

    i = sub.add_parser("invariance", help="homology agrees across diagrams and choices")
    common(i, many=False)
    i.add_argument("--coeffs", choices=["Z", "Q", "F2", "F3"], default="Z")
    i.add_argument("--arrow-samples", type=int, default=4)
    i.set_defaults(func=cmd_invariance)

    dc = sub.add_parser("dump-cube", help="face types and edge signs as JSON")
    common(dc, many=False)
    dc.add_argument("--type", choices=["X", "Y"], default="X")
    dc.add_argument("--compact", action="store_true")
    dc.set_defaults(func=cmd_dump_cube, json=True)

    dx = sub.add_parser("dump-complex", help="ranks and sparse differential as JSON")
    common(dx, many=False)
    dx.add_argument("--flavor", choices=["odd", "even"], default="odd")
    dx.add_argument("--reduced", action="store_true")
    dx.add_argument("--type", choices=["X", "Y"], default="X")
    dx.add_argument("--basepoint", type=int, default=None)
    dx.add_argument("--no-generators", action="store_true")
    dx.add_argument("--compact", action="store_true")
    dx.set_defaults(func=cmd_dump_complex, json=True)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cap > DEFAULT_MAX_CROSSINGS:
        print(f"note: cap {args.cap} allows up to 2^{args.cap} resolutions; "
              f"memory grows roughly like 4^n generators", file=sys.stderr)
    try:
        return args.func(args)
    except (InputError, PDError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
