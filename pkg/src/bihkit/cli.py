"""Command-line front end.

    bihkit check     SCENARIO   residual evaluation (direct/theorem/both)
    bihkit audit     SCENARIO   lemma and identity audits
    bihkit variation SCENARIO   first-variation sweep for the functionals
    bihkit props     SCENARIO   proposition/inequality checkers
    bihkit energy    SCENARIO   the five functionals by quadrature
    bihkit sweep     SCENARIO   refinement table for check/energy

Exit codes: 0 all requested verdicts pass, 2 a numeric verdict failed,
3 scenario validation error, 4 internal error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .audits import run_all_audits
from .calculus import PointCalculus
from .props import proposition_checkers
from .report import render_report, write_csv
from .residuals import (
    COROLLARIES,
    bi_f_tension_direct,
    compare_modes,
    f_bitension_direct,
    theorem_residual,
)
from .scenario import ScenarioError, load_scenario
from .spaces import SpaceError
from .variational import ENERGIES, energy, first_variation_check

PASS, NUMERIC_FAIL, VALIDATION_FAIL, INTERNAL_FAIL = 0, 2, 3, 4


def _base_report(sc, command, args):
    return {
        "tool_version": __version__,
        "command": command,
        "scenario": sc.path,
        "scenario_digest": f"sha256:{sc.digest}",
        "errata": "on" if _errata_on(sc, args) else "off",
        "seed": args.seed if args.seed is not None else sc.seed,
    }


def _errata_on(sc, args):
    if args.errata is not None:
        return args.errata == "on"
    return sc.mode.get("errata", "on") == "on"


def _norm(v):
    return float(np.sqrt(np.dot(v, v)))


def cmd_check(sc, args, out):
    imm = sc.immersion
    tol = args.tol if args.tol is not None else sc.tolerance("mode_agreement", 1e-6)
    mode = args.mode or sc.mode.get("residual", "both")
    kind = sc.mode.get("kind", "fbh")
    corollary = sc.mode.get("corollary")
    errata = _errata_on(sc, args)
    points = sc.sample_points()
    rows = []
    worst_direct = 0.0
    worst_delta = 0.0
    worst_theorem = 0.0
    reduction_delta = 0.0
    for p in points:
        pc = PointCalculus(imm, p)
        row = {"point": [float(x) for x in p]}
        if mode in ("direct", "both"):
            direct = (f_bitension_direct if kind == "fbh" else bi_f_tension_direct)(
                imm, p, calc=pc
            )
            G0 = pc.G_val
            dn = float(np.sqrt(max(direct @ G0 @ direct, 0.0)))
            row["direct_norm"] = dn
            worst_direct = max(worst_direct, dn)
        if mode in ("theorem", "both"):
            rep = theorem_residual(imm, p, kind=kind, errata=errata, calc=pc)
            row["theorem_normal_norm"] = rep.normal_norm
            row["theorem_tangent_norm"] = rep.tangent_norm
            worst_theorem = max(worst_theorem, rep.total_norm / rep.scale)
        if mode == "both":
            cmpres = compare_modes(imm, p, kind=kind, errata=errata, calc=pc, tol=tol)
            row["mode_delta_normal"] = cmpres["delta_normal"]
            row["mode_delta_tangent"] = cmpres["delta_tangent"]
            worst_delta = max(worst_delta, cmpres["delta_normal"],
                              cmpres["delta_tangent"])
            if cmpres["itemized_corrections"] and "itemized_corrections" not in out:
                out["itemized_corrections"] = cmpres["itemized_corrections"]
        if corollary:
            rep_parent = theorem_residual(imm, p, kind=kind, errata=errata, calc=pc)
            rep_cor = theorem_residual(imm, p, kind=kind, errata=errata,
                                       corollary=corollary, calc=pc)
            dd = max(
                _norm(rep_parent.normal - rep_cor.normal),
                _norm(rep_parent.tangent - rep_cor.tangent),
            ) / rep_parent.scale
            row["reduction_delta"] = dd
            reduction_delta = max(reduction_delta, dd)
        rows.append(row)
    out["kind"] = kind
    out["points"] = len(rows)
    out["rows"] = rows
    if mode in ("direct", "both"):
        out["max_direct_norm"] = worst_direct
        out["direct_verdict"] = (
            "harmonic-type residual ~ 0 (within tol)"
            if worst_direct <= tol else "nonzero residual"
        )
    if mode in ("theorem", "both"):
        out["max_theorem_norm"] = worst_theorem
    exit_code = PASS
    if mode == "both":
        out["max_mode_delta"] = worst_delta
        out["mode_agreement"] = bool(worst_delta <= tol)
        if not out["mode_agreement"]:
            exit_code = NUMERIC_FAIL
    if corollary:
        rtol = sc.tolerance("reduction", 1e-10)
        out["corollary"] = corollary
        out["max_reduction_delta"] = reduction_delta
        out["reduction_agreement"] = bool(reduction_delta <= rtol)
        if not out["reduction_agreement"]:
            exit_code = NUMERIC_FAIL
    return exit_code, rows


def cmd_audit(sc, args, out):
    tol = args.tol if args.tol is not None else sc.tolerance("audit", 1e-6)
    points = sc.sample_points()
    if not sc.immersion.ambient.has_metric:
        from .audits import curvature_trace_audit
        from .expr import eval_on_jets
        from .jets import Jet, jet_space

        seed = args.seed if args.seed is not None else sc.seed
        # evaluate the immersion map as plain chart positions
        sp = jet_space(len(sc.immersion.params), 0)
        chart_points = []
        for p in points:
            env = {name: Jet.constant(sp, p[i])
                   for i, name in enumerate(sc.immersion.params)}
            chart_points.append(
                [eval_on_jets(c, env).value for c in sc.immersion.components]
            )
        result = curvature_trace_audit(sc.immersion.ambient, chart_points, seed=seed)
        out["curvature_trace_audit"] = result
        worst = max(result["normal_trace"], result["tangent_trace"])
        out["max_delta"] = worst
        out["pass"] = bool(worst <= tol)
        return (PASS if out["pass"] else NUMERIC_FAIL), [result]
    rows, summary = run_all_audits(sc.immersion, points)
    out["summary"] = summary
    out["points"] = len(points)
    worst = max(
        summary["deltaH_translated"],
        summary["lemgene1_corrected"],
        summary["lemgene2_corrected"],
        summary["lemgene3"],
        summary["identity_max"],
    )
    out["max_delta"] = worst
    out["pass"] = bool(worst <= tol)
    return (PASS if out["pass"] else NUMERIC_FAIL), rows


def cmd_variation(sc, args, out):
    imm = sc.immersion
    grid = sc.quadrature()
    variation = sc.default_variation()
    tol = args.tol if args.tol is not None else sc.tolerance("variation", 1e-5)
    which_list = [args.functional] if args.functional else list(ENERGIES)
    results = []
    ok = True
    for which in which_list:
        fv = first_variation_check(imm, grid, which, variation)
        plateau = min(fv["deltas"])
        scale = 1.0 + abs(fv["rhs"])
        entry = {
            "functional": which,
            "steps": fv["steps"],
            "finite_differences": fv["lhs"],
            "pairing_value": fv["rhs"],
            "deltas": fv["deltas"],
            "plateau": plateau,
            "pass": bool(plateau <= tol * scale),
        }
        ok = ok and entry["pass"]
        results.append(entry)
    out["results"] = results
    out["pass"] = ok
    return (PASS if ok else NUMERIC_FAIL), results


def cmd_props(sc, args, out):
    tol = args.tol if args.tol is not None else sc.tolerance("identity", 1e-8)
    points = sc.sample_points()
    verdicts = proposition_checkers(sc.immersion, points, tol=tol,
                                    flag_tol=sc.tolerance("flags", 1e-6))
    out["verdicts"] = verdicts
    bad = any(v.get("verdict") == "violated" for v in verdicts)
    out["pass"] = not bad
    return (PASS if not bad else NUMERIC_FAIL), verdicts


def cmd_energy(sc, args, out):
    grid = sc.quadrature()
    values = {}
    nodes = None
    for which in ENERGIES:
        val, nodes = energy(sc.immersion, grid, which, node_cache=nodes)
        values[which] = val
    out["energies"] = values
    out["quadrature_nodes"] = len(grid)
    return PASS, [values]


def cmd_sweep(sc, args, out):
    target = sc.mode.get("sweep_target", "check")
    levels = [1, 2]
    table = []
    if target == "energy":
        for lv in levels:
            grid = sc.quadrature(factor=lv)
            row = {"refinement": lv, "nodes": len(grid)}
            nodes = None
            for which in ENERGIES:
                val, nodes = energy(sc.immersion, grid, which, node_cache=nodes)
                row[which] = val
            table.append(row)
        drift = max(
            abs(table[1][w] - table[0][w]) for w in ENERGIES
        )
    else:
        kind = sc.mode.get("kind", "fbh")
        errata = _errata_on(sc, args)
        for lv in levels:
            pts = sc.sample_points(factor=lv)
            worst = 0.0
            for p in pts:
                rep = theorem_residual(sc.immersion, p, kind=kind, errata=errata)
                worst = max(worst, rep.total_norm / rep.scale)
            table.append({"refinement": lv, "points": len(pts),
                          "max_residual": worst})
        drift = abs(table[1]["max_residual"] - table[0]["max_residual"])
    out["target"] = target
    out["table"] = table
    out["drift"] = drift
    return PASS, table


COMMANDS = {
    "check": cmd_check,
    "audit": cmd_audit,
    "variation": cmd_variation,
    "props": cmd_props,
    "energy": cmd_energy,
    "sweep": cmd_sweep,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="bihkit", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("scenario", help="path to a scenario file")
    ap.add_argument("--mode", choices=["direct", "theorem", "both"], default=None)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--errata", choices=["on", "off"], default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--report", default=None, help="write the report document here")
    ap.add_argument("--csv", default=None, help="write per-point norms as CSV")
    ap.add_argument("--quiet", action="store_true")
    ap.add_argument("--functional", choices=list(ENERGIES), default=None,
                    help="restrict `variation` to one functional")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        sc = load_scenario(args.scenario)
    except (ScenarioError, FileNotFoundError, OSError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return VALIDATION_FAIL
    out = _base_report(sc, args.command, args)
    try:
        code, rows = COMMANDS[args.command](sc, args, out)
    except (ScenarioError, SpaceError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return VALIDATION_FAIL
    except Exception as exc:  # pragma: no cover - guarded surface
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL_FAIL
    out["wall_time_ms"] = int((time.monotonic() - started) * 1000)
    text = render_report(out)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    if args.csv and args.command == "check":
        header = sorted({k for r in rows for k in r if k != "point"})
        csv_rows = [
            [";".join(f"{x!r}" for x in r["point"])] + [r.get(k, "") for k in header]
            for r in rows
        ]
        write_csv(args.csv, ["point"] + header, csv_rows)
    if not args.quiet:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
