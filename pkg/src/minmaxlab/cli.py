"""Command-line interface.

Subcommands:
  build-brouwer <circuit.json>     validate a circuit and report its map
  build-gda <descriptor.json>      build a min-max instance and report it
  verify <instance> <point-file>   check a candidate solution
  grad-check <instance>            finite-difference gradient audit
  solve <instance>                 run pgda / extragradient / grid search
  query-report <run-dir>           aggregate ledger totals from reports

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
The report directory can be overridden with $MINMAXLAB_REPORT_DIR.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import brouwer, gda, harness
from .circuit import circuit_from_json, validate_instance
from .config import DEFAULTS


def _load_points(path: Path, expected: int) -> np.ndarray:
    if path.suffix.lower() == ".csv":
        vec = np.loadtxt(path, delimiter=",", dtype=float).reshape(-1)
    else:
        vec = np.fromfile(path, dtype="<f8")
    if vec.size != expected:
        raise ValueError(f"{path}: expected {expected} values, found {vec.size}")
    return vec


def _is_gda_descriptor(path: Path) -> bool:
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})")
    return isinstance(payload, dict) and "mode" in payload


def _cmd_build_brouwer(args) -> int:
    path = Path(args.circuit)
    circuit = circuit_from_json(path.read_text())
    violations = validate_instance(circuit)
    if violations:
        print(json.dumps({"valid": False, "violations": violations}, indent=2))
        return 1
    bmap = brouwer.build_brouwer(circuit)
    kinds = {}
    for gate in circuit.gates:
        kinds[gate.kind] = kinds.get(gate.kind, 0) + 1
    summary = {"valid": True, "dim": bmap.dim, "nodes": len(circuit.nodes), "gates": kinds}
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        from .circuit import circuit_to_json

        Path(args.out).write_text(circuit_to_json(circuit))
    return 0


def _cmd_build_gda(args) -> int:
    inst = gda.load_gda_descriptor(args.descriptor)
    summary = {
        "dim_per_player": inst.dim,
        "nodes": inst.m,
        "replicas": inst.n,
        "params": inst.params.as_dict(),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_verify(args) -> int:
    inst_path = Path(args.instance)
    point_path = Path(args.points)
    if _is_gda_descriptor(inst_path):
        inst = gda.load_gda_descriptor(inst_path)
        vec = _load_points(point_path, 2 * inst.dim)
        x, y = vec[: inst.dim], vec[inst.dim:]
        result = gda.dichotomy_extract(inst, x, y)
        payload = {
            "gap": result.gap,
            "gap_ok": result.gap_ok,
            "eps": inst.params.eps,
            "mode": inst.params.mode,
            "ledger": inst.ledger.snapshot(),
        }
        if result.warning:
            payload["warning"] = result.warning
        if result.witness is not None:
            payload["witness"] = {
                "node": result.witness.node,
                "replica": result.witness.replica,
                "residual": result.witness.residual,
            }
        else:
            payload["assignment"] = {
                k: ("bot" if v is None else v) for k, v in result.assignment.values.items()
            }
            payload["violations"] = [g.label() for g in result.violations]
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0 if result.gap_ok else 1
    circuit = circuit_from_json(inst_path.read_text())
    bmap = brouwer.build_brouwer(circuit)
    z = _load_points(point_path, bmap.dim)
    res = brouwer.residual(bmap, z)
    ok = res <= DEFAULTS.brouwer_eps
    assignment = brouwer.decode_brouwer(bmap, z)
    from .circuit import check_assignment

    violations = check_assignment(circuit, assignment)
    payload = {
        "residual": res,
        "ok": ok,
        "eps": DEFAULTS.brouwer_eps,
        "assignment": {k: ("bot" if v is None else v) for k, v in assignment.values.items()},
        "violations": [g.label() for g in violations],
        "ledger": bmap.ledger.snapshot(),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if ok else 1


def _cmd_grad_check(args) -> int:
    inst_path = Path(args.instance)
    rng = np.random.default_rng(args.seed)
    h = args.h
    if _is_gda_descriptor(inst_path):
        inst = gda.load_gda_descriptor(inst_path)

        def value_fn(vec: np.ndarray) -> float:
            return gda.eval_f(inst, vec[: inst.dim], vec[inst.dim:])

        def grad_fn(vec: np.ndarray) -> np.ndarray:
            gx, gy = gda.eval_grad_f(inst, vec[: inst.dim], vec[inst.dim:])
            return np.concatenate([gx, gy])

        points = [
            h + (1 - 2 * h) * rng.random(2 * inst.dim) for _ in range(args.points)
        ]
        rep = harness.fd_check(value_fn, grad_fn, points, h)
    else:
        circuit = circuit_from_json(inst_path.read_text())
        bmap = brouwer.build_brouwer(circuit)
        worst = 0.0
        checked = 0
        for _ in range(args.points):
            z = h + (1 - 2 * h) * rng.random(bmap.dim)
            jac = brouwer.eval_JF(bmap, z)
            for j in range(bmap.dim):
                up = z.copy()
                up[j] += h
                down = z.copy()
                down[j] -= h
                fd_col = (brouwer.eval_F(bmap, up) - brouwer.eval_F(bmap, down)) / (2 * h)
                for i in range(bmap.dim):
                    err = float(abs(fd_col[i] - jac[i, j]))
                    scale = float(max(abs(fd_col[i]), abs(jac[i, j])))
                    if scale > 1.0:
                        err /= scale
                    worst = max(worst, err)
            checked += 1
        rep = harness.FdReport(worst, None, None, checked)
    ok = bool(rep.max_rel_err <= args.tol)
    payload = {
        "max_rel_err": float(rep.max_rel_err),
        "checked": rep.checked,
        "h": h,
        "tol": args.tol,
        "ok": ok,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0 if ok else 1


def _cmd_solve(args) -> int:
    inst_path = Path(args.instance)
    if not _is_gda_descriptor(inst_path):
        raise ValueError("solve expects a min-max instance descriptor")
    inst = gda.load_gda_descriptor(inst_path)
    obj = harness.GdaObjective(inst)
    if args.algo == "grid":
        x, y, gap = harness.grid_search_stationary(obj, args.resolution)
        payload = {
            "algorithm": "grid",
            "gap": gap,
            "ledger": inst.ledger.snapshot(),
            "mode": inst.params.mode,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return 0
    runner = harness.run_pgda if args.algo == "pgda" else harness.run_extragradient
    run = runner(obj, steps=args.steps, lr=args.lr, seed=args.seed, gap_every=args.gap_every)
    extra = {}
    if not run.aborted:
        outcome = gda.dichotomy_extract(inst, *run.best_point)
        extra["dichotomy"] = {
            "gap": outcome.gap,
            "gap_ok": outcome.gap_ok,
            "branch": "witness" if outcome.witness is not None else "assignment",
            "violations": [g.label() for g in outcome.violations or []],
        }
    paths = harness.write_report([run], {"instance": inst.ledger.snapshot()}, args.out, extra=extra)
    print(
        json.dumps(
            {
                "algorithm": run.algorithm,
                "best_gap": run.best_gap,
                "aborted": run.aborted,
                "reports": [str(p) for p in paths],
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 1 if run.aborted else 0


def _cmd_query_report(args) -> int:
    run_dir = Path(args.run_dir)
    if not run_dir.is_dir():
        raise ValueError(f"{run_dir} is not a directory")
    totals: dict = {}
    reports = sorted(run_dir.rglob("report.json"))
    for rep_path in reports:
        payload = json.loads(rep_path.read_text())
        for run in payload.get("runs", []):
            for key, value in run.get("ledger", {}).items():
                totals[key] = max(totals.get(key, 0), value)
        for ledger in payload.get("ledgers", {}).values():
            for key, value in ledger.items():
                totals[key] = max(totals.get(key, 0), value)
    print(json.dumps({"reports": len(reports), "ledger_totals": totals}, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minmaxlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-brouwer", help="validate a circuit and report its map")
    p.add_argument("circuit")
    p.add_argument("--out", default=None, help="write canonical circuit JSON here")
    p.set_defaults(func=_cmd_build_brouwer)

    p = sub.add_parser("build-gda", help="build a min-max instance from a descriptor")
    p.add_argument("descriptor")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_build_gda)

    p = sub.add_parser("verify", help="verify a candidate point")
    p.add_argument("instance")
    p.add_argument("points")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("grad-check", help="finite-difference derivative audit")
    p.add_argument("instance")
    p.add_argument("--h", type=float, default=DEFAULTS.grad_fd_step)
    p.add_argument("--points", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULTS.grad_fd_rel_tol)
    p.set_defaults(func=_cmd_grad_check)

    p = sub.add_parser("solve", help="run a solver on an instance")
    p.add_argument("instance")
    p.add_argument("--algo", choices=("pgda", "extragradient", "grid"), required=True)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gap-every", type=int, default=100)
    p.add_argument("--resolution", type=int, default=11)
    p.add_argument("--out", default=None, help="report directory")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("query-report", help="aggregate ledger totals from run reports")
    p.add_argument("run_dir")
    p.set_defaults(func=_cmd_query_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
