"""Solvers, validators, and reporting around the min-max oracles.

Solvers talk to objectives only through ledgered value/gradient oracles
(anything with ``dim_x``, ``dim_y``, ``value``, ``grad``, ``ledger``,
``mode``).  Projected gradient descent-ascent iterates

    (x, y) <- (clip(x - lr * df/dx), clip(y + lr * df/dy))

and famously cycles on bilinear saddles at fixed step size, while the
extragradient variant (gradient at an extrapolated midpoint) converges;
both are provided as observables, not as endorsed algorithms.  The
stationarity gap of every visited iterate is computed from the gradient
already needed by the update, so a PGDA iteration costs exactly one
gradient-oracle call and an extragradient iteration exactly two.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULTS
from .gda import GdaInstance, endpoint_gap, eval_f, eval_grad_f
from .ledger import QueryLedger


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

@dataclass
class GdaObjective:
    """Ledgered oracle view of a built min-max instance."""

    inst: GdaInstance

    @property
    def dim_x(self) -> int:
        return self.inst.dim

    @property
    def dim_y(self) -> int:
        return self.inst.dim

    @property
    def ledger(self) -> QueryLedger:
        return self.inst.ledger

    @property
    def mode(self) -> str:
        return self.inst.params.mode

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        return eval_f(self.inst, x, y)

    def grad(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return eval_grad_f(self.inst, x, y)


@dataclass
class BilinearToy:
    """f(x, y) = (x - 1/2)(y - 1/2) on [0,1]^2: the canonical cycling saddle."""

    ledger: QueryLedger = field(default_factory=QueryLedger)
    mode: str = "toy"
    dim_x: int = 1
    dim_y: int = 1

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        self.ledger.record("f_evals")
        return float((x[0] - 0.5) * (y[0] - 0.5))

    def grad(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        self.ledger.record("grad_f_evals")
        return y - 0.5, x - 0.5


# ---------------------------------------------------------------------------
# solver runs
# ---------------------------------------------------------------------------

@dataclass
class SolverRun:
    algorithm: str
    step_size: float
    iterations: int
    seed: Optional[int]
    mode: str
    best_gap: float
    best_point: Tuple[np.ndarray, np.ndarray]
    final_point: Tuple[np.ndarray, np.ndarray]
    gap_curve: List[Tuple[int, float]]
    ledger_snapshot: Dict[str, int]
    aborted: bool = False
    diagnostic: Optional[str] = None


def _start_point(obj, seed: Optional[int], x0, y0) -> Tuple[np.ndarray, np.ndarray]:
    # Seeded starts use numpy's Generator with the PCG64 bit stream; the
    # stream identity is configuration, not contract.
    if x0 is not None and y0 is not None:
        return np.asarray(x0, dtype=float).copy(), np.asarray(y0, dtype=float).copy()
    rng = np.random.default_rng(0 if seed is None else seed)
    return rng.random(obj.dim_x), rng.random(obj.dim_y)


def _run_gda_family(
    obj,
    steps: int,
    lr: Optional[float],
    seed: Optional[int],
    x0,
    y0,
    gap_every: int,
    extragradient: bool,
) -> SolverRun:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if lr is None:
        lr = 0.1 / math.sqrt(steps)
    if lr < 0:
        raise ValueError("step size must be >= 0")
    x, y = _start_point(obj, seed, x0, y0)
    best_gap = math.inf
    best_point = (x.copy(), y.copy())
    curve: List[Tuple[int, float]] = []
    aborted = False
    diagnostic = None
    algorithm = "extragradient" if extragradient else "pgda"
    for t in range(steps):
        gx, gy = obj.grad(x, y)
        if not (np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))):
            aborted, diagnostic = True, f"non-finite gradient at iteration {t}"
            break
        gap = endpoint_gap(x, y, gx, gy)
        if gap < best_gap:
            best_gap = gap
            best_point = (x.copy(), y.copy())
        if t % gap_every == 0:
            curve.append((t, gap))
        if extragradient:
            xm = np.clip(x - lr * gx, 0.0, 1.0)
            ym = np.clip(y + lr * gy, 0.0, 1.0)
            gxm, gym = obj.grad(xm, ym)
            if not (np.all(np.isfinite(gxm)) and np.all(np.isfinite(gym))):
                aborted, diagnostic = True, f"non-finite gradient at iteration {t}"
                break
            x = np.clip(x - lr * gxm, 0.0, 1.0)
            y = np.clip(y + lr * gym, 0.0, 1.0)
        else:
            x = np.clip(x - lr * gx, 0.0, 1.0)
            y = np.clip(y + lr * gy, 0.0, 1.0)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            aborted, diagnostic = True, f"non-finite iterate at iteration {t}"
            break
    return SolverRun(
        algorithm=algorithm,
        step_size=lr,
        iterations=steps,
        seed=seed,
        mode=obj.mode,
        best_gap=best_gap,
        best_point=best_point,
        final_point=(x, y),
        gap_curve=curve,
        ledger_snapshot=obj.ledger.snapshot(),
        aborted=aborted,
        diagnostic=diagnostic,
    )


def run_pgda(
    obj,
    steps: int,
    lr: Optional[float] = None,
    seed: Optional[int] = 0,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    gap_every: int = 100,
) -> SolverRun:
    """Projected gradient descent-ascent; one gradient call per iteration."""
    return _run_gda_family(obj, steps, lr, seed, x0, y0, gap_every, extragradient=False)


def run_extragradient(
    obj,
    steps: int,
    lr: Optional[float] = None,
    seed: Optional[int] = 0,
    x0: Optional[np.ndarray] = None,
    y0: Optional[np.ndarray] = None,
    gap_every: int = 100,
) -> SolverRun:
    """Extragradient; exactly two gradient calls per iteration."""
    return _run_gda_family(obj, steps, lr, seed, x0, y0, gap_every, extragradient=True)


def grid_search_stationary(obj, resolution: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Exhaustive stationarity scan of the uniform grid; budget-gated."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    total_dim = obj.dim_x + obj.dim_y
    if resolution**total_dim > DEFAULTS.grid_search_budget:
        raise ValueError(
            f"grid of size {resolution}^{total_dim} exceeds budget {DEFAULTS.grid_search_budget}"
        )
    axis = np.linspace(0.0, 1.0, resolution)
    best = (None, None, math.inf)
    for xs in product(axis, repeat=obj.dim_x):
        x = np.array(xs)
        for ys in product(axis, repeat=obj.dim_y):
            y = np.array(ys)
            gx, gy = obj.grad(x, y)
            gap = endpoint_gap(x, y, gx, gy)
            if gap < best[2]:
                best = (x, y, gap)
    return best


# ---------------------------------------------------------------------------
# finite-difference gradient checking
# ---------------------------------------------------------------------------

@dataclass
class FdReport:
    max_rel_err: float
    worst_coordinate: Optional[int]
    worst_point_index: Optional[int]
    checked: int
    skipped: List[Tuple[int, str]] = field(default_factory=list)


def fd_check(
    value_fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    points: Sequence[np.ndarray],
    h: float,
) -> FdReport:
    """Central-difference check of grad_fn against value_fn.

    Per-coordinate error |fd - analytic|, divided by max(|fd|, |analytic|)
    when that magnitude exceeds 1.  Points closer than h to the box
    boundary are skipped with a note (the stencil would leave the domain).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    max_err = 0.0
    worst_coord = None
    worst_point = None
    checked = 0
    skipped: List[Tuple[int, str]] = []
    for p_idx, point in enumerate(points):
        point = np.asarray(point, dtype=float)
        if np.any(point < h) or np.any(point > 1.0 - h):
            skipped.append((p_idx, "within h of the boundary"))
            continue
        analytic = np.asarray(grad_fn(point), dtype=float)
        checked += 1
        for j in range(point.size):
            shifted = point.copy()
            shifted[j] = point[j] + h
            up = value_fn(shifted)
            shifted[j] = point[j] - h
            down = value_fn(shifted)
            fd = (up - down) / (2.0 * h)
            err = float(abs(fd - analytic[j]))
            scale = float(max(abs(fd), abs(analytic[j])))
            if scale > 1.0:
                err /= scale
            if err > max_err:
                max_err = err
                worst_coord = j
                worst_point = p_idx
    return FdReport(
        max_rel_err=max_err,
        worst_coordinate=worst_coord,
        worst_point_index=worst_point,
        checked=checked,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

def report_dir(override: Optional[str] = None) -> Path:
    """Report directory: explicit argument, else $MINMAXLAB_REPORT_DIR,
    else ./reports."""
    if override:
        return Path(override)
    env = os.environ.get("MINMAXLAB_REPORT_DIR")
    return Path(env) if env else Path("reports")


def write_report(
    runs: Sequence[SolverRun],
    ledgers: Optional[Dict[str, Dict[str, int]]] = None,
    out: Optional[str] = None,
    extra: Optional[Dict[str, object]] = None,
) -> List[Path]:
    """Emit gap_curves.csv and report.json; byte-stable for equal inputs.

    `extra` is merged verbatim under the "extra" key and is the slot for
    dichotomy outcomes, bound-certificate summaries, and similar
    side-channel results.
    """
    out_path = report_dir(out)
    try:
        out_path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RuntimeError(f"cannot create report directory {out_path}: {exc}")
    csv_path = out_path / "gap_curves.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["run", "algorithm", "iteration", "gap"])
        for idx, run in enumerate(runs):
            for iteration, gap in run.gap_curve:
                writer.writerow([idx, run.algorithm, iteration, repr(gap)])
    json_path = out_path / "report.json"
    payload = {
        "runs": [
            {
                "algorithm": run.algorithm,
                "step_size": run.step_size,
                "iterations": run.iterations,
                "seed": run.seed,
                "mode": run.mode,
                "best_gap": run.best_gap,
                "aborted": run.aborted,
                "diagnostic": run.diagnostic,
                "ledger": dict(sorted(run.ledger_snapshot.items())),
            }
            for run in runs
        ],
        "ledgers": {k: dict(sorted(v.items())) for k, v in (ledgers or {}).items()},
        "extra": extra or {},
    }
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return [csv_path, json_path]
