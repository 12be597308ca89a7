"""Smooth self-map of the cube built from an oracle circuit.

Every node w of a structurally valid circuit yields one coordinate of a
C-infinity map F: [0,1]^d -> [0,1]^d with d = |V|:

  NOR (u, v -> w):      F_w(z) = g(z_u + z_v)
  PURIFY (u -> v, w):   F_v(z) = ell(z_u + 1/4),  F_w(z) = ell(z_u - 1/4)
  ORACLE (u_1..u_N -> v): F_v(z) = smooth interpolation of L at
                          (z_{u_1}, ..., z_{u_N})

Only ORACLE coordinates touch the oracle, and each touches it at most
once per evaluation, so a full F or Jacobian evaluation costs at most
|V| oracle queries.  Entrywise |dF_i/dz_j| <= e^12.

A point with residual ||F(z) - z||_inf <= 1/12 decodes to a satisfying
circuit assignment by thresholding: 0 at z_v <= 1/6, 1 at z_v >= 5/6,
bot in between.

Fixed-point search: plain damped iteration z <- (1-gamma) z + gamma F(z)
converges on instances whose loops are attracting, but circuits built
around negative feedback (e.g. the constant gadget) have strongly
repelling interior fixed points whose residual-<=-1/12 neighborhoods are
orders of magnitude narrower than any orbit spacing; damped orbits
settle on limit cycles that never enter them.  For those, the instance
is reduced along a feedback vertex cut: non-cut coordinates are
propagated exactly through their gates, and an adaptively damped
iteration with a bracketing safeguard drives the remaining cut
coordinate(s) to consistency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .boolinterp import interp_eval, interp_grad
from .circuit import (
    BOT,
    NOR,
    ORACLE,
    PURIFY,
    Assignment,
    CircuitInstance,
    validate_instance,
)
from .config import DEFAULTS
from .ledger import QueryLedger
from .smoothstep import ELL, G


@dataclass
class BrouwerMap:
    circuit: CircuitInstance
    dim: int
    node_order: Tuple[str, ...]
    ledger: QueryLedger
    components: Tuple[tuple, ...] = field(repr=False)

    def index(self, node: str) -> int:
        return self.node_order.index(node)


def build_brouwer(inst: CircuitInstance) -> BrouwerMap:
    """Compile a validated circuit into its coordinate map."""
    violations = validate_instance(inst)
    if violations:
        raise ValueError("invalid circuit instance: " + "; ".join(violations))
    order = tuple(inst.nodes)
    idx = {v: i for i, v in enumerate(order)}
    components: List[tuple] = [None] * len(order)  # type: ignore[list-item]
    for gate in inst.gates:
        if gate.kind == NOR:
            u, v = gate.inputs
            (w,) = gate.outputs
            components[idx[w]] = (NOR, (idx[u], idx[v]))
        elif gate.kind == PURIFY:
            (u,) = gate.inputs
            v, w = gate.outputs
            components[idx[v]] = (PURIFY, idx[u], +0.25)
            components[idx[w]] = (PURIFY, idx[u], -0.25)
        elif gate.kind == ORACLE:
            (v,) = gate.outputs
            components[idx[v]] = (ORACLE, tuple(idx[u] for u in gate.inputs))
    return BrouwerMap(
        circuit=inst,
        dim=len(order),
        node_order=order,
        ledger=inst.ledger,
        components=tuple(components),
    )


def _check_domain(bmap: BrouwerMap, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (bmap.dim,):
        raise ValueError(f"point has shape {z.shape}, expected ({bmap.dim},)")
    if np.any(z < 0.0) or np.any(z > 1.0):
        raise ValueError("point outside [0,1]^d")
    return z


def eval_component(bmap: BrouwerMap, node_idx: int, z: np.ndarray) -> float:
    comp = bmap.components[node_idx]
    if comp[0] == NOR:
        iu, iv = comp[1]
        return G(z[iu] + z[iv])
    if comp[0] == PURIFY:
        return ELL(z[comp[1]] + comp[2])
    inputs = comp[1]
    return interp_eval([z[i] for i in inputs], bmap.circuit.oracle)


def eval_F(bmap: BrouwerMap, z: np.ndarray) -> np.ndarray:
    """F(z); at most one oracle query per ORACLE coordinate."""
    z = _check_domain(bmap, z)
    bmap.ledger.record("F_evals")
    return np.array([eval_component(bmap, i, z) for i in range(bmap.dim)])


def eval_JF(bmap: BrouwerMap, z: np.ndarray) -> np.ndarray:
    """Dense Jacobian; rows are sparse by gate fan-in, filled analytically."""
    z = _check_domain(bmap, z)
    bmap.ledger.record("JF_evals")
    jac = np.zeros((bmap.dim, bmap.dim))
    for w, comp in enumerate(bmap.components):
        if comp[0] == NOR:
            iu, iv = comp[1]
            slope = G.d1(z[iu] + z[iv])
            jac[w, iu] = slope
            jac[w, iv] = slope
        elif comp[0] == PURIFY:
            jac[w, comp[1]] = ELL.d1(z[comp[1]] + comp[2])
        else:
            inputs = comp[1]
            grad = interp_grad([z[i] for i in inputs], bmap.circuit.oracle)
            for pos, col in enumerate(inputs):
                jac[w, col] = grad[pos]
    return jac


def displacement(bmap: BrouwerMap, z: np.ndarray) -> np.ndarray:
    """F(z) - z."""
    return eval_F(bmap, z) - np.asarray(z, dtype=float)


def residual(bmap: BrouwerMap, z: np.ndarray) -> float:
    return float(np.max(np.abs(eval_F(bmap, z) - z)))


def decode_brouwer(bmap: BrouwerMap, z: np.ndarray) -> Assignment:
    """Threshold decoding: 0 at z_v <= 1/6, 1 at z_v >= 5/6, bot between."""
    z = _check_domain(bmap, z)
    values = {}
    for node, zv in zip(bmap.node_order, z):
        if zv <= 1.0 / 6.0:
            values[node] = 0
        elif zv >= 5.0 / 6.0:
            values[node] = 1
        else:
            values[node] = BOT
    return Assignment(values)


def verify_brouwer_solution(
    bmap: BrouwerMap, z: np.ndarray, eps: float = DEFAULTS.brouwer_eps
) -> bool:
    return residual(bmap, z) <= eps


# ---------------------------------------------------------------------------
# fixed-point search
# ---------------------------------------------------------------------------

@dataclass
class FixedPointResult:
    z: np.ndarray
    residual: float
    method: str
    iterations: int
    converged: bool
    trace: List[Tuple[int, float, int]] = field(default_factory=list)


def damped_iteration(
    bmap: BrouwerMap,
    z0: Optional[np.ndarray] = None,
    gamma: float = 0.25,
    steps: int = 5000,
    target: float = DEFAULTS.brouwer_eps,
    trace_every: int = 100,
) -> FixedPointResult:
    """z <- (1-gamma) z + gamma F(z), tracking the best iterate seen."""
    z = np.full(bmap.dim, 0.5) if z0 is None else np.asarray(z0, dtype=float).copy()
    best_z = z.copy()
    fz = eval_F(bmap, z)
    best_res = float(np.max(np.abs(fz - z)))
    trace: List[Tuple[int, float, int]] = [(0, best_res, bmap.ledger.total())]
    it = 0
    for it in range(1, steps + 1):
        z = (1.0 - gamma) * z + gamma * fz
        fz = eval_F(bmap, z)
        res = float(np.max(np.abs(fz - z)))
        if res < best_res:
            best_res = res
            best_z = z.copy()
        if it % trace_every == 0:
            trace.append((it, res, bmap.ledger.total()))
        if best_res <= target:
            break
    trace.append((it, best_res, bmap.ledger.total()))
    return FixedPointResult(
        z=best_z,
        residual=best_res,
        method="damped",
        iterations=it,
        converged=best_res <= target,
        trace=trace,
    )


def grid_restart_point(bmap: BrouwerMap, resolution: int = 11) -> np.ndarray:
    """Best starting point on a uniform grid; only sensible for d <= 3."""
    if bmap.dim > 3:
        raise ValueError("grid restart is gated to d <= 3")
    if resolution ** bmap.dim > DEFAULTS.exhaustive_grid_budget:
        raise ValueError("grid restart budget exceeded")
    axis = np.linspace(0.0, 1.0, resolution)
    best_z = None
    best_res = np.inf
    for combo in product(axis, repeat=bmap.dim):
        z = np.array(combo)
        res = float(np.max(np.abs(eval_F(bmap, z) - z)))
        if res < best_res:
            best_res = res
            best_z = z
    return best_z


def feedback_cut(bmap: BrouwerMap) -> Tuple[List[int], List[int]]:
    """Greedy feedback vertex set of the gate graph, plus a propagation
    order for the remaining nodes (topological in the cut-free graph)."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(bmap.dim))
    for w, comp in enumerate(bmap.components):
        inputs = comp[1] if comp[0] in (NOR, ORACLE) else (comp[1],)
        for u in inputs:
            graph.add_edge(u, w)
    cut: List[int] = []
    work = graph.copy()
    while True:
        try:
            cycle = nx.find_cycle(work)
        except nx.NetworkXNoCycle:
            break
        nodes_in_cycle = sorted({u for u, _ in cycle})
        victim = max(nodes_in_cycle, key=lambda v: (work.in_degree(v) + work.out_degree(v), -v))
        cut.append(victim)
        work.remove_node(victim)
    order = list(nx.topological_sort(work))
    return sorted(cut), order


def _propagate(bmap: BrouwerMap, cut: Sequence[int], order: Sequence[int], cut_values: np.ndarray) -> np.ndarray:
    z = np.empty(bmap.dim)
    for pos, node in enumerate(cut):
        z[node] = cut_values[pos]
    for node in order:
        z[node] = eval_component(bmap, node, z)
    return z


def cycle_cut_solve(
    bmap: BrouwerMap,
    target: float = DEFAULTS.brouwer_eps,
    gamma0: float = 0.5,
    max_iter: int = 20000,
    tol: float = 1e-11,
) -> FixedPointResult:
    """Adaptively damped iteration on the feedback-cut reduced map.

    Non-cut coordinates are exactly consistent by propagation, so the
    full residual equals the reduced one.  For a single cut coordinate
    the update keeps a sign bracket (the reduced displacement is >= 0 at
    0 and <= 0 at 1), halves the damping on oscillation, and falls back
    to the bracket midpoint when a step would leave it, which makes the
    iteration globally convergent.  Multi-coordinate cuts use the same
    adaptive damping without the bracket.
    """
    cut, order = feedback_cut(bmap)
    if not cut:
        z = _propagate(bmap, cut, order, np.empty(0))
        res = residual(bmap, z)
        return FixedPointResult(z, res, "cycle_cut", 0, res <= target)

    def reduced(c: np.ndarray) -> np.ndarray:
        z = _propagate(bmap, cut, order, c)
        return np.array([eval_component(bmap, node, z) for node in cut])

    if len(cut) == 1:
        lo, hi = 0.0, 1.0
        c = 0.5
        gamma = gamma0
        prev_sign = 0
        it = 0
        for it in range(1, max_iter + 1):
            w = float(reduced(np.array([c]))[0] - c)
            if abs(w) <= tol:
                break
            sign = 1 if w > 0 else -1
            if sign > 0:
                lo = max(lo, c)
            else:
                hi = min(hi, c)
            if prev_sign and sign != prev_sign:
                gamma *= 0.5
            prev_sign = sign
            cn = c + gamma * w
            if not (lo < cn < hi):
                cn = 0.5 * (lo + hi)
            c = cn
        cut_values = np.array([c])
    else:
        rng = np.random.default_rng(0)
        best_c = None
        best_norm = np.inf
        for attempt in range(8):
            c = np.full(len(cut), 0.5) if attempt == 0 else rng.random(len(cut))
            gamma = gamma0
            prev_norm = np.inf
            for _ in range(max_iter):
                w = reduced(c) - c
                norm = float(np.max(np.abs(w)))
                if norm < best_norm:
                    best_norm = norm
                    best_c = c.copy()
                if norm <= tol:
                    break
                if norm > prev_norm:
                    gamma = max(gamma * 0.5, 1e-6)
                prev_norm = norm
                c = np.clip(c + gamma * w, 0.0, 1.0)
            if best_norm <= tol:
                break
        cut_values = best_c
        it = max_iter
    z = _propagate(bmap, cut, order, cut_values)
    res = residual(bmap, z)
    return FixedPointResult(z, res, "cycle_cut", it, res <= target)


def write_residual_trace(result: FixedPointResult, path) -> None:
    """Residual trace as CSV: iteration, residual, cumulative ledger total."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "residual", "ledger_total"])
        for iteration, res, total in result.trace:
            writer.writerow([iteration, repr(res), total])


def find_fixed_point(
    bmap: BrouwerMap,
    target: float = DEFAULTS.brouwer_eps,
    gamma: float = 0.25,
    damped_steps: int = 5000,
    starts: int = 3,
    seed: int = 0,
) -> FixedPointResult:
    """Damped iteration (multi-start), then grid restart for d <= 3, then
    the feedback-cut solver; returns the first result within target."""
    rng = np.random.default_rng(seed)
    best: Optional[FixedPointResult] = None
    for attempt in range(starts):
        z0 = None if attempt == 0 else rng.random(bmap.dim)
        result = damped_iteration(bmap, z0=z0, gamma=gamma, steps=damped_steps, target=target)
        if best is None or result.residual < best.residual:
            best = result
        if result.converged:
            return result
    if bmap.dim <= 3:
        z0 = grid_restart_point(bmap, resolution=21)
        result = damped_iteration(bmap, z0=z0, gamma=gamma, steps=damped_steps, target=target)
        result.method = "grid_restart"
        if result.converged:
            return result
        if result.residual < best.residual:
            best = result
    result = cycle_cut_solve(bmap, target=target)
    if result.residual < best.residual:
        best = result
    return best
