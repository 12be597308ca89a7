"""Min-max objective built from replicated copies of a smooth cube map.

Given a circuit on m nodes and its smooth map F: [0,1]^m -> [0,1]^m, each
player controls a vector indexed by (node v, replica i in [n], inner
coordinate j in [m]); the flat layout is

    index(v, i, j) = (v_idx * n + (i-1)) * m + (j-1),

identical for x and y, so a player's dimension is d = |V| * n * m.

Per node v the construction uses
  energy      E_v(x, y)   = step_{3m,3m+1}(||x^v - y^v||^2),
  gadget      H_v(x, y)   = sum_i < F(xi) - xi, y_i^v - x_i^v >,
                            xi = (x_i^v + y_i^v)/2,
  signal      s_w(x, y)   = gate-typed response to the input energies:
                 NOR (u,v -> w):     g(E_u + E_v)
                 PURIFY (u -> w,.):  ell(E_u - 1/4)       (first output)
                 PURIFY (u -> .,w):  ell(E_u + 1/4)       (second output)
                 ORACLE (u_1..u_N -> w): interpolation of L at (E_{u_i})_i
and the objective

    f(x, y) = sum_w s_w * H_w + sum_w sum_i M_i ||x_i^w - y_i^w||^2,

with regularizer weights M_i = delta * (i - n/2).  The analytic gradient
decomposes per coordinate as

    df/dx^q_{i,j} = s_q * dH + 2 (M_i + Delta_q) (x^q_{i,j} - y^q_{i,j}),
    df/dy^q_{i,j} = s_q * dH' - 2 (M_i + Delta_q) (x^q_{i,j} - y^q_{i,j}),

where dH = -G_j(xi) + R, dH' = +G_j(xi) + R with G(z) = F(z) - z,
R = (1/2) sum_k (y_{i,k} - x_{i,k}) dG_k/dz_j (xi), and Delta_q collects
the signal sensitivities of downstream gates:

    Delta_q = sum_{w in Out(q)} H_w * step'_{3m,3m+1}(||x^q - y^q||^2)
              * ds_w/dE_q.

A pair (x, y) solves the stationarity problem at tolerance eps when no
coordinate admits a feasible first-order improvement larger than eps;
since each improvement expression is affine in the moved coordinate, the
gap is computed exactly from the interval endpoints {0, 1}.

Parameter regimes: "paper" mode applies the closed-form schedule
delta = rho^4 / (400 m^2 e^26), n = ceil(2^13 e^13 m^4 / delta^3),
eps = min(delta/n, delta^2 / (m^4 2^4 e^14)); the resulting n overflows
64-bit integers for every m >= 1, so paper-mode parameter records carry
an explicit infeasibility flag and their magnitudes, and instances can
only be built in "scaled" mode (user-supplied delta, even n, eps).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .boolinterp import interp_eval, interp_grad
from .brouwer import BrouwerMap, build_brouwer, eval_F, eval_JF
from .circuit import (
    BOT,
    NOR,
    ORACLE,
    PURIFY,
    Assignment,
    CircuitInstance,
    Gate,
    check_assignment,
    circuit_from_json,
)
from .config import DEFAULTS
from .ledger import QueryLedger
from .smoothstep import ELL, G, NamedStep, named_step

_MAX_INT64 = 2**63 - 1


@dataclass(frozen=True)
class GdaParams:
    """Instance parameters; in paper mode `feasible` reports whether n is
    representable in 64 bits (it never is for m >= 1)."""

    m: int
    rho: float
    delta: float
    n: int
    eps: float
    mode: str
    feasible: bool
    log2_n: float

    def as_dict(self) -> Dict[str, object]:
        return {
            "m": self.m,
            "rho": self.rho,
            "delta": self.delta,
            "n": self.n if self.feasible else None,
            "eps": self.eps,
            "mode": self.mode,
            "feasible": self.feasible,
            "log2_n": self.log2_n,
        }


def derive_parameters(
    m: int,
    rho: float = DEFAULTS.default_rho,
    mode: str = "paper",
    *,
    delta: Optional[float] = None,
    n: Optional[int] = None,
    eps: Optional[float] = None,
) -> GdaParams:
    """Build a parameter record.

    Paper mode evaluates the closed-form schedule in binary64 and flags
    overflow (n > 2^63 - 1) instead of failing; the record still carries
    delta, eps, and log2(n) so the magnitudes remain inspectable.  Scaled
    mode takes user-supplied positive delta and eps and a positive even n.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie in (0,1)")
    if mode == "paper":
        d_val = rho**4 / (400.0 * m**2 * math.exp(26.0))
        n_float = math.ceil(2.0**13 * math.exp(13.0) * m**4 / d_val**3)
        log2_n = 13.0 + 13.0 / math.log(2.0) + 4.0 * math.log2(m) - 3.0 * math.log2(d_val)
        e_val = min(d_val / n_float, d_val**2 / (m**4 * 2.0**4 * math.exp(14.0)))
        feasible = n_float <= _MAX_INT64
        return GdaParams(
            m=m,
            rho=rho,
            delta=d_val,
            n=int(n_float),
            eps=e_val,
            mode="paper",
            feasible=feasible,
            log2_n=log2_n,
        )
    if mode == "scaled":
        if delta is None or n is None or eps is None:
            raise ValueError("scaled mode needs delta, n, and eps")
        if delta <= 0 or eps <= 0:
            raise ValueError("delta and eps must be positive")
        if int(n) != n or n < 2 or n % 2 != 0:
            raise ValueError(f"n must be a positive even integer, got {n!r}")
        return GdaParams(
            m=m,
            rho=rho,
            delta=float(delta),
            n=int(n),
            eps=float(eps),
            mode="scaled",
            feasible=True,
            log2_n=math.log2(n),
        )
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class GdaInstance:
    params: GdaParams
    circuit: CircuitInstance
    bmap: BrouwerMap
    n: int
    m: int
    dim: int
    node_order: Tuple[str, ...]
    weights: np.ndarray  # M_i, shape (n,)
    ledger: QueryLedger
    energy_step: NamedStep = field(repr=False)

    def flat_index(self, node: str, i: int, j: int) -> int:
        """Flat coordinate of (node, replica i in [1..n], inner j in [1..m])."""
        v_idx = self.node_order.index(node)
        if not (1 <= i <= self.n and 1 <= j <= self.m):
            raise ValueError(f"replica/inner index out of range: ({i}, {j})")
        return (v_idx * self.n + (i - 1)) * self.m + (j - 1)

    def blocks(self, vec: np.ndarray) -> np.ndarray:
        """(|V|, n, m) view of a flat player vector."""
        return vec.reshape(len(self.node_order), self.n, self.m)


def build_gda_instance(circuit: CircuitInstance, params: GdaParams) -> GdaInstance:
    if not params.feasible:
        raise ValueError(
            "paper-scale parameters are numerically infeasible "
            f"(log2 n = {params.log2_n:.1f}); use scaled mode"
        )
    bmap = build_brouwer(circuit)
    m = bmap.dim
    if params.m != m:
        raise ValueError(f"params.m = {params.m} but the circuit has {m} nodes")
    n = params.n
    weights = params.delta * (np.arange(1, n + 1) - n / 2.0)
    return GdaInstance(
        params=params,
        circuit=circuit,
        bmap=bmap,
        n=n,
        m=m,
        dim=m * n * m,
        node_order=bmap.node_order,
        weights=weights,
        ledger=circuit.ledger,
        energy_step=named_step("energy", m),
    )


def _check_pair(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (inst.dim,) or y.shape != (inst.dim,):
        raise ValueError(f"points must have shape ({inst.dim},)")
    if np.any(x < 0) or np.any(x > 1) or np.any(y < 0) or np.any(y > 1):
        raise ValueError("points outside [0,1]^d")
    return x, y


# ---------------------------------------------------------------------------
# building blocks: energies, signals, gadgets
# ---------------------------------------------------------------------------

def _sqnorms(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diff = inst.blocks(x) - inst.blocks(y)
    return np.einsum("vij,vij->v", diff, diff)


def block_energies(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.array([inst.energy_step(s) for s in _sqnorms(inst, x, y)])


def energy(inst: GdaInstance, node: str, x: np.ndarray, y: np.ndarray) -> float:
    """E_v: 0 when the v-blocks of x and y are close (squared distance
    <= 3m), 1 when far (>= 3m + 1)."""
    x, y = _check_pair(inst, x, y)
    v = inst.node_order.index(node)
    return float(block_energies(inst, x, y)[v])


def _signals_from_energies(inst: GdaInstance, energies: np.ndarray) -> np.ndarray:
    idx = {v: i for i, v in enumerate(inst.node_order)}
    out = np.empty(len(inst.node_order))
    for gate in inst.circuit.gates:
        if gate.kind == NOR:
            u, v = gate.inputs
            (w,) = gate.outputs
            out[idx[w]] = G(energies[idx[u]] + energies[idx[v]])
        elif gate.kind == PURIFY:
            (u,) = gate.inputs
            first, second = gate.outputs
            out[idx[first]] = ELL(energies[idx[u]] - 0.25)
            out[idx[second]] = ELL(energies[idx[u]] + 0.25)
        else:
            (w,) = gate.outputs
            evec = [float(energies[idx[u]]) for u in gate.inputs]
            out[idx[w]] = interp_eval(evec, inst.circuit.oracle)
    return out


def signals(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x, y = _check_pair(inst, x, y)
    return _signals_from_energies(inst, block_energies(inst, x, y))


def signal(inst: GdaInstance, node: str, x: np.ndarray, y: np.ndarray) -> float:
    """Gate-typed signal of a single node; ORACLE outputs consume at most
    one L query (via the interpolation)."""
    x, y = _check_pair(inst, x, y)
    return float(signals(inst, x, y)[inst.node_order.index(node)])


def _gadgets_from_blocks(
    inst: GdaInstance, bx: np.ndarray, by: np.ndarray
) -> Tuple[np.ndarray, List[List[np.ndarray]]]:
    """Per-node H_v plus the cached displacement vectors G(xi) per replica."""
    V = len(inst.node_order)
    H = np.zeros(V)
    disp: List[List[np.ndarray]] = []
    for v in range(V):
        rows = []
        for i in range(inst.n):
            xi = 0.5 * (bx[v, i] + by[v, i])
            gvec = eval_F(inst.bmap, xi) - xi
            rows.append(gvec)
            H[v] += float(np.dot(gvec, by[v, i] - bx[v, i]))
        disp.append(rows)
    return H, disp


def gadget_values(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x, y = _check_pair(inst, x, y)
    H, _ = _gadgets_from_blocks(inst, inst.blocks(x), inst.blocks(y))
    return H


def regularizer(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> float:
    diff = inst.blocks(x) - inst.blocks(y)
    per_replica = np.einsum("vij,vij->vi", diff, diff)
    return float(np.sum(per_replica * inst.weights[None, :]))


# ---------------------------------------------------------------------------
# objective and analytic gradient
# ---------------------------------------------------------------------------

def eval_f(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> float:
    """Objective value; costs at most (n*m + 1) * |V| oracle queries."""
    x, y = _check_pair(inst, x, y)
    inst.ledger.record("f_evals")
    energies = block_energies(inst, x, y)
    sig = _signals_from_energies(inst, energies)
    H, _ = _gadgets_from_blocks(inst, inst.blocks(x), inst.blocks(y))
    return float(np.dot(sig, H)) + regularizer(inst, x, y)


def _signal_sensitivities(
    inst: GdaInstance, energies: np.ndarray
) -> List[List[Tuple[int, float]]]:
    """For each node q, the list of (w, ds_w/dE_q) over w in Out(q)."""
    idx = {v: i for i, v in enumerate(inst.node_order)}
    sens: List[List[Tuple[int, float]]] = [[] for _ in inst.node_order]
    for gate in inst.circuit.gates:
        if gate.kind == NOR:
            u, v = gate.inputs
            (w,) = gate.outputs
            slope = G.d1(energies[idx[u]] + energies[idx[v]])
            sens[idx[u]].append((idx[w], slope))
            sens[idx[v]].append((idx[w], slope))
        elif gate.kind == PURIFY:
            (u,) = gate.inputs
            first, second = gate.outputs
            sens[idx[u]].append((idx[first], ELL.d1(energies[idx[u]] - 0.25)))
            sens[idx[u]].append((idx[second], ELL.d1(energies[idx[u]] + 0.25)))
        else:
            (w,) = gate.outputs
            evec = [float(energies[idx[u]]) for u in gate.inputs]
            grad = interp_grad(evec, inst.circuit.oracle)
            for pos, u in enumerate(gate.inputs):
                sens[idx[u]].append((idx[w], float(grad[pos])))
    return sens


def eval_grad_f(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradient (df/dx, df/dy), sharing per-block intermediates.

    The per-coordinate recomputation of the same formulas is kept out of
    the production path on purpose; it serves as the independent oracle
    in the test suite.
    """
    x, y = _check_pair(inst, x, y)
    inst.ledger.record("grad_f_evals")
    V = len(inst.node_order)
    bx, by = inst.blocks(x), inst.blocks(y)
    sq = _sqnorms(inst, x, y)
    energies = np.array([inst.energy_step(s) for s in sq])
    ephi1 = np.array([inst.energy_step.d1(s) for s in sq])
    sig = _signals_from_energies(inst, energies)

    # Delta_q vanishes wherever the energy step sits on a plateau, which
    # is the common regime; the gadget values H (and their map queries)
    # are needed only when some block is in transition.
    delta_q = np.zeros(V)
    disp = None
    if np.any(ephi1 != 0.0):
        H, disp = _gadgets_from_blocks(inst, bx, by)
        sens = _signal_sensitivities(inst, energies)
        for q in range(V):
            if ephi1[q] != 0.0:
                delta_q[q] = ephi1[q] * sum(H[w] * slope for w, slope in sens[q])

    gx = np.zeros_like(bx)
    gy = np.zeros_like(by)
    eye = np.eye(inst.m)
    for q in range(V):
        for i in range(inst.n):
            coupling = 2.0 * (inst.weights[i] + delta_q[q]) * (bx[q, i] - by[q, i])
            if sig[q] == 0.0:
                # the gadget term is silenced: no map queries needed
                gx[q, i] = coupling
                gy[q, i] = -coupling
                continue
            xi = 0.5 * (bx[q, i] + by[q, i])
            gvec = disp[q][i] if disp is not None else eval_F(inst.bmap, xi) - xi
            jac_g = eval_JF(inst.bmap, xi) - eye
            rrow = 0.5 * (by[q, i] - bx[q, i]) @ jac_g
            gx[q, i] = sig[q] * (-gvec + rrow) + coupling
            gy[q, i] = sig[q] * (gvec + rrow) - coupling
    return gx.reshape(inst.dim), gy.reshape(inst.dim)


# ---------------------------------------------------------------------------
# stationarity, decoding, dichotomy
# ---------------------------------------------------------------------------

def endpoint_gap(
    x: np.ndarray, y: np.ndarray, gx: np.ndarray, gy: np.ndarray
) -> float:
    """Largest feasible first-order improvement, exact via endpoints.

    Each expression -gx_j (x' - x_j) (resp. +gy_j (y' - y_j)) is affine in
    the free coordinate, so its maximum over [0,1] is attained at 0 or 1.
    """
    x_terms = np.maximum(gx * x, -gx * (1.0 - x))
    y_terms = np.maximum(-gy * y, gy * (1.0 - y))
    return float(max(np.max(x_terms), np.max(y_terms)))


def stationarity_gap(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> float:
    x, y = _check_pair(inst, x, y)
    gx, gy = eval_grad_f(inst, x, y)
    return endpoint_gap(x, y, gx, gy)


def decode_gda(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> Assignment:
    """b(v) = E_v when the energy is exactly 0 or 1, else bot."""
    x, y = _check_pair(inst, x, y)
    energies = block_energies(inst, x, y)
    values = {}
    for node, e in zip(inst.node_order, energies):
        if e == 0.0:
            values[node] = 0
        elif e == 1.0:
            values[node] = 1
        else:
            values[node] = BOT
    return Assignment(values)


@dataclass
class BrouwerWitness:
    node: str
    replica: int  # 1-based
    point: np.ndarray
    residual: float


@dataclass
class DichotomyResult:
    """Exactly one of `witness` / `assignment` is populated."""

    gap: float
    gap_ok: bool
    witness: Optional[BrouwerWitness] = None
    assignment: Optional[Assignment] = None
    violations: Optional[List[Gate]] = None
    warning: Optional[str] = None


def dichotomy_extract(inst: GdaInstance, x: np.ndarray, y: np.ndarray) -> DichotomyResult:
    """Scan replica midpoints for a fixed-point witness; otherwise decode.

    Deterministic scan order (nodes in instance order, replicas
    ascending); the first midpoint with residual <= rho wins.  When no
    witness exists the decoded assignment is returned together with its
    gate-check report; a nonempty report is data, not an error (the
    all-gates-satisfied guarantee is tied to paper-scale parameters).
    A caller-supplied non-stationary point only triggers a warning.
    """
    x, y = _check_pair(inst, x, y)
    gap = stationarity_gap(inst, x, y)
    gap_ok = gap <= inst.params.eps
    warning = None
    if not gap_ok:
        warning = (
            f"point is not {inst.params.eps:.3g}-stationary (gap {gap:.3g}); "
            "extraction still runs"
        )
    bx, by = inst.blocks(x), inst.blocks(y)
    for v, node in enumerate(inst.node_order):
        for i in range(inst.n):
            xi = 0.5 * (bx[v, i] + by[v, i])
            res = float(np.max(np.abs(eval_F(inst.bmap, xi) - xi)))
            if res <= inst.params.rho:
                return DichotomyResult(
                    gap=gap,
                    gap_ok=gap_ok,
                    witness=BrouwerWitness(node=node, replica=i + 1, point=xi, residual=res),
                    warning=warning,
                )
    assignment = decode_gda(inst, x, y)
    violations = check_assignment(inst.circuit, assignment)
    return DichotomyResult(
        gap=gap,
        gap_ok=gap_ok,
        assignment=assignment,
        violations=violations,
        warning=warning,
    )


# ---------------------------------------------------------------------------
# optional normalization wrapper
# ---------------------------------------------------------------------------

@dataclass
class NormalizedGda:
    """Divides f and its gradient by a fixed scale; eps shrinks to match.

    The raw instance remains the default interface; this wrapper exists
    for consumers that want unit-bounded oracles.
    """

    inst: GdaInstance
    scale: float

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def eps(self) -> float:
        return self.inst.params.eps / self.scale

    def value(self, x: np.ndarray, y: np.ndarray) -> float:
        return eval_f(self.inst, x, y) / self.scale

    def grad(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        gx, gy = eval_grad_f(self.inst, x, y)
        return gx / self.scale, gy / self.scale


def sample_scale(inst: GdaInstance, samples: int = 16, seed: int = 0) -> float:
    """max over sampled points of (|f|, ||grad f||_inf), floored at 1."""
    rng = np.random.default_rng(seed)
    scale = 1.0
    for _ in range(samples):
        x = rng.random(inst.dim)
        y = rng.random(inst.dim)
        scale = max(scale, abs(eval_f(inst, x, y)))
        gx, gy = eval_grad_f(inst, x, y)
        scale = max(scale, float(np.max(np.abs(gx))), float(np.max(np.abs(gy))))
    return scale


# ---------------------------------------------------------------------------
# descriptor files
# ---------------------------------------------------------------------------

def load_gda_descriptor(path: str | Path) -> GdaInstance:
    """Instance from a JSON descriptor:

    {"circuit": <relative path or inline circuit object>,
     "mode": "scaled", "delta": .., "n": .., "eps": .., "rho": ..}
    """
    path = Path(path)
    desc = json.loads(path.read_text())
    circ_ref = desc["circuit"]
    if isinstance(circ_ref, str):
        circ_text = (path.parent / circ_ref).read_text()
    else:
        circ_text = json.dumps(circ_ref)
    circuit = circuit_from_json(circ_text)
    params = derive_parameters(
        m=len(circuit.nodes),
        rho=float(desc.get("rho", DEFAULTS.default_rho)),
        mode=desc.get("mode", "scaled"),
        delta=desc.get("delta"),
        n=desc.get("n"),
        eps=desc.get("eps"),
    )
    return build_gda_instance(circuit, params)
