"""Robust smooth interpolation of a Boolean function over the unit cube.

A Boolean function q on {0,1}^N extends to a C-infinity map on [0,1]^N:

    h(x) = 1/2 + sum_y Phi_y(x) * (q(y) - 1/2),
    Phi_y(x) = prod_i alpha(y_i + (1 - 2 y_i) x_i),

where alpha is the decreasing box-profile step (1 on [0,1/6], 0 from 1/3).
The radius-1/3 sup-norm balls around the vertices are disjoint, so at most
one vertex has Phi_y(x) != 0: the *active* vertex, found by rounding
coordinates <= 1/3 down and >= 2/3 up (no active vertex if any coordinate
lies strictly between).  Consequently h, its gradient, and any Hessian
entry are computable with at most ONE query to q, and h(x) equals q(y)
bit-exactly whenever x is within sup-norm distance 1/6 of vertex y.

Entry-wise bounds: |grad h| <= e^12 / 2 and |D^2 h| <= 6 e^24.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULTS
from .ledger import QueryLedger
from .smoothstep import ALPHA

Bits = Tuple[int, ...]


@dataclass
class BoolOracle:
    """Black-box Boolean function with a query ledger.

    `fn` is the raw uncounted function; all counted access goes through
    :meth:`query`, which charges exactly one unit to ``ledger[name]`` and
    validates that the output is exactly 0 or 1.
    """

    arity: int
    fn: Callable[[Bits], int]
    name: str = "L"
    ledger: QueryLedger = field(default_factory=QueryLedger)

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("oracle arity must be >= 1")

    def query(self, bits: Sequence[int]) -> int:
        bits = tuple(int(b) for b in bits)
        if len(bits) != self.arity:
            raise ValueError(f"expected {self.arity} bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"oracle input must be bits, got {bits}")
        self.ledger.record(self.name)
        out = self.fn(bits)
        if out not in (0, 1):
            raise ValueError(f"oracle output must be 0 or 1, got {out!r}")
        return int(out)

    @classmethod
    def from_truth_table(
        cls,
        table: Sequence[int],
        name: str = "L",
        ledger: Optional[QueryLedger] = None,
    ) -> "BoolOracle":
        """Oracle backed by a table indexed big-endian (first bit most
        significant); table length must be a power of two, arity <= 20."""
        n = len(table)
        arity = n.bit_length() - 1
        if n != 1 << arity or arity < 1:
            raise ValueError(f"truth table length must be a power of two >= 2, got {n}")
        if arity > DEFAULTS.truth_table_max_arity:
            raise ValueError(f"truth tables limited to arity {DEFAULTS.truth_table_max_arity}")
        vals = tuple(int(v) for v in table)
        if any(v not in (0, 1) for v in vals):
            raise ValueError("truth table entries must be 0/1")

        def fn(bits: Bits) -> int:
            idx = 0
            for b in bits:
                idx = (idx << 1) | b
            return vals[idx]

        return cls(arity=arity, fn=fn, name=name, ledger=ledger or QueryLedger())


def _check_point(x: Sequence[float], arity: int) -> Sequence[float]:
    if len(x) != arity:
        raise ValueError(f"point has {len(x)} coordinates, oracle arity is {arity}")
    for xi in x:
        if not (0.0 <= xi <= 1.0):
            raise ValueError(f"coordinates must lie in [0,1], got {xi}")
    return x


def active_vertex(x: Sequence[float]) -> Optional[Bits]:
    """The unique vertex within sup-norm distance 1/3 of x, if any.

    Rounds x_i <= 1/3 to 0 and x_i >= 2/3 to 1; returns None when some
    coordinate falls strictly inside (1/3, 2/3).  Makes no oracle queries.
    """
    vertex = []
    for xi in x:
        if xi <= 1.0 / 3.0:
            vertex.append(0)
        elif xi >= 2.0 / 3.0:
            vertex.append(1)
        else:
            return None
    return tuple(vertex)


def _profile_factors(x: Sequence[float], vertex: Bits) -> list[float]:
    """alpha(y_i + (1-2 y_i) x_i) for each coordinate, in index order."""
    return [ALPHA(yi + (1 - 2 * yi) * xi) for xi, yi in zip(x, vertex)]


def box_profile(x: Sequence[float], vertex: Bits) -> float:
    """Phi_vertex(x): 1 inside the 1/6-box, 0 outside the 1/3-box."""
    prod_ = 1.0
    for xi, yi in zip(x, vertex):
        f = ALPHA(yi + (1 - 2 * yi) * xi)
        if f == 0.0:
            return 0.0
        prod_ *= f
    return prod_


def interp_eval(x: Sequence[float], oracle: BoolOracle) -> float:
    """h(x) in [0,1]; at most one oracle query, none when no vertex is active
    or the active vertex's profile vanishes (the value is 1/2 either way)."""
    _check_point(x, oracle.arity)
    vertex = active_vertex(x)
    if vertex is None:
        return 0.5
    prof = box_profile(x, vertex)
    if prof == 0.0:
        return 0.5
    q = oracle.query(vertex)
    return 0.5 + prof * (q - 0.5)


def interp_grad(x: Sequence[float], oracle: BoolOracle) -> np.ndarray:
    """Gradient of h at x; zero vector when no vertex is active.

    Entry j is (q(y*) - 1/2) * sign_j * alpha'(arg_j) * prod_{i != j} alpha(arg_i)
    with sign_j = 1 - 2 y*_j.  At most one oracle query, none when the whole
    profile gradient vanishes (e.g. strictly inside the 1/6-box).
    """
    _check_point(x, oracle.arity)
    n = oracle.arity
    grad = np.zeros(n)
    vertex = active_vertex(x)
    if vertex is None:
        return grad
    args = [yi + (1 - 2 * yi) * xi for xi, yi in zip(x, vertex)]
    factors = [ALPHA(a) for a in args]
    d1s = [ALPHA.d1(a) for a in args]
    prefix = np.ones(n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] * factors[i]
    suffix = np.ones(n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * factors[i]
    any_nonzero = False
    for j in range(n):
        sign = 1.0 - 2.0 * vertex[j]
        gj = sign * d1s[j] * prefix[j] * suffix[j + 1]
        grad[j] = gj
        if gj != 0.0:
            any_nonzero = True
    if not any_nonzero:
        return grad
    q = oracle.query(vertex)
    grad *= q - 0.5
    return grad


def interp_hess_entry(x: Sequence[float], oracle: BoolOracle, j: int, k: int) -> float:
    """Second partial d^2 h / dx_j dx_k at x; at most one oracle query."""
    _check_point(x, oracle.arity)
    n = oracle.arity
    if not (0 <= j < n and 0 <= k < n):
        raise ValueError(f"indices out of range for arity {n}: ({j}, {k})")
    vertex = active_vertex(x)
    if vertex is None:
        return 0.0
    args = [yi + (1 - 2 * yi) * xi for xi, yi in zip(x, vertex)]
    if j == k:
        second = ALPHA.d2(args[j])
        rest = 1.0
        for i in range(n):
            if i != j:
                rest *= ALPHA(args[i])
                if rest == 0.0:
                    break
        dphi = second * rest
    else:
        sj = 1.0 - 2.0 * vertex[j]
        sk = 1.0 - 2.0 * vertex[k]
        dphi = sj * ALPHA.d1(args[j]) * sk * ALPHA.d1(args[k])
        if dphi != 0.0:
            for i in range(n):
                if i != j and i != k:
                    dphi *= ALPHA(args[i])
                    if dphi == 0.0:
                        break
    if dphi == 0.0:
        return 0.0
    q = oracle.query(vertex)
    return (q - 0.5) * dphi


def dense_sum_eval(x: Sequence[float], fn: Callable[[Bits], int], arity: int) -> float:
    """Reference evaluation summing over all 2^N vertices.

    Independent of the active-vertex shortcut; used to certify their
    equivalence.  Takes the raw (uncounted) function, and is gated to
    small arities since it is exponential.
    """
    _check_point(x, arity)
    if arity > DEFAULTS.dense_sum_max_arity:
        raise ValueError(f"dense sum gated to arity <= {DEFAULTS.dense_sum_max_arity}")
    acc = 0.5
    for vertex in product((0, 1), repeat=arity):
        prof = box_profile(x, vertex)
        if prof != 0.0:
            acc += prof * (fn(vertex) - 0.5)
    return acc
