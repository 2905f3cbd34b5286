"""Metric graphs, the three worked examples, and the tau-dependent vertex weights.

The graph period cell is rescaled so that the total edge length is 1.  Each
edge is identified with the interval [0, l_e]; ``left``/``right`` name the
vertices sitting at coordinates 0 and l_e respectively.  Edges carry a
constant propagation speed ``speed_a`` and a stiffness flag: on stiff edges
the epsilon-rescaled coefficient is (a_e/eps)^2, on soft edges it is a_e^2.

Vertex conditions are weighted Kirchhoff (Datta-Das Sarma) conditions: at
each vertex V the weighted traces w_V(e) * u_e(V) share a common value and
the weighted co-derivatives sum to zero.  All weights are unimodular.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field


STIFF = "stiff"
SOFT = "soft"

_LENGTH_TOL = 1e-12


class ParameterError(ValueError):
    """Invalid graph or example parameters."""


@dataclass(frozen=True)
class EdgeSpec:
    """One metric edge: interval [0, length] with constant speed."""

    id: int
    length: float
    speed_a: float
    stiffness: str  # STIFF or SOFT
    left: int
    right: int

    def __post_init__(self):
        if self.length <= 0:
            raise ParameterError(f"edge {self.id}: length must be positive")
        if self.speed_a <= 0:
            raise ParameterError(f"edge {self.id}: speed must be positive")
        if self.stiffness not in (STIFF, SOFT):
            raise ParameterError(f"edge {self.id}: bad stiffness tag")
        if self.left == self.right:
            raise ParameterError(
                f"edge {self.id}: loops are not supported; split the loop "
                "with a degree-2 vertex first"
            )

    @property
    def is_stiff(self) -> bool:
        return self.stiffness == STIFF


@dataclass(frozen=True)
class MetricGraph:
    """A metric graph of total length 1 with a stiff/soft edge partition."""

    edges: tuple[EdgeSpec, ...]
    vertices: tuple[int, ...]
    example: str | None = None  # "ex0" / "ex1" / "ex2" when built from one
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        total = sum(e.length for e in self.edges)
        if abs(total - 1.0) > _LENGTH_TOL:
            raise ParameterError(
                f"edge lengths must sum to 1 (got {total!r})"
            )
        vset = set(self.vertices)
        for e in self.edges:
            if e.left not in vset or e.right not in vset:
                raise ParameterError(f"edge {e.id}: unknown endpoint vertex")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ParameterError("duplicate edge ids")

    @property
    def soft_edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges if not e.is_stiff)

    @property
    def stiff_edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges if e.is_stiff)

    def edge(self, edge_id: int) -> EdgeSpec:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def incident(self, vertex: int) -> tuple[EdgeSpec, ...]:
        return tuple(e for e in self.edges if vertex in (e.left, e.right))

    def subgraph(self, part: str) -> "MetricGraph":
        """Stiff or soft component, keeping lengths/ids/weights untouched.

        The component is returned as a plain edge collection (its total
        length is below 1), so the length invariant is not re-imposed.
        """
        if part == "full":
            return self
        want_stiff = {"stiff": True, "soft": False}[part]
        edges = tuple(e for e in self.edges if e.is_stiff == want_stiff)
        verts = tuple(sorted({v for e in edges for v in (e.left, e.right)}))
        g = object.__new__(MetricGraph)
        object.__setattr__(g, "edges", edges)
        object.__setattr__(g, "vertices", verts)
        object.__setattr__(g, "example", self.example)
        object.__setattr__(g, "params", dict(self.params, component=part))
        return g


def _check_lengths(lengths: list[float]) -> None:
    if any(l <= 0 for l in lengths):
        raise ParameterError("edge lengths must be positive")
    if abs(sum(lengths) - 1.0) > _LENGTH_TOL:
        raise ParameterError(
            f"edge lengths must sum to 1 (got {sum(lengths)!r})"
        )


def build_example(example: str, **params) -> MetricGraph:
    """Construct one of the three worked period-cell graphs.

    ex0: two edges between vertices 1, 2 -- e1 stiff (speed a1), e2 soft
         (speed a2 = 1).  Parameters: l1, l2, a1.
    ex1: three edges -- e1, e3 stiff (speeds a1, a3), e2 soft (a2 = 1).
         Parameters: l1, l2, l3, a1, a3.
    ex2: three edges -- e3 stiff (speed a3), e1, e2 soft (speeds a1, a2).
         Parameters: l1, l2, l3, a1, a2, a3.

    Orientation convention (fixing which endpoint is coordinate 0):
    e1: 2 -> 1, e2: 1 -> 2, e3: 2 -> 1.
    """
    example = example.lower()
    if example == "ex0":
        l1 = params.get("l1", 0.5)
        l2 = params.get("l2", 0.5)
        a1 = params.get("a1", 1.0)
        _check_lengths([l1, l2])
        edges = (
            EdgeSpec(1, l1, a1, STIFF, left=2, right=1),
            EdgeSpec(2, l2, 1.0, SOFT, left=1, right=2),
        )
        p = dict(l1=l1, l2=l2, a1=a1, a2=1.0)
    elif example == "ex1":
        l1 = params.get("l1", 0.3)
        l2 = params.get("l2", 0.4)
        l3 = params.get("l3", 0.3)
        a1 = params.get("a1", 1.0)
        a3 = params.get("a3", 2.0)
        _check_lengths([l1, l2, l3])
        edges = (
            EdgeSpec(1, l1, a1, STIFF, left=2, right=1),
            EdgeSpec(2, l2, 1.0, SOFT, left=1, right=2),
            EdgeSpec(3, l3, a3, STIFF, left=2, right=1),
        )
        p = dict(l1=l1, l2=l2, l3=l3, a1=a1, a2=1.0, a3=a3)
    elif example == "ex2":
        l1 = params.get("l1", 0.3)
        l2 = params.get("l2", 0.4)
        l3 = params.get("l3", 0.3)
        a1 = params.get("a1", 1.0)
        a2 = params.get("a2", 1.0)
        a3 = params.get("a3", 2.0)
        _check_lengths([l1, l2, l3])
        edges = (
            EdgeSpec(1, l1, a1, SOFT, left=2, right=1),
            EdgeSpec(2, l2, a2, SOFT, left=1, right=2),
            EdgeSpec(3, l3, a3, STIFF, left=2, right=1),
        )
        p = dict(l1=l1, l2=l2, l3=l3, a1=a1, a2=a2, a3=a3)
    else:
        raise ParameterError(f"unknown example {example!r}")
    return MetricGraph(edges=edges, vertices=(1, 2), example=example, params=p)


def datta_weights(graph: MetricGraph, tau: float) -> dict[tuple[int, int], complex]:
    """Unimodular vertex weights w_V(e), keyed by (vertex, edge id).

    For ex0 all weights are 1.  For ex1/ex2 the weights at vertex 1 are
    {1, 1, e^{i tau (l2+l3)}} on edges (e1, e2, e3) and at vertex 2
    {e^{i tau l3}, 1, 1}.
    """
    if not -math.pi <= tau < math.pi + 1e-12:
        raise ParameterError("tau must lie in [-pi, pi)")
    w: dict[tuple[int, int], complex] = {}
    if graph.example == "ex0" or graph.example is None:
        for e in graph.edges:
            w[(e.left, e.id)] = 1.0 + 0.0j
            w[(e.right, e.id)] = 1.0 + 0.0j
        return w
    l2 = graph.params["l2"]
    l3 = graph.params["l3"]
    w[(1, 1)] = 1.0 + 0.0j
    w[(1, 2)] = 1.0 + 0.0j
    w[(1, 3)] = cmath.exp(1j * tau * (l2 + l3))
    w[(2, 1)] = cmath.exp(1j * tau * l3)
    w[(2, 2)] = 1.0 + 0.0j
    w[(2, 3)] = 1.0 + 0.0j
    return {k: v for k, v in w.items() if k[1] in {e.id for e in graph.edges}}
