"""Network graphs, excitation/measurement sets, and their selection matrices.

Index conventions (fixed across the whole package):

* Nodes are numbered 1..n in every external format. Internal numpy
  indexing is 0-based and private to this package.
* A directed edge is a pair ``(j, i)`` meaning signal flows j -> i, i.e.
  the network matrix has a nonzero entry at row i, column j.
* The canonical edge order sorts ascending by (j, then i), which is the
  column-major order of the network matrix. This order defines the
  coordinate order of the edge-weight vector x everywhere.
* ``vec`` always stacks columns (Fortran order). The indicator matrix IG
  therefore has, for edge k = (j_k, i_k), a single 1 in column k at row
  (j_k - 1)*n + (i_k - 1) (0-based).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


class TopologyError(ValueError):
    """Raised for invalid graph structure or selection sets."""


GRAPH_FIELDS = ("n", "edges", "excited", "measured")


@dataclass(frozen=True)
class NetworkTopology:
    """A directed graph on n nodes with a canonically ordered edge list.

    ``edges`` is a tuple of 1-based ``(j, i)`` pairs in canonical
    (column-major) order; its positions are the coordinates of the
    edge-weight vector x.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, j: int, i: int) -> int:
        """0-based coordinate of edge (j, i); raises if absent."""
        try:
            return self.edges.index((j, i))
        except ValueError:
            raise TopologyError(f"edge ({j}, {i}) not in topology") from None


@dataclass(frozen=True)
class SelectionSets:
    """Excited and measured node sets, stored strictly increasing (1-based)."""

    excited: tuple[int, ...]
    measured: tuple[int, ...]

    @property
    def n_excited(self) -> int:
        return len(self.excited)

    @property
    def n_measured(self) -> int:
        return len(self.measured)


@dataclass(frozen=True)
class SelectionMatrices:
    """Binary selection/indicator matrices for one (topology, sets) pair.

    B is n x |excited| (one 1 per column), C is |measured| x n (one 1 per
    row), IG is n^2 x |E| with column k the column-major vectorization
    indicator of edge k. All arrays are read-only float64.
    """

    B: np.ndarray
    C: np.ndarray
    IG: np.ndarray


def validate_topology(
    n: int,
    edges: Iterable[Sequence[int]],
    *,
    allow_self_loops: bool = False,
) -> NetworkTopology:
    """Check a raw (n, edge list) description and canonicalize edge order.

    Rejects out-of-range node indices, duplicate edges, n < 1, and
    self-loops unless ``allow_self_loops`` is set. Edge order in the
    result is sorted ascending by (j, i).
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise TopologyError(f"node count must be a positive integer, got {n!r}")
    canon: list[tuple[int, int]] = []
    for edge in edges:
        pair = tuple(edge)
        if len(pair) != 2 or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in pair
        ):
            raise TopologyError(f"edge must be a pair of integers, got {edge!r}")
        j, i = pair
        if not (1 <= j <= n and 1 <= i <= n):
            raise TopologyError(f"edge ({j}, {i}) out of range for n={n}")
        if j == i and not allow_self_loops:
            raise TopologyError(f"self-loop ({j}, {i}) rejected (allow_self_loops=False)")
        canon.append((j, i))
    seen = set()
    for pair in canon:
        if pair in seen:
            raise TopologyError(f"duplicate edge {pair}")
        seen.add(pair)
    canon.sort()
    return NetworkTopology(n=n, edges=tuple(canon))


def validate_selections(
    topo: NetworkTopology,
    excited: Iterable[int],
    measured: Iterable[int],
) -> SelectionSets:
    """Check excited/measured node lists against a topology.

    Both must be nonempty, duplicate-free subsets of 1..n; they are
    stored sorted ascending.
    """
    out = []
    for name, nodes in (("excited", excited), ("measured", measured)):
        nodes = list(nodes)
        if not nodes:
            raise TopologyError(f"{name} set must be nonempty")
        for v in nodes:
            if not isinstance(v, int) or isinstance(v, bool):
                raise TopologyError(f"{name} entries must be integers, got {v!r}")
            if not 1 <= v <= topo.n:
                raise TopologyError(f"{name} node {v} out of range for n={topo.n}")
        if len(set(nodes)) != len(nodes):
            raise TopologyError(f"duplicate node in {name} set: {nodes}")
        out.append(tuple(sorted(nodes)))
    return SelectionSets(excited=out[0], measured=out[1])


def build_selection_matrices(topo: NetworkTopology, sets: SelectionSets) -> SelectionMatrices:
    """Construct B, C and the edge indicator IG for a validated pair.

    Column order of B follows the excited list, row order of C the
    measured list. Column k of IG is vec(single 1 at (i_k, j_k)) in
    column-major order.
    """
    n = topo.n
    for v in (*sets.excited, *sets.measured):
        if not 1 <= v <= n:
            raise TopologyError(f"selected node {v} exceeds n={n}")
    B = np.zeros((n, len(sets.excited)))
    for col, node in enumerate(sets.excited):
        B[node - 1, col] = 1.0
    C = np.zeros((len(sets.measured), n))
    for row, node in enumerate(sets.measured):
        C[row, node - 1] = 1.0
    IG = np.zeros((n * n, topo.n_edges))
    for k, (j, i) in enumerate(topo.edges):
        IG[(j - 1) * n + (i - 1), k] = 1.0
    for arr in (B, C, IG):
        arr.flags.writeable = False
    return SelectionMatrices(B=B, C=C, IG=IG)


def parse_graph(
    data: Mapping,
    *,
    strict: bool = False,
    allow_self_loops: bool = False,
) -> tuple[NetworkTopology, SelectionSets]:
    """Parse the canonical JSON graph format.

    Expected shape: ``{"n": int, "edges": [[j, i], ...],
    "excited": [int, ...], "measured": [int, ...]}``. Unknown fields are
    rejected when ``strict`` is set, otherwise ignored with a warning.
    """
    if not isinstance(data, Mapping):
        raise TopologyError(f"graph document must be an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(GRAPH_FIELDS))
    if unknown:
        if strict:
            raise TopologyError(f"unknown graph fields: {', '.join(unknown)}")
        warnings.warn(f"ignoring unknown graph fields: {', '.join(unknown)}")
    missing = [f for f in GRAPH_FIELDS if f not in data]
    if missing:
        raise TopologyError(f"missing graph fields: {', '.join(missing)}")
    edges = data["edges"]
    if not isinstance(edges, Sequence) or isinstance(edges, (str, bytes)):
        raise TopologyError("edges must be a list of [j, i] pairs")
    topo = validate_topology(data["n"], edges, allow_self_loops=allow_self_loops)
    for name in ("excited", "measured"):
        if not isinstance(data[name], Sequence) or isinstance(data[name], (str, bytes)):
            raise TopologyError(f"{name} must be a list of node indices")
    sets = validate_selections(topo, data["excited"], data["measured"])
    return topo, sets


def graph_dict(topo: NetworkTopology, sets: SelectionSets) -> dict:
    """Canonical JSON-ready dict for a (topology, sets) pair."""
    return {
        "n": topo.n,
        "edges": [[j, i] for (j, i) in topo.edges],
        "excited": list(sets.excited),
        "measured": list(sets.measured),
    }
