"""Deterministic test corpus shared across the suite.

Handcrafted configurations with known closed-form behaviour plus a fixed
set of random instances (n <= 8, |E| <= 20). Every random instance
contains at least one directed cycle so the input-output map is genuinely
nonlinear, which keeps finite-difference convergence orders measurable.
All generation is seeded with fixed literals so derived expectations and
golden files stay stable.
"""

from __future__ import annotations

import random

from netident.topology import NetworkTopology, SelectionSets, parse_graph

CORPUS_SEED = 1337101
N_RANDOM_INSTANCES = 20

# closed-form cases referenced throughout the tests
CHAIN = {"n": 2, "edges": [[1, 2]], "excited": [1], "measured": [2]}
CHAIN_REVERSED = {"n": 2, "edges": [[1, 2]], "excited": [2], "measured": [1]}
TWO_CYCLE_FULL_MEASURE = {
    "n": 2,
    "edges": [[1, 2], [2, 1]],
    "excited": [1],
    "measured": [1, 2],
}
TWO_CYCLE_SINGLE_MEASURE = {
    "n": 2,
    "edges": [[1, 2], [2, 1]],
    "excited": [1],
    "measured": [1],
}
RING_ALLOCATION = {
    "n": 6,
    "edges": [[1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [6, 1], [2, 5], [4, 1]],
    "excited": [1],
    "measured": [1, 2, 3, 4, 5, 6],
}

HANDCRAFTED = {
    "chain": CHAIN,
    "chain_reversed": CHAIN_REVERSED,
    "two_cycle_full_measure": TWO_CYCLE_FULL_MEASURE,
    "two_cycle_single_measure": TWO_CYCLE_SINGLE_MEASURE,
    "ring_allocation": RING_ALLOCATION,
}


def random_instance(rng: random.Random) -> dict:
    n = rng.randint(3, 8)
    cap = min(20, n * (n - 1))
    cycle_len = rng.randint(2, n)
    cycle = rng.sample(range(1, n + 1), cycle_len)
    edges = {(cycle[i], cycle[(i + 1) % cycle_len]) for i in range(cycle_len)}
    target = rng.randint(len(edges), cap)
    pool = [(j, i) for j in range(1, n + 1) for i in range(1, n + 1) if i != j]
    rng.shuffle(pool)
    for pair in pool:
        if len(edges) >= target:
            break
        edges.add(pair)
    excited = sorted(rng.sample(range(1, n + 1), rng.randint(1, n)))
    measured = sorted(rng.sample(range(1, n + 1), rng.randint(1, n)))
    return {
        "n": n,
        "edges": [list(e) for e in sorted(edges)],
        "excited": excited,
        "measured": measured,
    }


def random_corpus() -> list[dict]:
    rng = random.Random(CORPUS_SEED)
    return [random_instance(rng) for _ in range(N_RANDOM_INSTANCES)]


def load(graph: dict) -> tuple[NetworkTopology, SelectionSets]:
    return parse_graph(graph)


def all_instances() -> list[dict]:
    return list(HANDCRAFTED.values()) + random_corpus()
