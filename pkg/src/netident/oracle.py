"""Independent cross-checks for the gradient matrix and its verdicts.

Everything here recomputes engine results by a different route: the
input-output map evaluated directly, its Jacobian by central differences,
the gradient assembled column by column from the literal matrix product
C T G(e_k) T B, and first-order flatness probes along kernel directions.
Agreement between routes is what the test suite and the CLI ``--verify``
flag certify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gfp
from .engine import (
    DEFAULT_COND_LIMIT,
    DEFAULT_TOL_ENTRY,
    DEFAULT_TOL_RANK,
    KMatrix,
    NetworkSample,
    SingularNetworkError,
    _k_metadata,
    build_K,
    compute_transfer,
    edge_verdicts_from_kernel,
    kernel_basis,
    network_matrix,
    numeric_rank,
    sample_network_matrix,
)
from .topology import (
    NetworkTopology,
    SelectionMatrices,
    SelectionSets,
    build_selection_matrices,
)

FD_ORDER_STEPS = (1e-3, 1e-4, 1e-5)
# central differences carry cancellation noise ~ eps/step, about 2e-11 at
# the smallest order-fit step; errors below this floor are not signal
FD_ORDER_NOISE_FLOOR = 1e-10
WITNESS_STEPS = (1e-2, 1e-3, 1e-4)
# fraction of a unit kernel vector's mass required at the probed edge
WITNESS_MIN_COMPONENT = 0.1


class WitnessError(RuntimeError):
    """No kernel vector has a significant component at the requested edge.

    Raised when a witness is requested for an edge the kernel does not
    actually leave free; signals an internal verdict inconsistency."""


@dataclass(frozen=True)
class ForwardMap:
    """The input-output map x -> vec(C (I - G(x))^-1 B) of one configuration."""

    topo: NetworkTopology
    sel: SelectionMatrices

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return eval_h(self, x)


@dataclass(frozen=True)
class Witness:
    """A unit kernel direction with measured flatness of h along it."""

    delta: np.ndarray
    residual_curve: tuple[tuple[float, float], ...]
    exponent: float


def forward_map(topo: NetworkTopology, sets: SelectionSets) -> ForwardMap:
    return ForwardMap(topo=topo, sel=build_selection_matrices(topo, sets))


def eval_h(fm: ForwardMap, x: np.ndarray) -> np.ndarray:
    """Evaluate vec(C T(x) B), columns stacked per excited node.

    Entry (b-1)*|measured| + (c-1) is the response at the c-th measured
    node to excitation at the b-th excited node. Raises
    SingularNetworkError off the map's domain.
    """
    G = network_matrix(fm.topo, x)
    T, _ = compute_transfer(G)
    M = fm.sel.C @ T @ fm.sel.B
    return M.flatten(order="F")


def build_K_columns(sample: NetworkSample, sel: SelectionMatrices) -> KMatrix:
    """Assemble the gradient one edge at a time as vec(C T G(e_k) T B).

    Deliberately avoids the Kronecker product so that an indexing bug in
    either construction shows up as disagreement between the two.
    """
    n = sample.T.shape[0]
    row_exc, row_mea, edges = _k_metadata(sel)
    n_rows = sel.B.shape[1] * sel.C.shape[0]
    entries = np.zeros((n_rows, len(edges)), dtype=complex)
    for k, (j, i) in enumerate(edges):
        Ge = np.zeros((n, n), dtype=complex)
        Ge[i - 1, j - 1] = 1.0
        M = sel.C @ sample.T @ Ge @ sample.T @ sel.B
        entries[:, k] = M.flatten(order="F")
    entries.flags.writeable = False
    return KMatrix(
        entries=entries,
        row_excitation=row_exc,
        row_measurement=row_mea,
        col_edges=edges,
        scale=float(np.linalg.norm(sample.T, 2) ** 2),
    )


def finite_difference_jacobian(fm: ForwardMap, x: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Jacobian of h along each complex coordinate.

    h is holomorphic off its excluded set, so a real-direction difference
    approximates the complex derivative with O(step^2) error. A singular
    stencil point triggers a retry at step/10, at most 3 times per column.
    """
    x = np.asarray(x, dtype=complex)
    h0 = eval_h(fm, x)
    J = np.zeros((h0.size, fm.topo.n_edges), dtype=complex)
    for e in range(fm.topo.n_edges):
        unit = np.zeros(fm.topo.n_edges, dtype=complex)
        unit[e] = 1.0
        s = step
        for attempt in range(4):
            try:
                hp = eval_h(fm, x + s * unit)
                hm = eval_h(fm, x - s * unit)
            except SingularNetworkError:
                if attempt == 3:
                    raise
                s /= 10.0
                continue
            J[:, e] = (hp - hm) / (2.0 * s)
            break
    return J


def fit_exponent(steps, errors, floor: float = 1e-12) -> float:
    """Least-squares slope of log(error) against log(step).

    Points at or below ``floor`` are treated as exactly converged and
    dropped; with fewer than two informative points the decay is beyond
    measurement and the fit reports +inf.
    """
    pts = [(s, e) for s, e in zip(steps, errors) if e > floor]
    if len(pts) < 2:
        return float("inf")
    logs = np.log([s for s, _ in pts])
    loge = np.log([e for _, e in pts])
    slope = np.polyfit(logs, loge, 1)[0]
    return float(slope)


def relative_max_err(A: np.ndarray, B: np.ndarray) -> float:
    """Max-norm difference, relative to A's max-norm (absolute if A = 0)."""
    scale = np.abs(A).max() if A.size else 0.0
    diff = np.abs(A - B).max() if A.size else 0.0
    return float(diff / scale) if scale > 0 else float(diff)


def jacobian_agreement(K: KMatrix, J: np.ndarray) -> float:
    """Disagreement between K and a Jacobian estimate, max-norm relative.

    A structurally zero K has no magnitude of its own to normalize by
    (its entries are rounding residue), so in that case the estimate is
    compared absolutely against the construction scale of K: both routes
    must agree the gradient vanishes to within noise.
    """
    entries = K.entries
    if entries.size == 0:
        return 0.0
    magnitude = float(np.abs(entries).max())
    noise = np.finfo(float).eps * max(entries.shape) * K.scale
    if magnitude <= noise:
        return float(np.abs(J).max() / K.scale)
    return float(np.abs(entries - J).max() / magnitude)


def kernel_direction_witness(
    fm: ForwardMap,
    sample: NetworkSample,
    e: int,
    tol_rank: float = DEFAULT_TOL_RANK,
    steps: tuple[float, ...] = WITNESS_STEPS,
    min_component: float = WITNESS_MIN_COMPONENT,
) -> Witness:
    """Exhibit a direction along which h is flat to first order but edge e moves.

    Projects the e-th coordinate axis onto ker K to get a unit vector delta
    with |delta_e| >= min_component, then measures ||h(x + t*delta) - h(x)||
    over the given t values. A fitted decay exponent >= 1.9 (or +inf when h
    is exactly invariant) confirms the first-order flatness that makes edge
    e unrecoverable at this sample.

    The projection maximizes |delta_e| over unit kernel vectors, and that
    maximum equals the norm of the e-th kernel-basis row, the same quantity
    the verdict thresholds against tol_entry. Callers that need a witness
    for every edge already judged non-identifiable should therefore pass
    min_component=tol_entry; the stricter default rejects directions whose
    e-component, while genuine, is too small to be demonstrative.
    """
    K = build_K(sample, fm.sel)
    V = kernel_basis(K, tol_rank)
    if V.shape[1] == 0:
        raise WitnessError(f"kernel is trivial; edge {e} is not witnessable")
    row = V[e, :]
    delta = V @ row.conj()
    norm = np.linalg.norm(delta)
    if norm == 0 or abs(delta[e]) / norm < min_component:
        raise WitnessError(
            f"no kernel vector with significant component at edge {e} "
            "(verdict inconsistency)"
        )
    delta = delta / norm
    h0 = eval_h(fm, sample.x)
    curve = []
    for t in steps:
        resid = float(np.linalg.norm(eval_h(fm, sample.x + t * delta) - h0))
        curve.append((float(t), resid))
    floor = 1e-11 * max(1.0, float(np.linalg.norm(h0)))
    exponent = fit_exponent([t for t, _ in curve], [r for _, r in curve], floor=floor)
    return Witness(delta=delta, residual_curve=tuple(curve), exponent=exponent)


def run_verification(
    topo: NetworkTopology,
    sets: SelectionSets,
    seed: int = 0,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_entry: float = DEFAULT_TOL_ENTRY,
    cond_limit: float = DEFAULT_COND_LIMIT,
    fd_step: float = 1e-6,
) -> dict:
    """Run every oracle cross-check on one configuration.

    Returns a JSON-ready summary with one section per check and an overall
    ``pass`` flag; used by the CLI ``--verify`` flag and the test suite.
    """
    sel = build_selection_matrices(topo, sets)
    fm = ForwardMap(topo=topo, sel=sel)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sample = sample_network_matrix(topo, rng, cond_limit)

    K = build_K(sample, sel)
    K_cols = build_K_columns(sample, sel)
    construction_err = relative_max_err(K.entries, K_cols.entries)

    J = finite_difference_jacobian(fm, sample.x, fd_step)
    fd_err = jacobian_agreement(K, J)
    order_errors = [
        jacobian_agreement(K, finite_difference_jacobian(fm, sample.x, s))
        for s in FD_ORDER_STEPS
    ]
    fd_order = fit_exponent(FD_ORDER_STEPS, order_errors, floor=FD_ORDER_NOISE_FLOOR)

    rank, _ = numeric_rank(K, tol_rank)
    V = kernel_basis(K, tol_rank)
    verdicts = edge_verdicts_from_kernel(V, tol_entry)
    exact_rank, exact_verdicts = gfp.exact_rank_gfp(topo, sets, seed=seed)
    exact_agrees = exact_rank == rank and list(exact_verdicts) == [bool(v) for v in verdicts]

    witness_results = []
    witnesses_ok = True
    for e, ok in enumerate(verdicts):
        if ok:
            continue
        wit = kernel_direction_witness(fm, sample, e, tol_rank, min_component=tol_entry)
        passed = wit.exponent >= 1.9
        witnesses_ok = witnesses_ok and passed
        witness_results.append(
            {
                "edge": list(topo.edges[e]),
                "exponent": wit.exponent,
                "residual_curve": [[t, r] for t, r in wit.residual_curve],
                "pass": passed,
            }
        )

    checks = {
        "k_construction": {
            "max_rel_err": construction_err,
            "tolerance": 1e-12,
            "pass": construction_err <= 1e-12,
        },
        "finite_difference": {
            "max_rel_err": fd_err,
            "tolerance": 1e-5,
            "step": fd_step,
            "order": fd_order,
            "order_floor": 1.9,
            "pass": fd_err <= 1e-5 and fd_order >= 1.9,
        },
        "exact_rank": {
            "float_rank": rank,
            "exact_rank": exact_rank,
            "pass": exact_agrees,
        },
        "witnesses": {
            "results": witness_results,
            "pass": witnesses_ok,
        },
    }
    checks["pass"] = all(section["pass"] for section in checks.values())
    return checks
