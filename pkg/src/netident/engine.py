"""Randomized local-identifiability analysis of a network's edge weights.

The input-output behaviour of a network with edge-weight vector x is
captured by the map h(x) = vec(C (I - G(x))^-1 B). An edge weight can be
recovered from that data near x exactly when every kernel vector of the
gradient matrix

    K(x) = (B^T T^T(x) kron C T(x)) IG,      T(x) = (I - G(x))^-1

has a zero entry at that edge's coordinate; the whole network is
recoverable exactly when K(x) has full column rank. Both facts hold for
almost all x or almost none, so evaluating K at random complex samples
decides them with probability 1. The driver repeats the test over several
independent samples and OR-accumulates the per-edge verdicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .topology import NetworkTopology, SelectionMatrices, SelectionSets, build_selection_matrices

DEFAULT_NSAMPLES = 5
DEFAULT_TOL_RANK = 1e-9
DEFAULT_TOL_ENTRY = 1e-7
DEFAULT_COND_LIMIT = 1e8
MAX_SAMPLE_RETRIES = 50

# cond(I-G) above this is treated as a member of the excluded set D
_SINGULAR_COND = 1e15
# max-norm tolerance per node for the inverse residual (I-G)T - I
_RESIDUAL_TOL_PER_NODE = 1e-10


class EngineError(RuntimeError):
    """Base class for analysis failures."""


class SingularNetworkError(EngineError):
    """(I - G(x)) is numerically singular: x lies in the excluded set D
    where det(I - G(x)) = 0 and the transfer matrix does not exist."""


class SamplingError(EngineError):
    """The resampling budget was exhausted without an acceptable sample."""


@dataclass(frozen=True)
class NetworkSample:
    """A random evaluation point: edge weights x with G(x) and its transfer
    matrix T = (I - G)^-1, plus the condition number of (I - G)."""

    x: np.ndarray
    G: np.ndarray
    T: np.ndarray
    cond: float


@dataclass(frozen=True)
class KMatrix:
    """Gradient matrix of the input-output map at one sample.

    ``entries`` is (|excited|*|measured|) x |E| complex. Row r corresponds
    to excitation ``row_excitation[r]`` and measurement ``row_measurement[r]``
    (both 1-based node ids); column k corresponds to edge ``col_edges[k]``.

    ``scale`` bounds the spectral norm of the construction (a product of
    transfer-matrix norms); entries are only accurate to about
    eps * scale, so singular values below that are numerical zeros even
    when the largest one is itself tiny.
    """

    entries: np.ndarray
    row_excitation: tuple[int, ...]
    row_measurement: tuple[int, ...]
    col_edges: tuple[tuple[int, int], ...]
    scale: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class SampleDiagnostics:
    rank: int
    kernel_dim: int
    singular_values: np.ndarray
    cond: float


@dataclass(frozen=True)
class IdentifiabilityReport:
    """Aggregated verdicts: ``network`` true means every edge weight is
    recoverable near almost any x; ``edges[k]`` is the verdict for edge k
    in canonical order. Verdicts are OR-accumulated over samples."""

    network: bool
    edges: tuple[bool, ...]
    samples: tuple[SampleDiagnostics, ...]
    params: dict = field(compare=False)


def network_matrix(topo: NetworkTopology, x: np.ndarray) -> np.ndarray:
    """G(x): place x_k at entry (i_k, j_k) for edge k = (j_k, i_k)."""
    x = np.asarray(x)
    if x.shape != (topo.n_edges,):
        raise ValueError(f"x must have length {topo.n_edges}, got shape {x.shape}")
    G = np.zeros((topo.n, topo.n), dtype=complex)
    for k, (j, i) in enumerate(topo.edges):
        G[i - 1, j - 1] = x[k]
    return G


def compute_transfer(G: np.ndarray) -> tuple[np.ndarray, float]:
    """Invert (I - G), returning T and a 2-norm condition estimate.

    Raises SingularNetworkError when (I - G) is numerically singular,
    i.e. the weights lie in the excluded set D = {x : det(I - G(x)) = 0}.
    """
    n = G.shape[0]
    A = np.eye(n) - G
    sigma = np.linalg.svd(A, compute_uv=False)
    if sigma.size and sigma[-1] > 0:
        cond = float(sigma[0] / sigma[-1])
    else:
        cond = float("inf")
    if not np.isfinite(cond) or cond > _SINGULAR_COND:
        raise SingularNetworkError(
            f"(I - G) numerically singular (cond ~ {cond:.2e}); "
            "weights lie in the excluded set D where det(I - G(x)) = 0"
        )
    try:
        T = np.linalg.inv(A)
    except np.linalg.LinAlgError as err:
        raise SingularNetworkError(
            "(I - G) singular; weights lie in the excluded set D "
            "where det(I - G(x)) = 0"
        ) from err
    return T, cond


def sample_network_matrix(
    topo: NetworkTopology,
    rng: np.random.Generator,
    cond_limit: float = DEFAULT_COND_LIMIT,
    max_retries: int = MAX_SAMPLE_RETRIES,
) -> NetworkSample:
    """Draw a random complex sample with a well-conditioned (I - G).

    Real and imaginary parts of each weight are i.i.d. uniform on [-1, 1].
    Draws are rejected until cond(I - G) <= cond_limit and the inverse
    residual meets the per-node tolerance; a bounded retry budget guards
    against pathological configurations.
    """
    if cond_limit <= 1:
        raise ValueError("cond_limit must exceed 1")
    n = topo.n
    last_cond = float("nan")
    for _ in range(max_retries):
        re = rng.uniform(-1.0, 1.0, size=topo.n_edges)
        im = rng.uniform(-1.0, 1.0, size=topo.n_edges)
        x = re + 1j * im
        G = network_matrix(topo, x)
        try:
            T, cond = compute_transfer(G)
        except SingularNetworkError:
            last_cond = float("inf")
            continue
        last_cond = cond
        if cond > cond_limit:
            continue
        residual = np.abs((np.eye(n) - G) @ T - np.eye(n)).max()
        if residual > _RESIDUAL_TOL_PER_NODE * n:
            continue
        for arr in (x, G, T):
            arr.flags.writeable = False
        return NetworkSample(x=x, G=G, T=T, cond=cond)
    raise SamplingError(
        f"no acceptable sample in {max_retries} draws "
        f"(cond_limit={cond_limit:g}, last cond ~ {last_cond:.2e})"
    )


def _k_metadata(
    sel: SelectionMatrices,
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[tuple[int, int], ...]]:
    """Recover 1-based row/column labels from the binary selection matrices."""
    n = sel.B.shape[0]
    excited = [int(c.argmax()) + 1 for c in sel.B.T]
    measured = [int(r.argmax()) + 1 for r in sel.C]
    row_exc = tuple(b for b in excited for _ in measured)
    row_mea = tuple(c for _ in excited for c in measured)
    edges = []
    for col in sel.IG.T:
        pos = int(col.argmax())
        edges.append((pos // n + 1, pos % n + 1))
    return row_exc, row_mea, tuple(edges)


def build_K(sample: NetworkSample, sel: SelectionMatrices) -> KMatrix:
    """Assemble K = (B^T T^T kron C T) IG via the Kronecker product."""
    T = sample.T
    entries = np.kron(sel.B.T @ T.T, sel.C @ T) @ sel.IG
    if not np.all(np.isfinite(entries)):
        raise EngineError("non-finite entries in K")
    row_exc, row_mea, edges = _k_metadata(sel)
    entries.flags.writeable = False
    scale = float(np.linalg.norm(T, 2) ** 2)
    return KMatrix(
        entries=entries,
        row_excitation=row_exc,
        row_measurement=row_mea,
        col_edges=edges,
        scale=scale,
    )


def reduce_full_excitation(sample: NetworkSample, sel: SelectionMatrices) -> KMatrix:
    """Specialized gradient (I kron C T) IG, valid when every node is excited.

    With B the identity, the trailing transfer factor T B is invertible and
    drops from the kernel computation, so edge verdicts from this reduced
    matrix equal those from the full K on the same sample.
    """
    n = sel.B.shape[0]
    if sel.B.shape != (n, n) or not np.array_equal(sel.B, np.eye(n)):
        raise ValueError("full-excitation reduction requires B = I (all nodes excited)")
    entries = np.kron(np.eye(n), sel.C @ sample.T) @ sel.IG
    row_exc, row_mea, edges = _k_metadata(sel)
    entries.flags.writeable = False
    scale = float(np.linalg.norm(sample.T, 2))
    return KMatrix(
        entries=entries,
        row_excitation=row_exc,
        row_measurement=row_mea,
        col_edges=edges,
        scale=scale,
    )


def reduce_full_measurement(sample: NetworkSample, sel: SelectionMatrices) -> KMatrix:
    """Mirror of reduce_full_excitation for C = I: (B^T T^T kron I) IG."""
    n = sel.C.shape[1]
    if sel.C.shape != (n, n) or not np.array_equal(sel.C, np.eye(n)):
        raise ValueError("full-measurement reduction requires C = I (all nodes measured)")
    entries = np.kron(sel.B.T @ sample.T.T, np.eye(n)) @ sel.IG
    row_exc, row_mea, edges = _k_metadata(sel)
    entries.flags.writeable = False
    scale = float(np.linalg.norm(sample.T, 2))
    return KMatrix(
        entries=entries,
        row_excitation=row_exc,
        row_measurement=row_mea,
        col_edges=edges,
        scale=scale,
    )


def _rank_from_sigma(
    sigma: np.ndarray, shape: tuple[int, int], tol_rank: float, scale: float
) -> int:
    """Count singular values above both the relative cut and the entry-noise
    floor eps * max(dims) * scale. The floor keeps structurally zero
    matrices (entries pure rounding residue) at rank 0, where a purely
    relative rule would count the noise itself as signal."""
    if sigma.size == 0 or sigma[0] == 0:
        return 0
    cut = max(
        tol_rank * max(shape) * sigma[0],
        np.finfo(float).eps * max(shape) * scale,
    )
    return int(np.sum(sigma > cut))


def numeric_rank(K: KMatrix, tol_rank: float = DEFAULT_TOL_RANK) -> tuple[int, np.ndarray]:
    """Numerical rank: singular values above tol_rank * max(dims) * sigma_max.

    Returns the rank and the full singular spectrum for diagnostics.
    """
    entries = K.entries
    if not np.all(np.isfinite(entries)):
        raise EngineError("cannot rank a matrix with non-finite entries")
    sigma = np.linalg.svd(entries, compute_uv=False)
    return _rank_from_sigma(sigma, entries.shape, tol_rank, K.scale), sigma


def kernel_basis(K: KMatrix, tol_rank: float = DEFAULT_TOL_RANK) -> np.ndarray:
    """Orthonormal basis of ker K: right-singular vectors below the rank cut.

    Shape is |E| x kernel_dim; each column v satisfies
    ||K v|| <= tol_rank * max(dims) * sigma_max.
    """
    entries = K.entries
    if not np.all(np.isfinite(entries)):
        raise EngineError("cannot factor a matrix with non-finite entries")
    if entries.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    _, sigma, Vh = np.linalg.svd(entries, full_matrices=True)
    rank = _rank_from_sigma(sigma, entries.shape, tol_rank, K.scale)
    return Vh[rank:].conj().T


def edge_verdicts_from_kernel(V: np.ndarray, tol_entry: float = DEFAULT_TOL_ENTRY) -> np.ndarray:
    """Per-edge verdicts from a kernel basis: edge e is recoverable iff row e
    of V is (numerically) zero, i.e. the kernel is orthogonal to e_e.

    V must be column-orthonormal, so tol_entry compares directly against
    row 2-norms. An empty basis certifies every edge.
    """
    if V.shape[1] == 0:
        return np.ones(V.shape[0], dtype=bool)
    row_norms = np.linalg.norm(V, axis=1)
    return row_norms <= tol_entry


def edge_verdict_by_rank_drop(
    K: KMatrix, e: int, tol_rank: float = DEFAULT_TOL_RANK
) -> bool:
    """Cross-check path: edge e is recoverable iff deleting its column
    drops the rank by exactly one (the column is independent of the rest)."""
    entries = K.entries
    if not 0 <= e < entries.shape[1]:
        raise IndexError(f"edge index {e} out of range for |E|={entries.shape[1]}")
    rank_full = _rank_from_sigma(
        np.linalg.svd(entries, compute_uv=False), entries.shape, tol_rank, K.scale
    )
    reduced = np.delete(entries, e, axis=1)
    sigma_red = (
        np.linalg.svd(reduced, compute_uv=False)
        if reduced.shape[1]
        else np.zeros(0)
    )
    rank_red = _rank_from_sigma(sigma_red, reduced.shape, tol_rank, K.scale)
    return rank_full == rank_red + 1


def analyze(
    topo: NetworkTopology,
    sets: SelectionSets,
    nsamples: int = DEFAULT_NSAMPLES,
    seed: Optional[int] = None,
    tol_rank: float = DEFAULT_TOL_RANK,
    tol_entry: float = DEFAULT_TOL_ENTRY,
    cond_limit: float = DEFAULT_COND_LIMIT,
) -> IdentifiabilityReport:
    """Decide which edges are generically recoverable, with probability 1.

    Per sample: if K has full column rank the whole network is certified
    (and every edge marked recoverable); otherwise per-edge verdicts come
    from the kernel basis and are OR-ed into the accumulator. Deterministic
    given the seed: sample i draws from the i-th spawn of the seed sequence,
    so results do not depend on evaluation order.
    """
    if nsamples < 1:
        raise ValueError("nsamples must be at least 1")
    sel = build_selection_matrices(topo, sets)
    n_edges = topo.n_edges
    network = False
    edges_acc = np.zeros(n_edges, dtype=bool)
    diagnostics = []
    streams = np.random.SeedSequence(seed).spawn(nsamples)
    for idx, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        try:
            sample = sample_network_matrix(topo, rng, cond_limit)
            K = build_K(sample, sel)
            rank, sigma = numeric_rank(K, tol_rank)
        except EngineError as err:
            raise type(err)(f"sample {idx}: {err}") from err
        if rank == n_edges:
            network = True
            edges_acc[:] = True
            kernel_dim = 0
        else:
            V = kernel_basis(K, tol_rank)
            kernel_dim = V.shape[1]
            edges_acc |= edge_verdicts_from_kernel(V, tol_entry)
        sigma.flags.writeable = False
        diagnostics.append(
            SampleDiagnostics(
                rank=rank,
                kernel_dim=kernel_dim,
                singular_values=sigma,
                cond=sample.cond,
            )
        )
    params = {
        "nsamples": nsamples,
        "seed": seed,
        "tol_rank": tol_rank,
        "tol_entry": tol_entry,
        "cond_limit": cond_limit,
        "full_rank_marks_all_edges": True,
    }
    return IdentifiabilityReport(
        network=network,
        edges=tuple(bool(v) for v in edges_acc),
        samples=tuple(diagnostics),
        params=params,
    )
