"""Exact rank and edge verdicts over a large prime field.

The generic-rank questions the floating engine answers with SVD thresholds
are decided here in exact modular arithmetic: draw edge weights uniformly
from GF(p) for a fixed 61-bit Mersenne prime, invert (I - G) by
Gauss-Jordan elimination mod p, build the gradient matrix column by
column, and read rank and kernel structure off the reduced row-echelon
form. Agreement with the floating path certifies the numeric tolerances.

The certificate is probabilistic, not deductive: a random field point can
land on the lower-dimensional exception set, with probability on the
order of (matrix size)/p, negligible at this prime.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .topology import NetworkTopology, SelectionSets

MERSENNE_61 = (1 << 61) - 1

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class FieldSamplingError(RuntimeError):
    """All retry draws hit det(I - G) = 0 mod p."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        v = pow(a, d, n)
        if v in (1, n - 1):
            continue
        for _ in range(s - 1):
            v = v * v % n
            if v == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSample:
    """A random field point: residue weights x with G(x) and the exact
    inverse T = (I - G)^-1 over GF(p)."""

    p: int
    x: tuple[int, ...]
    G: tuple[tuple[int, ...], ...]
    T: tuple[tuple[int, ...], ...]


def _identity(n: int) -> list[list[int]]:
    return [[1 if r == c else 0 for c in range(n)] for r in range(n)]


def _mat_inv_mod(A: list[list[int]], p: int) -> list[list[int]]:
    """Gauss-Jordan inverse mod p; raises ZeroDivisionError when singular."""
    n = len(A)
    M = [[A[r][c] % p for c in range(n)] + _identity(n)[r] for r in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if M[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("matrix singular mod p")
        M[col], M[pivot] = M[pivot], M[col]
        inv = pow(M[col][col], -1, p)
        M[col] = [v * inv % p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [(a - f * b) % p for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _rref_mod(M: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form mod p; returns (R, pivot column list)."""
    R = [row[:] for row in M]
    n_rows = len(R)
    n_cols = len(R[0]) if n_rows else 0
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        pivot = next((r for r in range(row, n_rows) if R[r][col] != 0), None)
        if pivot is None:
            continue
        R[row], R[pivot] = R[pivot], R[row]
        inv = pow(R[row][col], -1, p)
        R[row] = [v * inv % p for v in R[row]]
        for r in range(n_rows):
            if r != row and R[r][col]:
                f = R[r][col]
                R[r] = [(a - f * b) % p for a, b in zip(R[r], R[row])]
        pivots.append(col)
        row += 1
    return R, pivots


def sample_field_point(
    topo: NetworkTopology,
    p: int = MERSENNE_61,
    seed: int = 0,
    max_retries: int = 50,
) -> FieldSample:
    """Draw x uniform over GF(p)^|E|, rejecting points with det(I - G) = 0."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    rng = random.Random(seed)
    n = topo.n
    for _ in range(max_retries):
        x = [rng.randrange(p) for _ in range(topo.n_edges)]
        G = [[0] * n for _ in range(n)]
        for k, (j, i) in enumerate(topo.edges):
            G[i - 1][j - 1] = x[k]
        A = [[(1 if r == c else 0) - G[r][c] for c in range(n)] for r in range(n)]
        try:
            T = _mat_inv_mod(A, p)
        except ZeroDivisionError:
            continue
        return FieldSample(
            p=p,
            x=tuple(x),
            G=tuple(tuple(row) for row in G),
            T=tuple(tuple(row) for row in T),
        )
    raise FieldSamplingError(f"det(I - G) = 0 mod {p} for {max_retries} draws")


def build_K_mod(fs: FieldSample, topo: NetworkTopology, sets: SelectionSets) -> list[list[int]]:
    """Gradient matrix over GF(p), column k = vec(C T G(e_k) T B).

    Row (b-1)*|measured| + (c-1) matches the floating engine's ordering.
    The single-entry structure of G(e_k) collapses each column to products
    of one T row and one T column.
    """
    p, T = fs.p, fs.T
    n_rows = len(sets.excited) * len(sets.measured)
    K = [[0] * topo.n_edges for _ in range(n_rows)]
    for k, (j, i) in enumerate(topo.edges):
        for b, exc in enumerate(sets.excited):
            for c, mea in enumerate(sets.measured):
                K[b * len(sets.measured) + c][k] = (
                    T[mea - 1][i - 1] * T[j - 1][exc - 1] % p
                )
    return K


def exact_rank_gfp(
    topo: NetworkTopology,
    sets: SelectionSets,
    p: int = MERSENNE_61,
    seed: int = 0,
) -> tuple[int, list[bool]]:
    """Exact generic rank and per-edge verdicts over GF(p).

    Edge e is certified iff every kernel vector of K has zero e-th entry,
    read directly off the RREF: e must be a pivot column whose pivot row
    vanishes on all free columns.
    """
    if topo.n_edges == 0:
        return 0, []
    fs = sample_field_point(topo, p=p, seed=seed)
    K = build_K_mod(fs, topo, sets)
    R, pivots = _rref_mod(K, p)
    free = [c for c in range(topo.n_edges) if c not in pivots]
    verdicts = []
    for e in range(topo.n_edges):
        if e in free:
            verdicts.append(False)
        else:
            row = pivots.index(e)
            verdicts.append(all(R[row][f] == 0 for f in free))
    return len(pivots), verdicts
