"""Persistent combinatorial Laplacians and their spectra.

Chains use the orthonormal simplex basis, so adjoints are transposes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .complex import ComplexSnapshot, Filtration, Simplex, faces, snapshot

NULLSPACE_TOL = 1e-10
DENSE_LIMIT = 3000
DEFAULT_M = 6


class EigensolverError(RuntimeError):
    """The iterative eigensolver failed to converge."""


def signed_boundary(
    rows: Sequence[Simplex], cols: Sequence[Simplex], row_pos: Optional[dict] = None
) -> np.ndarray:
    """Real boundary matrix from ``cols`` (k+1-simplices) to ``rows`` (k-simplices)."""
    if row_pos is None:
        row_pos = {s: i for i, s in enumerate(rows)}
    out = np.zeros((len(rows), len(cols)))
    for j, s in enumerate(cols):
        for i, face in enumerate(faces(s)):
            out[row_pos[face], j] = -1.0 if i % 2 else 1.0
    return out


@dataclass(frozen=True, eq=False)
class PersistentBoundary:
    """Boundary restricted to chains of the later complex landing in the earlier one.

    ``basis`` columns are orthonormal, expressed in the (k+1)-simplex
    coordinates ``cols`` of the later complex; ``matrix`` = rows-of-K_i block
    of the boundary times ``basis``.
    """

    matrix: np.ndarray
    basis: np.ndarray
    rows: tuple[Simplex, ...]
    cols: tuple[Simplex, ...]
    k: int
    scales: tuple[float, float]


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    matrix: np.ndarray
    k: int
    scales: tuple[float, float]
    up: Optional[np.ndarray] = None
    down: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: tuple[float, ...]
    harmonic_dim: int
    lambda_min_positive: Optional[float]
    size: int
    zero_tol: float

    @property
    def positive_count(self) -> int:
        return len(self.eigenvalues) - self.harmonic_dim


def _pair_snapshots(filtration, eps_i, eps_j):
    if eps_i > eps_j:
        raise ValueError("eps_i must not exceed eps_j")
    return snapshot(filtration, eps_i), snapshot(filtration, eps_j)


def persistent_boundary_from(
    ki: ComplexSnapshot, kj: ComplexSnapshot, k: int
) -> PersistentBoundary:
    rows_i = ki.simplices(k)
    rows_j = kj.simplices(k)
    cols = kj.simplices(k + 1)
    pos_j = {s: n for n, s in enumerate(rows_j)}
    full = signed_boundary(rows_j, cols, pos_j)
    in_i = set(rows_i)
    a_idx = [pos_j[s] for s in rows_i]
    b_idx = [pos_j[s] for s in rows_j if s not in in_i]
    block_a = full[a_idx, :]
    block_b = full[b_idx, :]

    # columns whose faces all lie in K_i have a zero block-B column, so the
    # null space splits into those coordinate vectors plus null(block_b[:, rest])
    touches = np.any(block_b != 0, axis=0) if block_b.size else np.zeros(len(cols), bool)
    free = np.flatnonzero(~touches)
    rest = np.flatnonzero(touches)
    parts = []
    if free.size:
        eye = np.zeros((len(cols), free.size))
        eye[free, np.arange(free.size)] = 1.0
        parts.append(eye)
    if rest.size:
        ns = scipy.linalg.null_space(block_b[:, rest], rcond=NULLSPACE_TOL)
        if ns.size:
            emb = np.zeros((len(cols), ns.shape[1]))
            emb[rest, :] = ns
            parts.append(emb)
    basis = np.hstack(parts) if parts else np.zeros((len(cols), 0))
    return PersistentBoundary(
        block_a @ basis, basis, tuple(rows_i), tuple(cols), k,
        (ki.scale, kj.scale),
    )


def persistent_boundary(
    filtration: Filtration, k: int, eps_i: float, eps_j: float
) -> PersistentBoundary:
    ki, kj = _pair_snapshots(filtration, eps_i, eps_j)
    return persistent_boundary_from(ki, kj, k)


def persistent_laplacian_from(
    ki: ComplexSnapshot, kj: ComplexSnapshot, k: int
) -> LaplacianMatrix:
    pb = persistent_boundary_from(ki, kj, k)
    up = pb.matrix @ pb.matrix.T
    rows = ki.simplices(k)
    if k >= 1 and rows:
        d_k = signed_boundary(ki.simplices(k - 1), rows, ki.positions[k - 1])
        down = d_k.T @ d_k
    else:
        down = np.zeros((len(rows), len(rows)))
    return LaplacianMatrix(up + down, k, (ki.scale, kj.scale), up, down)


def persistent_laplacian(
    filtration: Filtration, k: int, eps_i: float, eps_j: float
) -> LaplacianMatrix:
    if k > filtration.max_dim:
        raise ValueError(f"k={k} exceeds the filtration's max_dim")
    ki, kj = _pair_snapshots(filtration, eps_i, eps_j)
    return persistent_laplacian_from(ki, kj, k)


def combinatorial_laplacian(snap: ComplexSnapshot, k: int) -> np.ndarray:
    """L_k = d_{k+1} d_{k+1}^T + d_k^T d_k assembled directly."""
    rows = snap.simplices(k)
    n = len(rows)
    lap = np.zeros((n, n))
    if k + 1 <= snap.dim:
        d_up = signed_boundary(rows, snap.simplices(k + 1), snap.positions[k])
        lap += d_up @ d_up.T
    if k >= 1 and rows:
        d_dn = signed_boundary(snap.simplices(k - 1), rows, snap.positions[k - 1])
        lap += d_dn.T @ d_dn
    return lap


def default_zero_tol(largest: float) -> float:
    return 1e-8 * max(1.0, largest)


def spectrum(
    lap: LaplacianMatrix | np.ndarray,
    zero_tol: Optional[float] = None,
    dense_limit: int = DENSE_LIMIT,
    m: int = DEFAULT_M,
) -> SpectrumSummary:
    """Eigenvalue summary; eigenvalues below ``zero_tol`` count as harmonic.

    Above ``dense_limit`` only the smallest eigenvalues are computed
    iteratively, growing the window until a positive one is found.
    """
    mat = lap.matrix if isinstance(lap, LaplacianMatrix) else np.asarray(lap)
    n = mat.shape[0]
    if zero_tol is not None and not zero_tol > 0:
        raise ValueError("zero_tol must be positive")
    if n == 0:
        return SpectrumSummary((), 0, None, 0, zero_tol or default_zero_tol(0.0))
    if n <= dense_limit:
        vals = scipy.linalg.eigvalsh(mat)
        tol = zero_tol if zero_tol is not None else default_zero_tol(float(vals[-1]))
        return _summarize(vals, tol, n)
    return _iterative_spectrum(mat, zero_tol, m)


def _summarize(vals: np.ndarray, tol: float, n: int) -> SpectrumSummary:
    vals = np.sort(vals)
    harmonic = int(np.count_nonzero(vals < tol))
    pos = vals[vals >= tol]
    lam = float(pos[0]) if pos.size else None
    return SpectrumSummary(tuple(float(v) for v in vals), harmonic, lam, n, tol)


def _iterative_spectrum(mat: np.ndarray, zero_tol, m: int) -> SpectrumSummary:
    n = mat.shape[0]
    sp = scipy.sparse.csr_matrix(mat)
    # Gershgorin bound stands in for the largest eigenvalue
    bound = float(np.max(np.abs(mat).sum(axis=1)))
    tol = zero_tol if zero_tol is not None else default_zero_tol(bound)
    shift = -max(tol, 1e-6)
    want = min(m, n - 1)
    while True:
        try:
            vals = scipy.sparse.linalg.eigsh(
                sp, k=want, sigma=shift, which="LM", return_eigenvectors=False
            )
        except (scipy.sparse.linalg.ArpackNoConvergence, RuntimeError) as exc:
            raise EigensolverError(str(exc)) from exc
        vals = np.sort(vals)
        if np.any(vals >= tol) or want >= n - 1:
            break
        want = min(2 * want, n - 1)
    if not np.any(vals >= tol) and want >= n - 1:
        vals = scipy.linalg.eigvalsh(mat)
    s = _summarize(vals, tol, n)
    return SpectrumSummary(s.eigenvalues, s.harmonic_dim, s.lambda_min_positive, n, tol)


def spectra_curves(
    filtration: Filtration,
    k_max: int,
    grid: Sequence[float],
    lag: float = 0.0,
    zero_tol: Optional[float] = None,
    dense_limit: int = DENSE_LIMIT,
    threads: int = 1,
) -> dict[int, list[SpectrumSummary]]:
    """SpectrumSummary of L^{(eps, eps+lag)}_k for every grid scale and k <= k_max.

    Identical (prefix_i, prefix_j, k) jobs are solved once. With
    ``threads > 1`` distinct jobs run in a thread pool; results are
    assembled in grid order, so output does not depend on scheduling.
    """
    if lag < 0:
        raise ValueError("lag must be nonnegative")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be ascending")
    k_max = min(k_max, filtration.max_dim)
    snaps: dict[int, ComplexSnapshot] = {}
    keys: list[tuple[int, int]] = []
    for eps in grid:
        pi = filtration.prefix_length(eps)
        pj = filtration.prefix_length(eps + lag)
        for p, e in ((pi, eps), (pj, eps + lag)):
            if p not in snaps:
                snaps[p] = snapshot(filtration, e)
        keys.append((pi, pj))
    jobs = list(dict.fromkeys((pi, pj, k) for pi, pj in keys for k in range(k_max + 1)))

    def solve(job):
        pi, pj, k = job
        return spectrum(persistent_laplacian_from(snaps[pi], snaps[pj], k), zero_tol, dense_limit)

    if threads > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            cache = dict(zip(jobs, pool.map(solve, jobs)))
    else:
        cache = {job: solve(job) for job in jobs}
    return {
        k: [cache[(pi, pj, k)] for pi, pj in keys] for k in range(k_max + 1)
    }


def curves_to_csv(grid: Sequence[float], curves: dict[int, list[SpectrumSummary]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scale", "k", "harmonic_dim", "lambda_min_positive"])
    for k in sorted(curves):
        for eps, s in zip(grid, curves[k]):
            lam = "" if s.lambda_min_positive is None else repr(s.lambda_min_positive)
            w.writerow([repr(eps), k, s.harmonic_dim, lam])
    return buf.getvalue()


def eigenvalues_json(grid: Sequence[float], curves: dict[int, list[SpectrumSummary]]) -> str:
    data = {
        str(k): [
            {"scale": eps, "eigenvalues": list(s.eigenvalues)}
            for eps, s in zip(grid, curves[k])
        ]
        for k in sorted(curves)
    }
    return json.dumps(data)
