"""Dense eigendecomposition of non-normal matrices and spectral diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment, minimize

RESIDUAL_LIMIT = 1e-8
DEGENERACY_SPLIT = 1e-10


def canonical_order(values) -> np.ndarray:
    """Indices sorting complex values by (real, imag)."""
    values = np.asarray(values)
    return np.lexsort((values.imag, values.real))


def sort_spectrum(values) -> np.ndarray:
    values = np.asarray(values, dtype=complex)
    return values[canonical_order(values)]


def matrix_norm(h: np.ndarray) -> float:
    """Spectral norm, floored at the smallest positive double."""
    if h.size == 0:
        return 0.0
    return max(float(np.linalg.norm(h, 2)), np.finfo(float).tiny)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None = None
    left_vectors: np.ndarray | None = None
    residual: float = 0.0
    converged: bool = True
    degenerate_blocks: tuple[tuple[int, ...], ...] = field(default=())
    norm: float = 1.0

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _degenerate_clusters(w: np.ndarray, split: float) -> list[list[int]]:
    """Groups of indices whose eigenvalues chain together within ``split``."""
    n = len(w)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = canonical_order(w)
    # neighbours in canonical order catch most near-coincidences; confirm pairwise on candidates
    for a_pos in range(n):
        i = order[a_pos]
        for b_pos in range(a_pos + 1, n):
            j = order[b_pos]
            if w[j].real - w[i].real > split:
                break
            if abs(w[i] - w[j]) < split:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [sorted(g) for g in groups.values() if len(g) > 1]


def optimal_scaling(h: np.ndarray) -> np.ndarray:
    """Log-diagonal ``l`` minimizing ``sum |h_ij|^2 e^{2(l_j - l_i)}``.

    The objective is convex in ``l``, so L-BFGS reaches the global optimum.
    On a chain (a tree graph) the optimum makes every bond reciprocal in
    magnitude; with longer-range bonds it is the best compromise. LAPACK's
    own balancing uses powers of two and stops early on skin-effect chains,
    which costs several digits on the edge modes.
    """
    a = np.abs(np.asarray(h)) ** 2
    np.fill_diagonal(a, 0.0)
    i, j = np.nonzero(a)
    n = a.shape[0]
    if i.size == 0:
        return np.zeros(n)
    w = a[i, j]
    scale = w.max()

    def cost(l):
        e = (w / scale) * np.exp(2 * (l[j] - l[i]))
        g = np.zeros(n)
        np.add.at(g, j, 2 * e)
        np.add.at(g, i, -2 * e)
        return e.sum(), g

    res = minimize(cost, np.zeros(n), jac=True, method="L-BFGS-B",
                   options={"maxiter": 20000, "gtol": 1e-12, "ftol": 1e-15})
    l = res.x
    return l - 0.5 * (l.max() + l.min())


def scale_matrix(h: np.ndarray, logd: np.ndarray) -> np.ndarray:
    """``D^-1 H D`` for ``D = diag(e^logd)``, evaluated entrywise on the nonzeros only."""
    h = np.asarray(h, dtype=complex)
    out = np.zeros_like(h)
    i, j = np.nonzero(h)
    out[i, j] = h[i, j] * np.exp(logd[j] - logd[i])
    return out


def _unscale_columns(v: np.ndarray, logd: np.ndarray) -> np.ndarray:
    """Columns of ``diag(e^logd) v``, unit-normalized without overflow."""
    with np.errstate(divide="ignore"):
        logs = logd[:, None] + np.log(np.abs(v))
    shift = np.max(logs, axis=0, keepdims=True)
    phase = np.exp(1j * np.angle(v))
    out = np.where(v != 0, phase * np.exp(logs - shift), 0.0)
    return out / np.linalg.norm(out, axis=0, keepdims=True)


def is_hermitian(h: np.ndarray) -> bool:
    h = np.asarray(h)
    return bool(np.array_equal(h, h.conj().T))


def eigendecompose(h: np.ndarray, want_left: bool = False, want_vectors: bool = True,
                   balance: bool = True) -> Spectrum:
    """Full eigensystem of a general complex matrix.

    Non-Hermitian input is first rescaled by :func:`optimal_scaling` (an exact
    diagonal similarity), then LAPACK ``geev`` (balancing, Hessenberg
    reduction, shifted QR) does the work. Right vectors are unit-normalized
    columns in the original frame. Left vectors satisfy ``H^dagger u = conj(E) u``
    and are scaled so ``<u_i|v_i> = 1``; clusters of eigenvalues closer than
    1e-10 are biorthogonalized as a block and reported in ``degenerate_blocks``.
    The residual is measured in the frame the solver saw.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    norm = matrix_norm(h)
    logd = None
    work = h
    if balance and not is_hermitian(h):
        logd = optimal_scaling(h)
        work = scale_matrix(h, logd)
    work_norm = matrix_norm(work)
    try:
        if want_vectors or want_left:
            res = scipy.linalg.eig(work, left=want_left, right=True, check_finite=False)
        else:
            res = scipy.linalg.eigvals(work, check_finite=False)
    except np.linalg.LinAlgError:
        return Spectrum(np.array([], dtype=complex), converged=False, norm=norm)

    if not (want_vectors or want_left):
        w = np.asarray(res)
        order = canonical_order(w)
        return Spectrum(w[order], norm=norm)

    if want_left:
        w, vl, vr = res
    else:
        w, vr = res
        vl = None
    vr = vr / np.linalg.norm(vr, axis=0, keepdims=True)
    residual = float(np.max(np.linalg.norm(work @ vr - vr * w, axis=0)) / work_norm)

    blocks = _degenerate_clusters(w, DEGENERACY_SPLIT)
    if vl is not None:
        vl = vl / np.linalg.norm(vl, axis=0, keepdims=True)
    if logd is not None:
        vr = _unscale_columns(vr, logd)
        if vl is not None:
            vl = _unscale_columns(vl, -logd)
    if vl is not None:
        overlaps = np.einsum("ij,ij->j", vl.conj(), vr)
        with np.errstate(divide="ignore", invalid="ignore"):
            vl = vl / overlaps.conj()
        for blk in blocks:
            m = vl[:, blk].conj().T @ vr[:, blk]
            try:
                vl[:, blk] = vl[:, blk] @ np.linalg.inv(m).conj().T
            except np.linalg.LinAlgError:
                pass  # coalescing eigenvectors: left as is, block stays flagged

    order = canonical_order(w)
    inverse = np.empty_like(order)
    inverse[order] = np.arange(len(order))
    blocks_sorted = tuple(tuple(sorted(int(inverse[i]) for i in blk)) for blk in blocks)
    return Spectrum(
        eigenvalues=w[order],
        right_vectors=vr[:, order],
        left_vectors=None if vl is None else vl[:, order],
        residual=residual,
        converged=residual <= RESIDUAL_LIMIT,
        degenerate_blocks=blocks_sorted,
        norm=norm,
    )


def eigenvalue_conditions(s: Spectrum) -> np.ndarray:
    """``|u|*|v| / |<u|v>|`` per eigenvalue; needs left vectors."""
    if s.left_vectors is None or s.right_vectors is None:
        raise ValueError("condition numbers need left and right vectors")
    u, v = s.left_vectors, s.right_vectors
    num = np.linalg.norm(u, axis=0) * np.linalg.norm(v, axis=0)
    with np.errstate(divide="ignore"):
        return num / np.abs(np.einsum("ij,ij->j", u.conj(), v))


def eigenvalues(h: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues only."""
    return eigendecompose(h, want_vectors=False).eigenvalues


def spectral_distance(a, b) -> float:
    """Largest pairing distance under the optimal one-to-one matching of two multisets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"spectra of different sizes: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def hausdorff_one_sided(source, target) -> float:
    """``max_{x in source} min_{y in target} |x - y|``."""
    source = np.asarray(source, dtype=complex).ravel()
    target = np.asarray(target, dtype=complex).ravel()
    return float(np.max(np.min(np.abs(source[:, None] - target[None, :]), axis=1)))


def spectral_gap(s: Spectrum | np.ndarray) -> float:
    w = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s)
    if len(w) == 0:
        raise ValueError("empty spectrum")
    return float(np.min(np.abs(w)))


def bulk_gap(s: Spectrum | np.ndarray, skip: int = 2) -> float:
    """``|E|`` of the ``skip``-th smallest state: the gap with ``skip`` end modes set aside."""
    w = s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s)
    mags = np.sort(np.abs(w))
    return float(mags[min(skip, len(mags) - 1)])


@dataclass(frozen=True)
class PairingReport:
    paired: bool
    max_mismatch: float


def chiral_pairing(s: Spectrum | np.ndarray, tol: float = 1e-8) -> PairingReport:
    """Match each ``E`` to a distinct ``-E`` partner, nearest first."""
    w = np.asarray(s.eigenvalues if isinstance(s, Spectrum) else s, dtype=complex)
    n = len(w)
    if n == 0:
        return PairingReport(True, 0.0)
    cost = np.abs(w[:, None] + w[None, :])
    candidates = np.dstack(np.unravel_index(np.argsort(cost, axis=None), cost.shape))[0]
    partner = -np.ones(n, dtype=int)
    worst = 0.0
    for i, j in candidates:
        if partner[i] >= 0 or partner[j] >= 0:
            continue
        partner[i] = j
        partner[j] = i
        worst = max(worst, float(cost[i, j]))
        if np.all(partner >= 0):
            break
    return PairingReport(paired=worst <= tol, max_mismatch=worst)


@dataclass(frozen=True)
class ZeroModes:
    count: int
    indices: tuple[int, ...]


def default_zero_tol(h: np.ndarray) -> float:
    """1e-6 for Hermitian input, 1e-4 * ||H|| otherwise."""
    h = np.asarray(h)
    if is_hermitian(h):
        return 1e-6
    return 1e-4 * matrix_norm(h)


def zero_modes(s: Spectrum | np.ndarray, tol: float = 1e-6) -> ZeroModes:
    w = np.asarray(s.eigenvalues if isinstance(s, Spectrum) else s)
    idx = np.flatnonzero(np.abs(w) < tol)
    return ZeroModes(count=int(idx.size), indices=tuple(int(i) for i in idx))


@dataclass(frozen=True)
class SkinSummary:
    fraction_left: float
    fraction_right: float
    edge: str  # "left", "right" or "none"


@dataclass(frozen=True)
class LocalizationReport:
    boundary_weight_left: np.ndarray
    boundary_weight_right: np.ndarray
    mean_position: np.ndarray
    ipr: np.ndarray
    skin_summary: SkinSummary


def site_densities(vectors: np.ndarray) -> np.ndarray:
    """Column-normalized ``|psi(x)|^2``."""
    p = np.abs(np.asarray(vectors)) ** 2
    return p / p.sum(axis=0, keepdims=True)


def localization(s: Spectrum, sites: int | None = None, edge_cells: int = 10,
                 threshold: float = 0.9, edge_fraction: float = 0.1,
                 sites_per_cell: int = 2) -> LocalizationReport:
    """Per-state edge weights, mean position and IPR.

    Edge windows hold ``sites_per_cell * edge_cells`` sites. A state counts as
    localized on an edge when its weight there exceeds ``threshold``; the skin
    verdict names the edge holding more than ``edge_fraction`` of all states.
    """
    if s.right_vectors is None:
        raise ValueError("localization needs right eigenvectors")
    vec = s.right_vectors
    n = vec.shape[0] if sites is None else int(sites)
    if n != vec.shape[0]:
        raise ValueError(f"eigenvectors have {vec.shape[0]} components, expected {n}")
    p = site_densities(vec)
    window = min(sites_per_cell * edge_cells, n)
    left = p[:window].sum(axis=0)
    right = p[n - window:].sum(axis=0)
    x = np.arange(1, n + 1)
    mean_pos = x @ p
    ipr = (p**2).sum(axis=0)
    frac_l = float(np.mean(left > threshold))
    frac_r = float(np.mean(right > threshold))
    edge = "none"
    if max(frac_l, frac_r) > edge_fraction:
        edge = "left" if frac_l >= frac_r else "right"
    return LocalizationReport(left, right, mean_pos, ipr, SkinSummary(frac_l, frac_r, edge))


def window_weight(vectors: np.ndarray, start: int, stop: int) -> np.ndarray:
    """Weight of each normalized column on sites ``start:stop``."""
    p = site_densities(vectors)
    return p[max(start, 0):stop].sum(axis=0)
