"""Winding numbers on the deformed Brillouin zone, phase transitions and sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.signal import argrelmin

from . import models as m
from . import spectra as sp
from . import transforms as tf

DEFAULT_GRID = 2048
MIN_SAMPLES = 16
ORIGIN_TOL = 1e-12
CLOSURE_TOL = 1e-9
MAX_STEP = math.pi / 2
QUANT_LIMIT = 1e-3


class WindingError(ArithmeticError):
    pass


class LoopThroughOriginError(WindingError):
    """The loop touches zero: the parameters sit on a transition."""


class UnderResolvedError(WindingError):
    """A single step turns by more than pi/2; use a finer grid."""


class ConsistencyError(ArithmeticError):
    """Two independent evaluations of the same invariant disagree."""


# --------------------------------------------------------------------------
# Loop primitives


def _as_loop(samples) -> np.ndarray:
    """Open periodic samples of a closed loop.

    A trailing sample equal to the first (within 1e-9) is treated as the
    explicit closing point and dropped; otherwise the grid is taken as
    periodic, with the last sample followed by the first.
    """
    f = np.asarray(samples, dtype=complex).ravel()
    if f.size >= 2 and abs(f[-1] - f[0]) < CLOSURE_TOL:
        f = f[:-1]
    if f.size < MIN_SAMPLES:
        raise UnderResolvedError(f"a loop needs at least {MIN_SAMPLES} samples, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise WindingError("loop has non-finite samples")
    near = np.abs(f).min()
    if near < ORIGIN_TOL:
        raise LoopThroughOriginError(
            f"loop passes within {near:.2e} of the origin; the parameters sit on a transition")
    return f


def _phase_steps(f: np.ndarray) -> np.ndarray:
    steps = np.angle(np.roll(f, -1) / f)
    worst = np.abs(steps).max()
    if worst > MAX_STEP:
        raise UnderResolvedError(
            f"phase jumps by {worst:.3f} rad between samples; refine the grid")
    return steps


def scalar_winding(samples) -> int:
    """Winding of a closed loop of nonzero complex samples around the origin."""
    f = _as_loop(samples)
    return int(round(_phase_steps(f).sum() / (2 * math.pi)))


def _tracked_sqrt(z: np.ndarray) -> np.ndarray:
    """Square root continued along a well-resolved loop from the principal branch."""
    steps = _phase_steps(z)
    phase = np.angle(z[0]) + np.concatenate([[0.0], np.cumsum(steps[:-1])])
    return np.sqrt(np.abs(z)) * np.exp(0.5j * phase)


def half_winding(samples) -> float:
    """Winding of a branch-tracked square root of the loop: an integer or half-integer."""
    z = _as_loop(samples)
    r = _tracked_sqrt(z)
    closing = np.sqrt(z[0]) if abs(r[-1] - np.sqrt(z[0])) <= abs(r[-1] + np.sqrt(z[0])) \
        else -np.sqrt(z[0])
    steps = np.angle(np.append(r[1:], closing) / r)
    if np.abs(steps).max() > MAX_STEP:
        raise UnderResolvedError("square-root branch turns by more than pi/2 per step")
    return float(steps.sum() / (2 * math.pi))


def k_grid(grid: int) -> np.ndarray:
    grid = int(grid)
    if grid < MIN_SAMPLES:
        raise UnderResolvedError(f"grid must have at least {MIN_SAMPLES} points, got {grid}")
    return 2 * np.pi * np.arange(grid) / grid


# --------------------------------------------------------------------------
# Invariants


@dataclass(frozen=True)
class WindingResult:
    nu_e: float
    nu_q: float
    w_plus: int
    w_minus: int
    grid_points: int
    quantization_residual: float
    nu_q_branch: float = float("nan")  # the q = sqrt(h-/h+) e^{i(th- - th+)/2} evaluation


def _nearest_half(x: float) -> float:
    return round(2 * x) / 2


def chiral_winding(upper: np.ndarray, lower: np.ndarray) -> WindingResult:
    """Invariants of ``[[0, upper], [lower, 0]]`` sampled on a closed loop."""
    w_plus = scalar_winding(upper)
    w_minus = scalar_winding(lower)
    # E2 - E1 = 2 sqrt(upper * lower), branch-tracked
    raw = half_winding(upper * lower)
    nu_e = _nearest_half(raw)
    resid = abs(raw - nu_e)
    if resid >= QUANT_LIMIT:
        raise ConsistencyError(f"energy winding {raw:.6f} is not quantized; refine the grid")
    if nu_e != (w_plus + w_minus) / 2:
        raise ConsistencyError(
            f"energy winding {raw:.6f} disagrees with (w+ + w-)/2 = {(w_plus + w_minus) / 2}")
    nu_q_branch = half_winding(np.asarray(lower) / np.asarray(upper))
    nu_q = (w_minus - w_plus) / 2
    if abs(nu_q_branch - nu_q) > QUANT_LIMIT:
        raise ConsistencyError(
            f"branch-tracked q winding {nu_q_branch:.6f} disagrees with (w- - w+)/2 = {nu_q}")
    return WindingResult(nu_e=float(nu_e), nu_q=float(nu_q), w_plus=w_plus, w_minus=w_minus,
                         grid_points=len(np.asarray(upper).ravel()),
                         quantization_residual=float(resid), nu_q_branch=float(nu_q_branch))


def winding_numbers(p: m.NhsshParams, grid: int = DEFAULT_GRID) -> WindingResult:
    """``nu_E`` and ``nu_Q`` of the partner Bloch matrix over the deformed zone."""
    g = tf.gauge_params(p.t1, p.gamma)
    upper, lower = tf.partner_entries(g, p, k_grid(grid))
    return chiral_winding(upper, lower)


@dataclass(frozen=True)
class SocWinding:
    up: WindingResult
    down: WindingResult
    off_block_residual: float


SOC_DEFORMATIONS = {"gbz": 1.0, "doubled": 2.0}


def soc_partner_bloch(p: m.SocParams, k, g: tf.GaugeData | None = None,
                      deformation: str = "gbz") -> np.ndarray:
    """4x4 SOC partner at one momentum, oriented like :func:`transforms.partner_bloch`.

    The chain Bloch matrix is continued to ``-k + i c phi`` and conjugated by
    a constant S4 diagonal, where ``phi`` is the gauge exponent of the
    equivalent plain chain ``(t1, gamma) = (t, -2 delta)``. ``deformation``
    picks ``c``: ``"gbz"`` (c = 1) is the radius that symmetrizes the
    single-spin chain; ``"doubled"`` (c = 2) is the doubled shift built the
    same way as the plain partner.
    """
    if deformation not in SOC_DEFORMATIONS:
        raise m.ModelError(f"deformation must be one of {sorted(SOC_DEFORMATIONS)}")
    g = g if g is not None else tf.gauge_params(p.t, -2 * p.delta)
    c = SOC_DEFORMATIONS[deformation]
    hk = m.bloch_soc(p, -k + 1j * c * g.phi)
    s4 = tf.s4_transform(None, 0.0, ratio=math.exp(-(c - 1) * g.phi))
    return tf.apply_similarity(hk, s4)


def soc_winding(p: m.SocParams, grid: int = DEFAULT_GRID, deformation: str = "gbz") -> SocWinding:
    """Winding numbers of the spin blocks of the SOC partner."""
    g = tf.gauge_params(p.t, -2 * p.delta)
    ks = k_grid(grid)
    up_u, up_l, dn_u, dn_l = (np.empty(ks.size, dtype=complex) for _ in range(4))
    worst = 0.0
    for i, k in enumerate(ks):
        blocks = tf.soc_block_decompose(soc_partner_bloch(p, k, g, deformation))
        worst = max(worst, blocks.residual)
        up_u[i], up_l[i] = blocks.up[0, 1], blocks.up[1, 0]
        dn_u[i], dn_l[i] = blocks.down[0, 1], blocks.down[1, 0]
    return SocWinding(chiral_winding(up_u, up_l), chiral_winding(dn_u, dn_l), worst)


# --------------------------------------------------------------------------
# Analytic transitions


def transition_conditions(t2: float, t3: float, gamma: float, literal_phase: bool = False):
    """The two gap-closing conditions ``g+(t1)`` and ``g-(t1)`` of the partner at ``k = pi``.

    ``literal_phase`` swaps the real exponentials for the complex phases
    ``e^{-+i phi}``, ``e^{+-3i phi}``; those functions are complex and are
    returned as such.
    """
    def parts(t1):
        g = tf.gauge_params(t1, gamma)
        if literal_phase:
            plus = g.tbar1 - (t2 * np.exp(-1j * g.phi) + t3 * np.exp(3j * g.phi))
            minus = g.tbar1 - (t2 * np.exp(1j * g.phi) + t3 * np.exp(-3j * g.phi))
        else:
            plus = g.tbar1 - (t2 * math.exp(-g.phi) + t3 * math.exp(3 * g.phi))
            minus = g.tbar1 - (t2 * math.exp(g.phi) + t3 * math.exp(-3 * g.phi))
        return plus, minus

    return (lambda t1: parts(t1)[0]), (lambda t1: parts(t1)[1])


def _gauge_floor(gamma: float) -> float:
    floor = abs(gamma) / 2
    return floor + max(1e-9, 1e-9 * floor)


def _real_roots(f, lo: float, hi: float, samples: int, xtol: float) -> list[float]:
    xs = np.linspace(lo, hi, samples)
    ys = np.array([f(x) for x in xs])
    roots = []
    for i in range(samples - 1):
        if ys[i] == 0:
            roots.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            roots.append(float(bisect(f, xs[i], xs[i + 1], xtol=xtol)))
    if ys[-1] == 0:
        roots.append(float(xs[-1]))
    return roots


def transitions_analytic(t2: float, t3: float, gamma: float,
                         t1_range: tuple[float, float] = (0.0, 5.0),
                         literal_phase: bool = False, samples: int = 4001,
                         xtol: float = 1e-10) -> list[float]:
    """Positive ``t1`` values where the partner gap closes.

    Roots are bracketed on a uniform scan of the gauge-valid part of
    ``t1_range`` and refined by bisection. With ``t3 = 0`` the condition is
    ``tbar1 = t2``; with ``t2 = 0`` it is ``tbar1 = t3``. In literal-phase
    mode the conditions are complex, and the reported values are the points
    where ``|g|`` has a local minimum below ``1e-8``.
    """
    if t2 < 0 or t3 < 0:
        raise m.ModelError("t2 and t3 must be non-negative")
    lo, hi = float(t1_range[0]), float(t1_range[1])
    if not hi > lo:
        raise m.ModelError(f"empty t1 range ({lo}, {hi})")
    lo = max(lo, _gauge_floor(gamma))
    if lo >= hi:
        return []

    if literal_phase:
        plus, minus = transition_conditions(t2, t3, gamma, literal_phase=True)
        found = []
        xs = np.linspace(lo, hi, samples)
        for f in (plus, minus):
            mag = np.array([abs(f(x)) for x in xs])
            for i in argrelmin(mag)[0]:
                r = minimize_scalar(lambda x: abs(f(x)), bracket=(xs[i - 1], xs[i], xs[i + 1]),
                                    method="golden", tol=1e-12)
                if r.fun < 1e-8:
                    found.append(float(r.x))
        return sorted(found)

    if t3 == 0:
        fns = [lambda t1: tf.gauge_params(t1, gamma).tbar1 - t2]
    elif t2 == 0:
        fns = [lambda t1: tf.gauge_params(t1, gamma).tbar1 - t3]
    else:
        fns = list(transition_conditions(t2, t3, gamma))
    roots: list[float] = []
    for f in fns:
        roots.extend(_real_roots(f, lo, hi, samples, xtol))
    return _dedupe(sorted(roots), 10 * xtol)


def _dedupe(values: list[float], tol: float) -> list[float]:
    out: list[float] = []
    for v in values:
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def defect_transitions(p: m.DomainWallParams | m.ImpurityParams) -> dict[str, float]:
    """Bulk transition points of the defect models after symmetrization.

    The symmetrized domain wall is a Hermitian SSH junction with intracell
    ``tL``, ``tR`` and intercell ``t2``, so each bulk changes phase where its
    intracell amplitude equals ``t2``; the impurity chain changes phase at
    ``t = t'``.
    """
    if isinstance(p, m.DomainWallParams):
        return {"tL": abs(p.t2), "tR": abs(p.t2)}
    if isinstance(p, m.ImpurityParams):
        return {"t": abs(p.tprime)}
    raise m.ModelError("defect_transitions takes a domain-wall or impurity model")


# --------------------------------------------------------------------------
# Numeric oracles


def with_axis(model: m.ModelSpec, axis: str, value: float) -> m.ModelSpec:
    if axis not in model.__dataclass_fields__:
        raise m.ModelError(f"{m.family_name(model)} has no parameter {axis!r}")
    return replace(model, **{axis: value})


def obc_matrix(model: m.ModelSpec, cells: int | None) -> np.ndarray:
    if isinstance(model, m.ImpurityParams) and cells is not None:
        model = replace(model, cells=cells)
    if isinstance(model, m.DomainWallParams):
        return m.domain_wall(model)
    return m.build_obc(model, cells)


def gap_observable(model: m.ModelSpec, cells: int | None, skip_pairs: int = 1) -> float:
    """OBC gap with the ``skip_pairs`` lowest chiral pairs set aside."""
    w = sp.eigenvalues(obc_matrix(model, cells))
    return sp.bulk_gap(w, skip=2 * skip_pairs)


def _gap_at(args):
    model, axis, value, cells, skip_pairs = args
    return gap_observable(with_axis(model, axis, value), cells, skip_pairs)


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class NumericTransitions:
    values: list[float]
    grid: np.ndarray
    gap: np.ndarray
    threshold: float


def transitions_numeric(model: m.ModelSpec, axis: str, lo: float, hi: float,
                        cells: int | None = 100, samples: int = 81, skip_pairs: int = 1,
                        threshold: float | None = None, jobs: int = 1) -> NumericTransitions:
    """Gap-closing points found by diagonalizing the open chain along ``axis``.

    The observable is the OBC gap with the ``skip_pairs`` lowest pairs set
    aside, since protected end modes sit at zero throughout a topological
    phase and hide the bulk closing. Interior local minima whose gap is below
    ``threshold`` (default ten times the median step between grid points) are
    refined by golden-section search.
    """
    if cells is not None and cells < 40:
        raise m.ModelError(f"numeric transitions need cells >= 40, got {cells}")
    if not hi > lo or samples < 3:
        raise m.ModelError("need hi > lo and at least 3 samples")
    xs = np.linspace(lo, hi, samples)
    gaps = np.array(_map(_gap_at, [(model, axis, float(x), cells, skip_pairs) for x in xs], jobs))
    if threshold is None:
        threshold = 10 * float(np.median(np.abs(np.diff(gaps))))
    found = []
    for i in range(1, samples - 1):
        if gaps[i] <= gaps[i - 1] and gaps[i] < gaps[i + 1] and gaps[i] < threshold:
            res = minimize_scalar(
                lambda x: _gap_at((model, axis, float(np.clip(x, xs[i - 1], xs[i + 1])),
                                   cells, skip_pairs)),
                bracket=(xs[i - 1], xs[i], xs[i + 1]), method="golden",
                tol=1e-4)
            found.append(float(np.clip(res.x, xs[i - 1], xs[i + 1])))
    return NumericTransitions(values=found, grid=xs, gap=gaps, threshold=float(threshold))


def symmetrized_junction(p: m.DomainWallParams) -> np.ndarray:
    """The domain wall after :func:`transforms.domain_wall_transform`, Hermitian part only."""
    h = tf.apply_similarity(m.domain_wall(p), tf.domain_wall_transform(p))
    return 0.5 * (h + h.conj().T)


def chiral_zero_modes(h: np.ndarray, energy_tol: float) -> np.ndarray:
    """Sublattice-polarized basis of the near-zero subspace of a Hermitian chiral chain.

    Nearly degenerate zero modes hybridize into arbitrary mixtures; diagonalizing
    the sublattice operator inside the subspace separates them again.
    """
    w, v = np.linalg.eigh(h)
    sub = v[:, np.abs(w) < energy_tol]
    if sub.shape[1] == 0:
        return sub
    sign = np.where(np.arange(h.shape[0]) % 2 == 0, 1.0, -1.0)
    _, rot = np.linalg.eigh(sub.conj().T @ (sign[:, None] * sub))
    return sub @ rot


def interface_weights(p: m.DomainWallParams, window_cells: int | None = None,
                      energy_tol: float = 1e-3) -> np.ndarray:
    """Junction-window weight of each near-zero mode of the symmetrized junction.

    The junction sits between cells ``nL`` and ``nL + 1``. By default the
    window is the inner half of each bulk, i.e. the sites closer to the
    junction than to either end of the chain.
    """
    modes = chiral_zero_modes(symmetrized_junction(p), energy_tol)
    left = p.nL // 2 if window_cells is None else window_cells
    right = p.nR // 2 if window_cells is None else window_cells
    mid = 2 * p.nL
    return sp.window_weight(modes, mid - 2 * left, mid + 2 * right) if modes.shape[1] else np.zeros(0)


def interface_modes(p: m.DomainWallParams, window_cells: int | None = None,
                    energy_tol: float = 1e-3, weight: float = 0.8) -> int:
    """Number of near-zero modes with more than ``weight`` inside the junction window."""
    return int(np.sum(interface_weights(p, window_cells, energy_tol) > weight))


# --------------------------------------------------------------------------
# Sweeps


OBSERVABLES = ("gap", "bulk_gap", "zero_modes", "nu_q", "nu_e", "skin_fraction")


@dataclass(frozen=True)
class PhaseDiagram:
    axis: str
    values: np.ndarray
    observables: tuple[str, ...]
    rows: list[dict]
    transitions: list[float] = field(default_factory=list)


def _winding_params(model: m.ModelSpec) -> m.NhsshParams:
    if isinstance(model, m.NhsshParams):
        return model
    if isinstance(model, m.ImpurityParams):
        if model.v != 0:
            raise m.ModelError("the impurity breaks translation symmetry; windings need v = 0")
        return m.impurity_as_nhssh(model)
    raise m.ModelError(f"no winding number defined for the {m.family_name(model)} family")


def evaluate_point(model: m.ModelSpec, observables, cells: int | None,
                   zero_tol: float | None = None, grid: int = DEFAULT_GRID,
                   edge_cells: int = 10) -> dict:
    """All requested observables at one parameter point; failures become ``error``."""
    row: dict = {}
    try:
        need_vectors = "skin_fraction" in observables
        need_matrix = need_vectors or {"gap", "bulk_gap", "zero_modes"} & set(observables)
        if need_matrix:
            h = obc_matrix(model, cells)
            s = sp.eigendecompose(h, want_vectors=need_vectors)
            if "gap" in observables:
                row["gap"] = sp.spectral_gap(s)
            if "bulk_gap" in observables:
                row["bulk_gap"] = sp.bulk_gap(s)
            if "zero_modes" in observables:
                tol = zero_tol if zero_tol is not None else sp.default_zero_tol(h)
                row["zero_modes"] = sp.zero_modes(s, tol).count
            if need_vectors:
                rep = sp.localization(s, edge_cells=edge_cells).skin_summary
                row["skin_fraction"] = max(rep.fraction_left, rep.fraction_right)
        if "nu_q" in observables or "nu_e" in observables:
            w = winding_numbers(_winding_params(model), grid)
            if "nu_q" in observables:
                row["nu_q"] = w.nu_q
            if "nu_e" in observables:
                row["nu_e"] = w.nu_e
    except (ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _point(args):
    return evaluate_point(*args)


def _steps(values: np.ndarray, column: list) -> list[float]:
    """Midpoints between consecutive available entries that differ; missing cells are bridged."""
    out = []
    prev = None
    for i, v in enumerate(column):
        if v is None:
            continue
        if prev is not None and column[prev] != v:
            out.append(float(0.5 * (values[prev] + values[i])))
        prev = i
    return out


def sweep(model: m.ModelSpec, axis: str, values, observables=("gap", "zero_modes", "nu_q"),
          cells: int | None = 100, zero_tol: float | None = None, grid: int = DEFAULT_GRID,
          edge_cells: int = 10, jobs: int = 1) -> PhaseDiagram:
    """Tabulate observables along one parameter axis.

    Rows come back in grid order whatever ``jobs`` is. Detected transitions
    are the midpoints where the ``nu_q`` column (or, without it, the
    ``zero_modes`` column) changes value.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise m.ModelError("sweep axis is empty")
    if values.size > 1 and np.any(np.diff(values) <= 0):
        raise m.ModelError("sweep grid must be strictly increasing")
    observables = tuple(observables)
    bad = [o for o in observables if o not in OBSERVABLES]
    if bad:
        raise m.ModelError(f"unknown observables {bad}; choose from {list(OBSERVABLES)}")
    with_axis(model, axis, float(values[0]))  # validate the axis name up front
    items = [(with_axis(model, axis, float(v)), observables, cells, zero_tol, grid, edge_cells)
             for v in values]
    rows = _map(_point, items, jobs)
    key = "nu_q" if "nu_q" in observables else ("zero_modes" if "zero_modes" in observables else None)
    transitions = _steps(values, [r.get(key) for r in rows]) if key else []
    return PhaseDiagram(axis=axis, values=values, observables=observables, rows=rows,
                        transitions=transitions)
