"""Diagonal similarity transforms and partner Hamiltonians.

A transform is stored as its diagonal only; ``apply_similarity`` scales
entries as ``H[i, j] * d[j] / d[i]`` and never forms an inverse. Long chains
push the diagonal across many decades, so each transform carries a
conditioning warning once ``max(d) / min(d)`` exceeds ``CONDITION_LIMIT``.

Gauge sign convention: ``t1 +- gamma/2 = tbar1 * exp(+-phi)`` and
``r1 = exp(-phi)``. The symmetrizing transforms below are written in terms of
that ``phi``; with ``H[i, j]`` the coefficient of ``c_i^dagger c_j`` they need
ratios ``exp(-phi)`` from an a-site to the following b-site.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .models import (
    DomainWallParams,
    ExtParams,
    ImpurityParams,
    ModelError,
    NhsshParams,
    SocParams,
    Topology,
)

CONDITION_LIMIT = 1e12


class BrokenRegimeError(ValueError):
    """|t1| <= |gamma|/2: the gauge exponent is not real."""


class NotBlockDecomposableError(ArithmeticError):
    pass


class TransformLabel(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    DOMAIN_WALL = "DomainWall"
    IMPURITY = "Impurity"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class GaugeData:
    tbar1: float
    phi: float
    r1: float
    r2: float
    sign: int = 1  # sign of t1; the symmetrized intracell bond is sign * tbar1


@dataclass(frozen=True)
class DiagonalTransform:
    diag: np.ndarray
    label: TransformLabel = TransformLabel.CUSTOM
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        d = np.asarray(self.diag, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ModelError("transform diagonal must be a non-empty vector")
        if not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ModelError("transform diagonal must be finite and strictly positive")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "label", TransformLabel(self.label))
        cond = self.condition
        if cond > CONDITION_LIMIT and not self.warnings:
            object.__setattr__(self, "warnings", (
                f"{self.label.value} transform spans a ratio of {cond:.3g}; "
                "entries of the transformed matrix may lose relative accuracy",))

    @property
    def dim(self) -> int:
        return self.diag.size

    @property
    def condition(self) -> float:
        return float(self.diag.max() / self.diag.min())

    def inverse(self) -> "DiagonalTransform":
        return DiagonalTransform(1.0 / self.diag, self.label)

    def __matmul__(self, other: "DiagonalTransform") -> "DiagonalTransform":
        if other.dim != self.dim:
            raise ModelError(f"cannot compose transforms of size {self.dim} and {other.dim}")
        return DiagonalTransform(self.diag * other.diag, TransformLabel.CUSTOM)

    @classmethod
    def from_log(cls, logd, label=TransformLabel.CUSTOM) -> "DiagonalTransform":
        """Build from log-diagonal, shifted so the largest entry is 1."""
        logd = np.asarray(logd, dtype=float)
        d = np.exp(logd - logd.max())
        t = cls(d, label)
        span = float(logd.max() - logd.min())
        if span > math.log(CONDITION_LIMIT) and not t.warnings:
            object.__setattr__(t, "warnings", (
                f"{t.label.value} transform spans a ratio of e^{span:.1f}; "
                "entries of the transformed matrix may lose relative accuracy",))
        return t


def gauge_params(t1: float, gamma: float) -> GaugeData:
    if abs(t1) <= abs(gamma) / 2:
        raise BrokenRegimeError(
            f"broken regime: |t1| = {abs(t1):g} <= |gamma|/2 = {abs(gamma) / 2:g}; "
            "the gauge exponent is complex and only numeric diagnostics are available")
    tbar1 = math.sqrt(abs(t1 * t1 - gamma * gamma / 4))
    phi = 0.5 * math.log((t1 + gamma / 2) / (t1 - gamma / 2))
    return GaugeData(tbar1=tbar1, phi=phi, r1=math.exp(-phi), r2=math.exp(2 * phi),
                     sign=1 if t1 > 0 else -1)


def _cells(cells: int) -> int:
    if int(cells) != cells or cells < 1:
        raise ModelError(f"need cells >= 1, got {cells!r}")
    return int(cells)


def _s1_log(cells: int, log_r: float) -> np.ndarray:
    n = np.arange(cells)
    out = np.empty(2 * cells)
    out[0::2] = n * log_r          # a_n -> r^(n-1)
    out[1::2] = (n + 1) * log_r    # b_n -> r^n
    return out


def _s2_log(cells: int, log_r: float) -> np.ndarray:
    return np.repeat((np.arange(cells) + 1) * log_r, 2)


def s1_transform(cells: int, r1: float) -> DiagonalTransform:
    """Diagonal ``{1, r, r, r^2, r^2, ..., r^(N-1), r^(N-1), r^N}``."""
    cells = _cells(cells)
    if not r1 > 0:
        raise ModelError(f"r1 must be positive, got {r1!r}")
    return DiagonalTransform(np.exp(_s1_log(cells, math.log(r1))), TransformLabel.S1)


def s2_transform(cells: int, r2: float) -> DiagonalTransform:
    """Diagonal ``{r, r, r^2, r^2, ..., r^N, r^N}``."""
    cells = _cells(cells)
    if not r2 > 0:
        raise ModelError(f"r2 must be positive, got {r2!r}")
    return DiagonalTransform(np.exp(_s2_log(cells, math.log(r2))), TransformLabel.S2)


def s3_transform(cells: int, phi: float) -> DiagonalTransform:
    """``S1 * S2`` with ``r1 = r2 = exp(-phi)``.

    Applied to :func:`~nhpartner.models.obc_nhssh` with the gauge exponent of
    :func:`gauge_params` this gives symmetric intracell bonds ``tbar1`` and
    the real-space partner chain of :func:`obc_partner`.
    """
    cells = _cells(cells)
    return DiagonalTransform(np.exp(_s1_log(cells, -phi) + _s2_log(cells, -phi)),
                             TransformLabel.S3)


def apply_similarity(h: np.ndarray, s: DiagonalTransform) -> np.ndarray:
    """Return ``S^-1 H S``."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ModelError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] != s.dim:
        raise ModelError(f"transform of size {s.dim} does not match matrix of size {h.shape[0]}")
    d = s.diag
    return h * (d[np.newaxis, :] / d[:, np.newaxis])


# --------------------------------------------------------------------------
# Partner model


def partner_entries(g: GaugeData, p: NhsshParams, ktilde) -> tuple[np.ndarray, np.ndarray]:
    """Off-diagonals ``(h+ e^{i theta+}, h- e^{i theta-})`` of the partner, vectorized in k."""
    ek = np.exp(1j * np.asarray(ktilde, dtype=float))
    tb = g.sign * g.tbar1
    ep, em = math.exp(g.phi), math.exp(-g.phi)
    upper = tb + p.t2 * em / ek + p.t3 * ep**3 * ek
    lower = tb + p.t2 * ep * ek + p.t3 * em**3 / ek
    return upper, lower


def partner_bloch(g: GaugeData, p: NhsshParams, ktilde: float) -> np.ndarray:
    upper, lower = partner_entries(g, p, ktilde)
    return np.array([[0, upper], [lower, 0]], dtype=complex)


def obc_partner(g: GaugeData, p: NhsshParams, cells: int) -> np.ndarray:
    """Open chain carrying the partner amplitudes.

    Bonds are placed as hoppings from column to row, so the chain's Bloch
    matrix is ``partner_bloch(-k).T``: same spectrum and gap closings as the
    partner, and exactly ``S3^-1 H S3`` for the original chain.
    """
    cells = _cells(cells)
    tb = g.sign * g.tbar1
    ep, em = math.exp(g.phi), math.exp(-g.phi)
    h = np.zeros((2 * cells, 2 * cells), dtype=complex)
    a = 2 * np.arange(cells)
    h[a, a + 1] = tb
    h[a + 1, a] = tb
    cur = np.arange(cells - 1)
    nxt = cur + 1
    h[2 * nxt, 2 * cur + 1] = p.t2 * ep
    h[2 * cur + 1, 2 * nxt] = p.t2 * em
    h[2 * cur, 2 * nxt + 1] = p.t3 * em**3
    h[2 * nxt + 1, 2 * cur] = p.t3 * ep**3
    return h


# --------------------------------------------------------------------------
# Spin-orbit model


def soc_gauge(p: SocParams) -> GaugeData:
    """Gauge data for ``t -+ delta = tbar e^{-+phi}`` (note: t - delta sits on a^dagger b)."""
    return gauge_params(p.t, 2 * p.delta)


def s4_transform(cells: int | None, phi: float, ratio: float | None = None) -> DiagonalTransform:
    """S4 in Bloch form (``cells=None``) or real-space form.

    Bloch form: ``diag(r, 1, r, 1)`` on ``(a_up, b_up, a_dn, b_dn)``.
    Real-space form: the S1 pattern with ratio ``r`` in each spin sector of the
    spin-major chain. The default ``r = e^{2 phi} = (t + delta)/(t - delta)`` is
    the transposed-convention image of ``(t - delta)/(t + delta)``: it swaps the
    intracell amplitudes ``t -+ delta``. ``ratio`` overrides it.
    """
    r = math.exp(2 * phi) if ratio is None else abs(ratio)
    if cells is None:
        return DiagonalTransform(np.array([r, 1.0, r, 1.0]), TransformLabel.S4)
    cells = _cells(cells)
    sector = _s1_log(cells, math.log(r))
    return DiagonalTransform(np.exp(np.concatenate([sector, sector])), TransformLabel.S4)


SOC_BLOCK_UNITARY = np.array([
    [0, 1, 0, 1],
    [1, 0, 1, 0],
    [0, 1, 0, -1],
    [1, 0, -1, 0],
], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class SocBlocks:
    up: np.ndarray
    down: np.ndarray
    residual: float


def soc_block_decompose(h: np.ndarray, tol: float = 1e-10) -> SocBlocks:
    """Split a 4x4 SOC partner matrix into its spin blocks via ``U^dagger h U``."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ModelError(f"expected a 4x4 matrix, got {h.shape}")
    u = SOC_BLOCK_UNITARY
    rotated = u.conj().T @ h @ u
    off = np.concatenate([rotated[:2, 2:].ravel(), rotated[2:, :2].ravel()])
    residual = float(np.max(np.abs(off)))
    scale = max(1.0, float(np.max(np.abs(h))))
    if residual > tol * scale:
        raise NotBlockDecomposableError(
            f"off-block residual {residual:.3e} exceeds {tol:g}; matrix lacks the partner sparsity")
    return SocBlocks(up=rotated[:2, :2].copy(), down=rotated[2:, 2:].copy(), residual=residual)


# --------------------------------------------------------------------------
# Defects


def domain_wall_transform(p: DomainWallParams) -> DiagonalTransform:
    """Product of a mirror part (rises through the left bulk, falls through
    the right, ratio ``e^{(phiR - phiL)/2}`` per cell) and a monotone part
    (ratio ``e^{-(phiL + phiR)/2}`` per cell).

    On a chain the result is Hermitian with intracell ``tL``, ``tR``. On a ring
    the closing bond keeps the net imaginary flux, so the output is not
    Hermitian unless ``nL phiL + nR phiR == 0``.
    """
    half_diff = (p.phiR - p.phiL) / 2
    mean = (p.phiL + p.phiR) / 2
    cells = p.cells
    # per-cell increment of the mirror part: +half_diff in the left bulk, -half_diff in the right
    step = np.where(np.arange(cells) < p.nL, half_diff, -half_diff)
    cum = np.concatenate([[0.0], np.cumsum(step)])
    mirror = np.empty(2 * cells)
    mirror[0::2] = cum[:-1]
    mirror[1::2] = cum[1:]
    monotone = _s1_log(cells, -mean)
    return DiagonalTransform.from_log(mirror + monotone, TransformLabel.DOMAIN_WALL)


def domain_wall_parts(p: DomainWallParams) -> tuple[DiagonalTransform, DiagonalTransform]:
    """The (mirror, monotone) factors of :func:`domain_wall_transform`."""
    half_diff = (p.phiR - p.phiL) / 2
    step = np.where(np.arange(p.cells) < p.nL, half_diff, -half_diff)
    cum = np.concatenate([[0.0], np.cumsum(step)])
    mirror = np.empty(2 * p.cells)
    mirror[0::2] = cum[:-1]
    mirror[1::2] = cum[1:]
    return (DiagonalTransform.from_log(mirror, TransformLabel.S1),
            DiagonalTransform.from_log(_s1_log(p.cells, -(p.phiL + p.phiR) / 2), TransformLabel.S2))


def impurity_transform(p: ImpurityParams) -> DiagonalTransform:
    """S1 pattern with ratio ``e^{-phi}``; the impurity sits on the diagonal and is untouched."""
    return DiagonalTransform.from_log(_s1_log(p.cells, -p.phi), TransformLabel.IMPURITY)


def hermiticity_residual(h: np.ndarray) -> float:
    """``max |H - H^dagger|`` relative to ``max(1, max |H|)``."""
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T)) / max(1.0, float(np.max(np.abs(h)))))


def nhssh_transform(label: str, p: NhsshParams, cells: int) -> DiagonalTransform:
    """Named transform for the plain chain: ``s1``, ``s2``, ``s3`` or ``s1s2``."""
    g = gauge_params(p.t1, p.gamma)
    label = label.lower()
    if label == "s1":
        return s1_transform(cells, g.r1)
    if label == "s2":
        return s2_transform(cells, g.r2)
    if label == "s1s2":
        t = DiagonalTransform(s1_transform(cells, g.r1).diag * s2_transform(cells, g.r2).diag)
        return t
    if label == "s3":
        return s3_transform(cells, g.phi)
    raise ModelError(f"unknown transform {label!r}")


def _topology_is_chain(p: DomainWallParams) -> bool:
    return p.topology is Topology.CHAIN


def extended_from_nhssh(p: NhsshParams) -> ExtParams:
    """Extended-chain parameters of the ``S1 S2`` image of ``p``.

    After ``s1s2`` the intracell bond is the symmetric ``tbar1`` and the t3 bond
    is reciprocal; relabelling (b_n, a_{n+1}) as one extended cell gives
    ``t -+ delta = t2 r2^{+-1}``, ``tprime = tbar1`` and ``Delta = t3``.
    """
    g = gauge_params(p.t1, p.gamma)
    return ExtParams(t=p.t2 * math.cosh(2 * g.phi), delta=-p.t2 * math.sinh(2 * g.phi),
                     tprime=g.sign * g.tbar1, Delta=p.t3)


def relabel_to_extended(h: np.ndarray) -> np.ndarray:
    """Drop the dangling a_1 and b_N sites of a 2N-site chain: an (N-1)-cell block."""
    h = np.asarray(h)
    return h[1:-1, 1:-1]
