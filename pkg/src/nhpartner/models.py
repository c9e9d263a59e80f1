"""Bloch and real-space Hamiltonians for the non-Hermitian SSH families.

Conventions used throughout the package:

* ``H[i, j]`` is the coefficient of ``c_i^dagger c_j``.
* Sites are ordered ``(a1, b1, a2, b2, ...)``; the SOC chain is spin-major,
  ``(a1u, b1u, ..., aNu, bNu, a1d, b1d, ..., aNd, bNd)``.
* Fourier convention ``c_j = N^{-1/2} sum_k e^{ikj} c_k``, so a bond
  ``a_{j+1}^dagger b_j`` contributes ``e^{-ik}`` to the ``(a, b)`` Bloch entry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np


class ModelError(ValueError):
    """Invalid model parameters or lattice size."""


class SocKind(str, enum.Enum):
    DRESSELHAUS = "dresselhaus"
    RASHBA = "rashba"


class Topology(str, enum.Enum):
    CHAIN = "chain"
    RING = "ring"


def _check_finite(**values: complex) -> None:
    for name, val in values.items():
        if not np.isfinite(val):
            raise ModelError(f"{name} must be finite, got {val!r}")


@dataclass(frozen=True)
class NhsshParams:
    """Non-Hermitian SSH chain with intracell ``t1 +- gamma/2``."""

    t1: float
    t2: float
    t3: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        _check_finite(t1=self.t1, t2=self.t2, t3=self.t3, gamma=self.gamma)


@dataclass(frozen=True)
class ExtParams:
    """Extended SSH chain: intracell ``t -+ delta``, intercell ``tprime``, third-neighbour ``Delta``."""

    t: float
    delta: float = 0.0
    tprime: float = 0.0
    Delta: float = 0.0

    def __post_init__(self) -> None:
        _check_finite(t=self.t, delta=self.delta, tprime=self.tprime, Delta=self.Delta)


@dataclass(frozen=True)
class SocParams:
    """Spin-orbit coupled non-Hermitian SSH chain.

    ``lam`` and ``lamprime`` are the real magnitudes; Rashba coupling makes the
    physical amplitudes ``1j * lam`` and ``1j * lamprime``.
    """

    t: float
    delta: float = 0.0
    tprime: float = 0.0
    lam: float = 0.0
    lamprime: float = 0.0
    soc_kind: SocKind = SocKind.DRESSELHAUS

    def __post_init__(self) -> None:
        _check_finite(t=self.t, delta=self.delta, tprime=self.tprime, lam=self.lam,
                      lamprime=self.lamprime)
        object.__setattr__(self, "soc_kind", SocKind(self.soc_kind))

    @property
    def couplings(self) -> tuple[complex, complex]:
        """Physical (lambda, lambda') amplitudes."""
        if self.soc_kind is SocKind.RASHBA:
            return 1j * self.lam, 1j * self.lamprime
        return complex(self.lam), complex(self.lamprime)


@dataclass(frozen=True)
class DomainWallParams:
    """Two non-Hermitian SSH bulks sharing the intercell hopping ``t2``."""

    tL: float
    tR: float
    t2: float
    phiL: float = 0.0
    phiR: float = 0.0
    nL: int = 40
    nR: int = 40
    topology: Topology = Topology.CHAIN

    def __post_init__(self) -> None:
        _check_finite(tL=self.tL, tR=self.tR, t2=self.t2, phiL=self.phiL, phiR=self.phiR)
        if int(self.nL) < 1 or int(self.nR) < 1:
            raise ModelError("nL and nR must be >= 1")
        object.__setattr__(self, "nL", int(self.nL))
        object.__setattr__(self, "nR", int(self.nR))
        object.__setattr__(self, "topology", Topology(self.topology))

    @property
    def cells(self) -> int:
        return self.nL + self.nR


@dataclass(frozen=True)
class ImpurityParams:
    """Non-Hermitian SSH chain (intracell ``t e^{+-phi}``) with one on-site impurity."""

    t: float
    tprime: float
    phi: float = 0.0
    v: float = 0.0
    cells: int = 100
    site: int | None = None  # 1-based cell of the impurity a-site; None -> ceil(cells/2)

    def __post_init__(self) -> None:
        _check_finite(t=self.t, tprime=self.tprime, phi=self.phi, v=self.v)
        if int(self.cells) < 2:
            raise ModelError("impurity chain needs cells >= 2")
        object.__setattr__(self, "cells", int(self.cells))
        if self.site is not None and not 1 <= int(self.site) <= self.cells:
            raise ModelError(f"impurity cell {self.site} outside 1..{self.cells}")

    @property
    def impurity_index(self) -> int:
        """0-based matrix index of the impurity a-site."""
        cell = self.site if self.site is not None else math.ceil(self.cells / 2)
        return 2 * (int(cell) - 1)


ModelSpec = Union[NhsshParams, ExtParams, SocParams, DomainWallParams, ImpurityParams]


def _require_cells(cells: int, minimum: int) -> int:
    if int(cells) != cells or cells < minimum:
        raise ModelError(f"need an integer cell count >= {minimum}, got {cells!r}")
    return int(cells)


# --------------------------------------------------------------------------
# Non-Hermitian SSH


def bloch_nhssh(p: NhsshParams, k: float) -> np.ndarray:
    ek = np.exp(1j * k)
    h = np.zeros((2, 2), dtype=complex)
    h[0, 1] = p.t1 + p.gamma / 2 + p.t2 / ek + p.t3 * ek
    h[1, 0] = p.t1 - p.gamma / 2 + p.t2 * ek + p.t3 / ek
    return h


def _nhssh_chain(intra_ab, intra_ba, t2: float, t3: float, cells: int, ring: bool) -> np.ndarray:
    """Chain with per-cell intracell amplitudes and uniform t2, t3 bonds."""
    dim = 2 * cells
    h = np.zeros((dim, dim), dtype=complex)
    a = np.arange(cells) * 2
    b = a + 1
    h[a, b] = intra_ab
    h[b, a] = intra_ba
    # t2: a_{j+1} <-> b_j ; t3: a_j <-> b_{j+1}
    nxt = np.arange(1, cells) if not ring else (np.arange(cells) + 1) % cells
    cur = np.arange(len(nxt))
    h[2 * nxt, 2 * cur + 1] += t2
    h[2 * cur + 1, 2 * nxt] += t2
    h[2 * cur, 2 * nxt + 1] += t3
    h[2 * nxt + 1, 2 * cur] += t3
    return h


def obc_nhssh(p: NhsshParams, cells: int) -> np.ndarray:
    cells = _require_cells(cells, 1)
    return _nhssh_chain(p.t1 + p.gamma / 2, p.t1 - p.gamma / 2, p.t2, p.t3, cells, ring=False)


def pbc_nhssh(p: NhsshParams, cells: int) -> np.ndarray:
    cells = _require_cells(cells, 3)
    return _nhssh_chain(p.t1 + p.gamma / 2, p.t1 - p.gamma / 2, p.t2, p.t3, cells, ring=True)


# --------------------------------------------------------------------------
# Extended model


def bloch_extended(p: ExtParams, k: float, literal: bool = True) -> np.ndarray:
    """Bloch matrix of the extended model.

    With ``literal=True`` the intercell term carries ``e^{ik}`` in both
    off-diagonal entries, exactly as the model is usually quoted. That form
    is not the Fourier transform of any real-space chain; ``literal=False``
    returns the form that :func:`pbc_extended` reproduces, with ``e^{-ik}`` in
    the upper entry.
    """
    ek = np.exp(1j * k)
    h = np.zeros((2, 2), dtype=complex)
    upper_t = p.tprime * ek if literal else p.tprime / ek
    h[0, 1] = p.t - p.delta + upper_t + p.Delta / ek**2
    h[1, 0] = p.t + p.delta + p.tprime * ek + p.Delta * ek**2
    return h


def _extended_chain(p: ExtParams, cells: int, ring: bool) -> np.ndarray:
    dim = 2 * cells
    h = np.zeros((dim, dim), dtype=complex)
    c = np.arange(cells) * 2
    d = c + 1
    h[c, d] = p.t - p.delta
    h[d, c] = p.t + p.delta
    if ring:
        j1 = np.arange(cells)
        j2 = np.arange(cells)
    else:
        j1 = np.arange(cells - 1)
        j2 = np.arange(cells - 2) if cells > 2 else np.arange(0)
    # t': c_{j+1} <-> d_j ; Delta: c_{j+2} <-> d_j
    h[2 * ((j1 + 1) % cells), 2 * j1 + 1] += p.tprime
    h[2 * j1 + 1, 2 * ((j1 + 1) % cells)] += p.tprime
    h[2 * ((j2 + 2) % cells), 2 * j2 + 1] += p.Delta
    h[2 * j2 + 1, 2 * ((j2 + 2) % cells)] += p.Delta
    return h


def obc_extended(p: ExtParams, cells: int) -> np.ndarray:
    """Open extended chain, sites ``(c1, d1, c2, d2, ...)``."""
    cells = _require_cells(cells, 1)
    return _extended_chain(p, cells, ring=False)


def pbc_extended(p: ExtParams, cells: int) -> np.ndarray:
    cells = _require_cells(cells, 5)
    return _extended_chain(p, cells, ring=True)


# --------------------------------------------------------------------------
# Spin-orbit coupled model


def bloch_soc(p: SocParams, k: float) -> np.ndarray:
    """4x4 Bloch matrix in the basis ``(a_up, b_up, a_dn, b_dn)``."""
    lam, lamp = p.couplings
    emk = np.exp(-1j * k)
    zeta = p.t + p.tprime * emk
    vs = lam - lamp * emk
    # conjugates taken at real k: zeta* = t + t' e^{ik}, vs* = lam* - lam'* e^{ik}
    zeta_c = p.t + p.tprime / emk
    vs_c = np.conj(lam) - np.conj(lamp) / emk
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1] = h[2, 3] = zeta - p.delta
    h[1, 0] = h[3, 2] = zeta_c + p.delta
    h[0, 3] = h[2, 1] = vs
    h[1, 2] = h[3, 0] = vs_c
    return h


def _soc_chain(p: SocParams, cells: int, ring: bool) -> np.ndarray:
    lam, lamp = p.couplings
    n2 = 2 * cells
    h = np.zeros((2 * n2, 2 * n2), dtype=complex)
    spins = (0, n2)
    cur = np.arange(cells) if ring else np.arange(cells - 1)
    nxt = (cur + 1) % cells
    for s in spins:
        a = s + 2 * np.arange(cells)
        h[a, a + 1] = p.t - p.delta
        h[a + 1, a] = p.t + p.delta
        h[s + 2 * nxt, s + 2 * cur + 1] += p.tprime
        h[s + 2 * cur + 1, s + 2 * nxt] += p.tprime
    for s, sbar in ((0, n2), (n2, 0)):
        a = s + 2 * np.arange(cells)
        b_flip = sbar + 2 * np.arange(cells) + 1
        h[a, b_flip] += lam
        h[b_flip, a] += np.conj(lam)
        # -lam' a_{n,s}^dagger b_{n-1,-s} + h.c.
        h[s + 2 * nxt, sbar + 2 * cur + 1] += -lamp
        h[sbar + 2 * cur + 1, s + 2 * nxt] += -np.conj(lamp)
    return h


def obc_soc(p: SocParams, cells: int) -> np.ndarray:
    cells = _require_cells(cells, 1)
    return _soc_chain(p, cells, ring=False)


def pbc_soc(p: SocParams, cells: int) -> np.ndarray:
    cells = _require_cells(cells, 3)
    return _soc_chain(p, cells, ring=True)


def soc_bloch_basis(cells: int, k_index: int) -> np.ndarray:
    """Columns are the plane waves of ``(a_up, b_up, a_dn, b_dn)`` at ``k = 2 pi m / cells``."""
    n2 = 2 * cells
    k = 2 * np.pi * k_index / cells
    phase = np.exp(1j * k * np.arange(cells)) / np.sqrt(cells)
    u = np.zeros((2 * n2, 4), dtype=complex)
    for col, (spin, sub) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        u[spin * n2 + sub + 2 * np.arange(cells), col] = phase
    return u


# --------------------------------------------------------------------------
# Defect configurations


def domain_wall(p: DomainWallParams) -> np.ndarray:
    cells = p.cells
    t = np.where(np.arange(cells) < p.nL, p.tL, p.tR)
    phi = np.where(np.arange(cells) < p.nL, p.phiL, p.phiR)
    ring = p.topology is Topology.RING
    if ring and cells < 3:
        raise ModelError("a ring domain wall needs nL + nR >= 3")
    return _nhssh_chain(t * np.exp(phi), t * np.exp(-phi), p.t2, 0.0, cells, ring=ring)


def impurity_chain(p: ImpurityParams) -> np.ndarray:
    h = _nhssh_chain(p.t * np.exp(p.phi), p.t * np.exp(-p.phi), p.tprime, 0.0, p.cells, ring=False)
    h[p.impurity_index, p.impurity_index] = p.v
    return h


def impurity_as_nhssh(p: ImpurityParams) -> NhsshParams:
    """The impurity-free chain written in (t1, gamma) form."""
    return NhsshParams(t1=p.t * math.cosh(p.phi), t2=p.tprime, t3=0.0,
                       gamma=2 * p.t * math.sinh(p.phi))


# --------------------------------------------------------------------------
# Dispatch


FAMILIES = {
    "nhssh": NhsshParams,
    "extended": ExtParams,
    "soc": SocParams,
    "domain-wall": DomainWallParams,
    "impurity": ImpurityParams,
}


def family_name(model: ModelSpec) -> str:
    for name, cls in FAMILIES.items():
        if isinstance(model, cls):
            return name
    raise ModelError(f"unknown model type {type(model).__name__}")


def build_obc(model: ModelSpec, cells: int | None = None) -> np.ndarray:
    """Open-boundary matrix for any family; defect models carry their own size."""
    if isinstance(model, NhsshParams):
        return obc_nhssh(model, cells)
    if isinstance(model, ExtParams):
        return obc_extended(model, cells)
    if isinstance(model, SocParams):
        return obc_soc(model, cells)
    if isinstance(model, DomainWallParams):
        return domain_wall(model)
    if isinstance(model, ImpurityParams):
        return impurity_chain(model)
    raise ModelError(f"unknown model type {type(model).__name__}")


def build_pbc(model: ModelSpec, cells: int | None = None) -> np.ndarray:
    if isinstance(model, NhsshParams):
        return pbc_nhssh(model, cells)
    if isinstance(model, ExtParams):
        return pbc_extended(model, cells)
    if isinstance(model, SocParams):
        return pbc_soc(model, cells)
    if isinstance(model, DomainWallParams):
        from dataclasses import replace
        return domain_wall(replace(model, topology=Topology.RING))
    raise ModelError(f"{family_name(model)} has no periodic form")


def bloch(model: ModelSpec, k: float) -> np.ndarray:
    if isinstance(model, NhsshParams):
        return bloch_nhssh(model, k)
    if isinstance(model, ExtParams):
        return bloch_extended(model, k, literal=False)
    if isinstance(model, SocParams):
        return bloch_soc(model, k)
    raise ModelError(f"{family_name(model)} has no Bloch form")


def is_hermitian_limit(model: ModelSpec) -> bool:
    """True when every non-Hermitian parameter of the model vanishes."""
    if isinstance(model, NhsshParams):
        return model.gamma == 0
    if isinstance(model, ExtParams):
        return model.delta == 0
    if isinstance(model, SocParams):
        return model.delta == 0
    if isinstance(model, DomainWallParams):
        return model.phiL == 0 and model.phiR == 0
    if isinstance(model, ImpurityParams):
        return model.phi == 0
    raise ModelError(f"unknown model type {type(model).__name__}")
