"""Closed-form companion to the ring and droplet phenomenology.

Single-domain-wall physics on odd antiferromagnetic rings: the wall lives on a
bond, carries a sign (up-up or down-down pair), hops under the transverse field
and drifts under the longitudinal one. The two-band dispersion, its group
velocity, and the kink-antikink pair-creation cost are all exact in the
single-wall subspace. For high-coordination graphs, classical droplet
energetics give the critical nucleus and activation barrier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "WallModel",
    "DropletParams",
    "GroupVelocity",
    "exchange_energy",
    "bands",
    "band_energies",
    "group_velocity",
    "pair_creation_energy",
    "droplet",
    "critical_droplet",
]


@dataclass(frozen=True)
class WallModel:
    """Parameters of the one-wall effective model on an odd ring."""

    n: int
    J: float
    h: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"wall model needs odd n >= 3, got {self.n}")
        if self.J <= 0:
            raise ValueError("J must be positive (antiferromagnetic)")

    def momenta(self) -> np.ndarray:
        """Bloch set {2*pi*m/n} of the finite ring."""
        return 2.0 * np.pi * np.arange(self.n) / self.n


def exchange_energy(n: int, J: float) -> float:
    """Exchange energy of any one-wall state: one ferromagnetic bond out of n.

    Position independent, equal to -J*(n - 2). Odd n only (even rings have a
    wall-free ground state and no single-wall sector).
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"single-wall sector requires odd n >= 3, got {n}")
    return -J * (n - 2)


def bands(model: WallModel, m: int) -> tuple[float, float]:
    """Band energies (E_plus, E_minus) at k = 2*pi*m/n.

    E_pm(k) = E_J +- sqrt(h^2 + 4*Gamma^2*cos^2(k)), including the exchange
    offset E_J = -J(n-2).
    """
    if not 0 <= m < model.n:
        raise ValueError(f"mode index must be in [0, {model.n}), got {m}")
    k = 2.0 * np.pi * m / model.n
    e_j = exchange_energy(model.n, model.J)
    gap = math.sqrt(model.h**2 + 4.0 * model.gamma**2 * math.cos(k) ** 2)
    return e_j + gap, e_j - gap


def band_energies(model: WallModel) -> np.ndarray:
    """All 2n band energies over the Bloch set, sorted ascending."""
    k = model.momenta()
    e_j = exchange_energy(model.n, model.J)
    gap = np.sqrt(model.h**2 + 4.0 * model.gamma**2 * np.cos(k) ** 2)
    return np.sort(np.concatenate([e_j + gap, e_j - gap]))


class GroupVelocity(NamedTuple):
    v_plus: float
    v_minus: float
    degenerate: bool


def group_velocity(model: WallModel, k: float) -> GroupVelocity:
    """Band slopes dE_pm/dk at momentum k.

    v_pm(k) = -+ 2*Gamma^2*sin(2k) / sqrt(h^2 + 4*Gamma^2*cos^2(k)). Where the
    two bands touch (h = 0 and cos k = 0) the slope is undefined and the result
    is flagged degenerate with NaN velocities instead of a number.
    """
    gap = math.sqrt(model.h**2 + 4.0 * model.gamma**2 * math.cos(k) ** 2)
    if gap == 0.0:
        return GroupVelocity(math.nan, math.nan, True)
    v = -2.0 * model.gamma**2 * math.sin(2.0 * k) / gap
    return GroupVelocity(v, -v, False)


def pair_creation_energy(J: float, h: float, delta_m: float = 1.0) -> float:
    """Cost of nucleating a kink-antikink pair by one spin flip in a Neel region.

    4J - 2h*delta_m, with delta_m = +-1 the half-change of total magnetization
    carried by the flip. Drops to zero near |h| ~ 2J, the nucleation threshold.
    """
    return 4.0 * J - 2.0 * h * delta_m


@dataclass(frozen=True)
class DropletParams:
    """Spherical-droplet energetics on a c-coordinated antiferromagnet.

    The surface tension is lambda = lambda_prefactor * c * J (the prefactor
    absorbs lattice geometry and defaults to 1; it is a knob, never assumed
    silently elsewhere). m0 is the net spin per site inside the ordered domain.
    """

    c: int
    J: float
    h: float
    m0: float = 1.0
    lambda_prefactor: float = 1.0

    def __post_init__(self):
        if self.c < 3:
            raise ValueError(f"coordination must be >= 3, got {self.c}")
        if not 0.0 < self.m0 <= 1.0:
            raise ValueError(f"m0 must lie in (0, 1], got {self.m0}")

    @property
    def surface_tension(self) -> float:
        return self.lambda_prefactor * self.c * self.J


def droplet(params: DropletParams, R: float) -> tuple[float, float, float]:
    """(E_surf, E_field, E_total) of a reversed-order droplet of radius R.

    E_surf = 4*pi*lambda*R^2; E_field = -(4/3)*pi*R^3 * 2|h|*m0 (each flipped
    spin gains Zeeman energy 2|h| in sigma_z = +-1 units).
    """
    if R < 0:
        raise ValueError("radius must be non-negative")
    lam = params.surface_tension
    e_surf = 4.0 * math.pi * lam * R**2
    e_field = -(4.0 / 3.0) * math.pi * R**3 * (2.0 * abs(params.h) * params.m0)
    return e_surf, e_field, e_surf + e_field


def critical_droplet(params: DropletParams) -> tuple[float, float]:
    """Critical radius and activation barrier of the droplet curve.

    R_c = lambda/(|h|*m0) is the stationary point of E_total; E_c is E_total at
    R_c, which works out to (4*pi/3)*lambda^3/(h^2*m0^2).
    """
    drive = abs(params.h) * params.m0
    if drive == 0.0:
        raise ValueError("critical droplet undefined at zero field")
    lam = params.surface_tension
    r_c = lam / drive
    e_c = (4.0 * math.pi / 3.0) * lam**3 / drive**2
    return r_c, e_c
