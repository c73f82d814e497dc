"""Measured quantities: magnetization, Neel order, structure factor, height
maps, domain-wall densities, and hysteresis loop area.

All functions are pure and operate on immutable SampleSets; reductions run in
deterministic (shot, then site) order so results are bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import SpinLattice

__all__ = [
    "ObservableError",
    "SampleSet",
    "HysteresisTrace",
    "StructureFactorMap",
    "magnetization",
    "neel_order",
    "structure_factor",
    "structure_factor_at",
    "height_map",
    "wall_density",
    "loop_area",
]

BRILLOUIN_ZONE = (-np.pi, np.pi)


class ObservableError(ValueError):
    """Observable requested on a lattice that cannot support it."""


@dataclass(frozen=True)
class SampleSet:
    """shots x n_sites matrix of +-1 z measurements at one applied field."""

    spins: np.ndarray
    field_value: float
    lattice_ref: str = ""

    def __post_init__(self):
        spins = np.ascontiguousarray(np.asarray(self.spins, dtype=np.int8))
        if spins.ndim != 2 or spins.shape[0] < 1:
            raise ValueError("spins must be a (shots, n_sites) matrix with shots >= 1")
        if not np.isin(spins, (-1, 1)).all():
            raise ValueError("spin entries must be exactly +-1")
        spins.setflags(write=False)
        object.__setattr__(self, "spins", spins)

    @property
    def shots(self) -> int:
        return self.spins.shape[0]

    @property
    def n_sites(self) -> int:
        return self.spins.shape[1]


def _mean_stderr(per_shot: np.ndarray) -> tuple[float, float]:
    mean = float(per_shot.mean())
    if per_shot.size < 2:
        return mean, 0.0
    return mean, float(per_shot.std(ddof=1) / np.sqrt(per_shot.size))


def magnetization(samples: SampleSet) -> tuple[float, float]:
    """Mean and standard error over shots of the per-shot average spin."""
    return _mean_stderr(samples.spins.mean(axis=1))


def neel_order(samples: SampleSet, lattice: SpinLattice) -> tuple[float, float]:
    """Staggered magnetization with sublattice A carrying the + sign.

    Defined only where a bipartition exists (open 2D grids and bipartite
    imports); odd rings and high-coordination graphs are rejected.
    """
    if lattice.bipartition is None:
        raise ObservableError("Neel order needs a bipartite lattice")
    signs = 1.0 - 2.0 * lattice.bipartition  # A -> +1, B -> -1
    return _mean_stderr((samples.spins * signs).mean(axis=1))


@dataclass(frozen=True)
class StructureFactorMap:
    """|S(q)| heatmap plus its momentum grid.

    values[a, b] corresponds to q = (qx[a], qy[b]). Log-scaling is left to the
    plotting layer. bz marks the first-Brillouin-zone square for overlays.
    """

    values: np.ndarray
    qx: np.ndarray
    qy: np.ndarray
    bz: tuple[float, float] = BRILLOUIN_ZONE
    shots_used: int = 0


def _grid_coords(lattice: SpinLattice) -> np.ndarray:
    if lattice.geometry is None or lattice.geometry.ndim != 2 or lattice.geometry.shape[1] != 2:
        raise ObservableError("structure factor needs 2D site coordinates")
    return lattice.geometry.astype(np.float64)


def structure_factor_at(
    samples: SampleSet, lattice: SpinLattice, q: np.ndarray, max_shots: int | None = 100
) -> np.ndarray:
    """Shot-averaged S(q) at explicit momenta q of shape (..., 2).

    Per shot, S(q) = |sum_i exp(i q.r_i) sigma_i|^2, which equals the double
    site sum over exp(i q.(r_i - r_j)) sigma_i sigma_j exactly.
    """
    coords = _grid_coords(lattice)
    q = np.asarray(q, dtype=np.float64)
    flat = q.reshape(-1, 2)
    spins = samples.spins if max_shots is None else samples.spins[:max_shots]
    phases = np.exp(1j * (flat @ coords.T))  # (n_q, n_sites)
    amps = phases @ spins.T.astype(np.float64)  # (n_q, shots)
    return (np.abs(amps) ** 2).mean(axis=1).reshape(q.shape[:-1])


def structure_factor(
    samples: SampleSet,
    lattice: SpinLattice,
    grid: int = 200,
    max_shots: int | None = 100,
) -> StructureFactorMap:
    """|S(q)| averaged per shot on a grid x grid momentum mesh over (-2pi, 2pi).

    The average is of per-shot magnitudes (not the magnitude of the averaged
    amplitude), over at most max_shots shots.
    """
    if grid < 2:
        raise ObservableError("grid must be >= 2")
    coords = _grid_coords(lattice)
    spins = samples.spins if max_shots is None else samples.spins[:max_shots]
    qx = np.linspace(-2.0 * np.pi, 2.0 * np.pi, grid)
    qy = np.linspace(-2.0 * np.pi, 2.0 * np.pi, grid)
    ex = np.exp(1j * np.outer(qx, coords[:, 0]))  # (grid, n_sites)
    ey = np.exp(1j * np.outer(qy, coords[:, 1]))
    acc = np.zeros((grid, grid))
    for shot in spins:
        amp = (ex * shot.astype(np.float64)) @ ey.T
        acc += np.abs(amp) ** 2
    return StructureFactorMap(
        values=acc / spins.shape[0], qx=qx, qy=qy, shots_used=spins.shape[0]
    )


def height_map(shot: np.ndarray, lattice: SpinLattice) -> np.ndarray:
    """Staggered domain height tau = (-1)^(ix+iy) sigma, arranged as (lx, ly).

    Uniform +-1 inside each antiferromagnetic domain; its mean equals the
    per-shot Neel order parameter.
    """
    coords = _grid_coords(lattice).astype(np.int64)
    shot = np.asarray(shot).reshape(-1)
    if shot.shape[0] != lattice.n_sites:
        raise ObservableError("shot length must match lattice size")
    lx, ly = int(coords[:, 0].max()) + 1, int(coords[:, 1].max()) + 1
    tau = np.zeros((lx, ly), dtype=np.int8)
    signs = 1 - 2 * ((coords[:, 0] + coords[:, 1]) % 2)
    tau[coords[:, 0], coords[:, 1]] = signs * shot
    return tau


def wall_density(
    samples: SampleSet, lattice: SpinLattice
) -> tuple[float, float, float]:
    """(total, down-down, up-up) domain-wall bond fractions on a 1D ring.

    A wall is a ferromagnetically aligned bond (sigma_i*sigma_j = +1); its sign
    is the shared orientation of the pair. Averaged over shots and bonds.
    """
    if not lattice.is_ring():
        raise ObservableError("wall density is defined on 1D rings only")
    left = samples.spins[:, lattice.edges[:, 0]].astype(np.int32)
    right = samples.spins[:, lattice.edges[:, 1]].astype(np.int32)
    aligned = left * right == 1
    down = aligned & (left == -1)
    up = aligned & (left == 1)
    return (
        float(aligned.mean()),
        float(down.mean()),
        float(up.mean()),
    )


def wall_counts(samples: SampleSet, lattice: SpinLattice) -> np.ndarray:
    """Per-shot integer domain-wall counts on a ring (for parity checks)."""
    if not lattice.is_ring():
        raise ObservableError("wall counts are defined on 1D rings only")
    left = samples.spins[:, lattice.edges[:, 0]].astype(np.int32)
    right = samples.spins[:, lattice.edges[:, 1]].astype(np.int32)
    return (left * right == 1).sum(axis=1)


@dataclass(frozen=True)
class HysteresisTrace:
    """Per-step averaged observables over one closed field cycle.

    Optional columns hold NaN where the observable is undefined for the model
    family (Neel order on rings, wall densities on grids).
    """

    h: np.ndarray
    m_z: np.ndarray
    m_z_stderr: np.ndarray
    m_s: np.ndarray | None = None
    wall_total: np.ndarray | None = None
    wall_dd: np.ndarray | None = None
    s_pause: float = float("nan")
    gamma_over_j: float = float("nan")

    def __post_init__(self):
        h = np.ascontiguousarray(np.asarray(self.h, dtype=np.float64))
        m = np.ascontiguousarray(np.asarray(self.m_z, dtype=np.float64))
        err = np.ascontiguousarray(np.asarray(self.m_z_stderr, dtype=np.float64))
        if h.ndim != 1 or h.size < 2 or m.shape != h.shape or err.shape != h.shape:
            raise ValueError("trace needs matching 1D h, m_z, m_z_stderr arrays")
        if h[0] != h[-1]:
            raise ValueError("trace must close: first and last applied field equal")
        if np.any(np.abs(m) > 1 + 1e-12):
            raise ValueError("|m_z| must not exceed 1")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "m_z", m)
        object.__setattr__(self, "m_z_stderr", err)
        for name in ("m_s", "wall_total", "wall_dd"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.ascontiguousarray(np.asarray(arr, dtype=np.float64))
                if arr.shape != h.shape:
                    raise ValueError(f"{name} must match the step count")
                object.__setattr__(self, name, arr)

    @property
    def n_steps(self) -> int:
        return self.h.size

    def directions(self) -> np.ndarray:
        """Sweep direction marker per step: -1 descending, +1 ascending."""
        d = np.sign(np.diff(self.h))
        return np.concatenate([d[:1], d]).astype(np.int8)


def loop_area(trace: HysteresisTrace) -> float:
    """|closed integral of M dH| by the trapezoid rule along the recorded order.

    Invariant under cyclic rotation of the cycle and under traversal reversal.
    """
    if trace.n_steps < 4:
        raise ValueError("degenerate trace: need at least 4 steps for an area")
    dh = np.diff(trace.h)
    if not np.any(dh):
        raise ValueError("degenerate trace: applied field never moves")
    mids = 0.5 * (trace.m_z[1:] + trace.m_z[:-1])
    return float(abs(np.sum(mids * dh)))
