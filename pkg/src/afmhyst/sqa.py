"""Path-integral Monte Carlo sampler with step-to-step memory.

The transverse-field model maps to a classical action on n_trotter imaginary
time slices: each slice carries the longitudinal energy scaled by beta/P, and
aligned spins on adjacent slices are rewarded with the coupling
K = -(1/2) ln tanh(beta_slice * Gamma). Replicas keep their spin state from one
h-gain step to the next and relax for only a bounded number of Metropolis
sweeps per step; that kinetic limitation is what produces pinning, lag, and
hysteresis in the quasistatic drive.

Everything runs in reduced units of the coupling energy (B(s*)/2)*max|J_ij|,
so the physics is controlled by gamma/J, the applied multiplier g, and beta*J.

All randomness is counter-based (splitmix-style hashes keyed by seed, replica,
field step, and sweep), so runs are bit-reproducible regardless of thread
count and streams can never be exhausted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .lattice import SpinLattice
from .observables import (
    HysteresisTrace,
    SampleSet,
    magnetization,
    neel_order,
    wall_density,
)
from .schedule import EnergyTable, ProtocolWaveform, interpolate

__all__ = [
    "SqaConfig",
    "ReplicaState",
    "init_replicas",
    "step_once",
    "measure",
    "run_cycle",
    "tau_coupling",
]

# stream tags keep init / sweep / measurement / disorder draws disjoint
_TAG_SWEEP = np.uint64(0x5331)
_TAG_INIT = np.uint64(0x1A17)
_TAG_MEASURE = np.uint64(0x3EA5)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


@dataclass(frozen=True)
class SqaConfig:
    """Sampler knobs.

    beta is the inverse temperature in units of the coupling energy (beta*J).
    sweeps_per_step bounds relaxation between field steps and is the empirical
    stand-in for the analog protocol's fixed anneal time; init_sweeps (default
    10x sweeps_per_step) equilibrates at the first field value. disorder_j and
    disorder_h are Gaussian sigmas for static per-edge / per-site offsets in
    programmed units, emulating hardware inhomogeneity (off by default).
    """

    n_trotter: int = 32
    beta: float = 8.0
    sweeps_per_step: int = 10
    replicas: int = 64
    seed: int = 0
    init_sweeps: int | None = None
    disorder_j: float = 0.0
    disorder_h: float = 0.0

    def __post_init__(self):
        if self.n_trotter < 1:
            raise ValueError("n_trotter must be >= 1")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.sweeps_per_step < 0:
            raise ValueError("sweeps_per_step must be >= 0")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.disorder_j < 0 or self.disorder_h < 0:
            raise ValueError("disorder sigmas must be >= 0")

    def resolved_init_sweeps(self) -> int:
        return 10 * self.sweeps_per_step if self.init_sweeps is None else self.init_sweeps


@dataclass
class ReplicaState:
    """Persistent (replicas, n_trotter, n_sites) spin stack plus RNG epoch."""

    spins: np.ndarray
    seed: int
    epoch: int = 0

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=np.int8)
        if spins.ndim != 3:
            raise ValueError("spins must be (replicas, n_trotter, n_sites)")
        if not np.isin(spins, (-1, 1)).all():
            raise ValueError("spin entries must be exactly +-1")
        self.spins = np.ascontiguousarray(spins)

    @property
    def replicas(self) -> int:
        return self.spins.shape[0]

    @property
    def n_trotter(self) -> int:
        return self.spins.shape[1]

    @property
    def n_sites(self) -> int:
        return self.spins.shape[2]


def tau_coupling(beta_slice: float, gamma: float) -> float:
    """Imaginary-time coupling K = -(1/2) ln tanh(beta_slice * gamma)."""
    x = beta_slice * gamma
    if x <= 0:
        raise ValueError("beta_slice * gamma must be positive for a finite coupling")
    return -0.5 * math.log(math.tanh(x))


@njit(cache=True, inline="always")
def _mix64(z):
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def _u01(key, counter):
    # 53-bit mantissa uniform in [0, 1)
    return (_mix64(key ^ (counter * np.uint64(0x9E3779B97F4A7C15))) >> np.uint64(11)) * (
        1.0 / 9007199254740992.0
    )


@njit(cache=True, inline="always")
def _stream_key(seed, tag, epoch, replica):
    k = _mix64(np.uint64(seed) ^ tag)
    k = _mix64(k + np.uint64(epoch) * np.uint64(0x9E3779B97F4A7C15))
    return _mix64(k + np.uint64(replica) * np.uint64(0xBF58476D1CE4E5B9))


@njit(cache=True)
def _fill_random_spins(out, seed, epoch):
    n_rep, n_slice, n_site = out.shape
    for r in range(n_rep):
        key = _stream_key(seed, _TAG_INIT, epoch, r)
        c = np.uint64(0)
        for p in range(n_slice):
            for i in range(n_site):
                c += np.uint64(1)
                out[r, p, i] = 1 if _u01(key, c) < 0.5 else -1


@njit(cache=True, inline="always")
def _attempt_flip(spins, p, i, indptr, nbr, wts, h_site, beta_slice, k_tau, key, counter):
    n_slice = spins.shape[0]
    s = spins[p, i]
    local = 0.0
    for e in range(indptr[i], indptr[i + 1]):
        local += wts[e] * spins[p, nbr[e]]
    d_action = beta_slice * (-2.0 * s * (local - h_site[i]))
    if n_slice > 1:
        p_prev = p - 1 if p > 0 else n_slice - 1
        p_next = p + 1 if p < n_slice - 1 else 0
        d_action += 2.0 * k_tau * s * (spins[p_prev, i] + spins[p_next, i])
    if d_action <= 0.0 or _u01(key, counter) < math.exp(-d_action):
        spins[p, i] = -s


@njit(cache=True)
def _sweep_replica(
    spins, indptr, nbr, wts, h_site, beta_slice, k_tau, sweeps, seed, epoch, replica,
    checkerboard, colors,
):
    n_slice, n_site = spins.shape
    total = n_slice * n_site
    perm = np.empty(total, dtype=np.int64)
    for sweep in range(sweeps):
        key = _mix64(
            _stream_key(seed, _TAG_SWEEP, epoch, replica) + np.uint64(sweep) * _GOLDEN
        )
        c = np.uint64(0)
        if checkerboard:
            # (site color + slice) parity 2-colors space-time when the graph is
            # bipartite and n_trotter is even; order within a color is free
            for phase in range(2):
                for p in range(n_slice):
                    for i in range(n_site):
                        if (colors[i] + p) & 1 == phase:
                            c += np.uint64(1)
                            _attempt_flip(
                                spins, p, i, indptr, nbr, wts, h_site,
                                beta_slice, k_tau, key, c,
                            )
        else:
            for t in range(total):
                perm[t] = t
            for t in range(total - 1, 0, -1):
                c += np.uint64(1)
                j = int(_mix64(key ^ (c * _GOLDEN)) % np.uint64(t + 1))
                tmp = perm[t]
                perm[t] = perm[j]
                perm[j] = tmp
            for t in range(total):
                p = perm[t] // n_site
                i = perm[t] - p * n_site
                c += np.uint64(1)
                _attempt_flip(
                    spins, p, i, indptr, nbr, wts, h_site, beta_slice, k_tau, key, c,
                )


@njit(cache=True, parallel=True)
def _sweep_all(
    spins, indptr, nbr, wts, h_site, beta_slice, k_tau, sweeps, seed, epoch,
    checkerboard, colors,
):
    for r in prange(spins.shape[0]):
        _sweep_replica(
            spins[r], indptr, nbr, wts, h_site, beta_slice, k_tau, sweeps,
            seed, epoch, r, checkerboard, colors,
        )


@njit(cache=True)
def _pick_slices(seed, epoch, n_rep, n_slice):
    out = np.empty(n_rep, dtype=np.int64)
    for r in range(n_rep):
        key = _stream_key(seed, _TAG_MEASURE, epoch, r)
        out[r] = int(_u01(key, np.uint64(1)) * n_slice)
    return out


def init_replicas(
    lattice: SpinLattice, config: SqaConfig, initial_spins: np.ndarray | None = None
) -> ReplicaState:
    """Fresh replica stack: random +-1 spins, or a caller-provided stack."""
    shape = (config.replicas, config.n_trotter, lattice.n_sites)
    if initial_spins is not None:
        spins = np.asarray(initial_spins, dtype=np.int8)
        if spins.shape != shape:
            raise ValueError(f"initial_spins must have shape {shape}")
        return ReplicaState(spins=spins.copy(), seed=config.seed)
    spins = np.empty(shape, dtype=np.int8)
    _fill_random_spins(spins, config.seed, 0)
    return ReplicaState(spins=spins, seed=config.seed)


def _update_order(lattice: SpinLattice, n_trotter: int) -> tuple[bool, np.ndarray]:
    if lattice.bipartition is not None and n_trotter % 2 == 0:
        return True, lattice.bipartition.astype(np.int64)
    return False, np.zeros(lattice.n_sites, dtype=np.int64)


def step_once(
    state: ReplicaState,
    lattice: SpinLattice,
    h_site: np.ndarray | float,
    gamma: float,
    beta: float,
    sweeps: int,
) -> ReplicaState:
    """Advance every replica by `sweeps` Metropolis sweeps at fixed fields.

    h_site and gamma are in reduced units (per coupling energy). Detailed
    balance holds per sweep; sweeps=0 leaves the state unchanged but still
    advances the RNG epoch. The state is mutated and returned.
    """
    n_slice = state.n_trotter
    if gamma > 0 and n_slice < 2:
        raise ValueError("gamma > 0 requires n_trotter >= 2")
    if gamma == 0 and n_slice != 1:
        raise ValueError("gamma = 0 requires n_trotter = 1 (classical limit)")
    beta_slice = beta / n_slice
    k_tau = tau_coupling(beta_slice, gamma) if n_slice > 1 else 0.0
    h_arr = np.broadcast_to(np.asarray(h_site, dtype=np.float64), (lattice.n_sites,))
    h_arr = np.ascontiguousarray(h_arr)
    indptr, nbr, wts = lattice.adjacency_csr()
    checker, colors = _update_order(lattice, n_slice)
    if sweeps > 0:
        _sweep_all(
            state.spins, indptr, nbr, wts, h_arr, beta_slice, k_tau, sweeps,
            state.seed, state.epoch, checker, colors,
        )
    state.epoch += 1
    return state


def measure(state: ReplicaState, field_value: float, lattice_ref: str = "") -> SampleSet:
    """One z measurement per replica from a uniformly chosen Trotter slice."""
    slices = _pick_slices(state.seed, state.epoch, state.replicas, state.n_trotter)
    spins = state.spins[np.arange(state.replicas), slices, :]
    return SampleSet(spins=spins.copy(), field_value=field_value, lattice_ref=lattice_ref)


def _static_disorder(
    lattice: SpinLattice, config: SqaConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge and per-site Gaussian offsets, frozen for the whole cycle."""
    couplings = lattice.couplings.copy()
    fields = lattice.fields.copy()
    if config.disorder_j > 0 or config.disorder_h > 0:
        rng = np.random.default_rng([config.seed, 0xD150])
        if config.disorder_j > 0:
            couplings = couplings + rng.normal(0.0, config.disorder_j, couplings.size)
        if config.disorder_h > 0:
            fields = fields + rng.normal(0.0, config.disorder_h, fields.size)
    return couplings, fields


def run_cycle(
    lattice: SpinLattice,
    waveform: ProtocolWaveform,
    table: EnergyTable,
    config: SqaConfig,
    field_offsets: np.ndarray | None = None,
    initial_spins: np.ndarray | None = None,
) -> tuple[list[SampleSet], HysteresisTrace]:
    """One full hysteresis cycle at the waveform's pause point.

    For each h-gain step the replicas sweep sweeps_per_step times with per-site
    longitudinal field (g*h_i + offsets) * B(s*)/2 and transverse scale A(s*)/2,
    then one slice per replica is measured; replica state carries over to the
    next step. field_offsets (e.g. calibrated flux-bias values) are in the same
    programmed units as h_i and are not multiplied by g.
    """
    a_s, b_s = interpolate(table, waveform.s_pause)
    couplings, fields = _static_disorder(lattice, config)
    j_ref = float(np.max(np.abs(couplings))) if couplings.size else 0.0
    if j_ref == 0.0 or b_s == 0.0:
        raise ValueError("coupling energy scale vanishes: B(s*) and J must be nonzero")
    gamma_red = a_s / (b_s * j_ref)
    if gamma_red > 0 and config.n_trotter < 2:
        raise ValueError("transverse field active: n_trotter must be >= 2")
    offsets = np.zeros(lattice.n_sites) if field_offsets is None else np.asarray(
        field_offsets, dtype=np.float64
    )
    if offsets.shape != (lattice.n_sites,):
        raise ValueError("field_offsets must have one entry per site")

    work = SpinLattice(
        n_sites=lattice.n_sites,
        edges=lattice.edges,
        couplings=couplings / j_ref,
        fields=fields,
        bipartition=lattice.bipartition,
        geometry=lattice.geometry,
        kind=lattice.kind,
    )
    ref = lattice.fingerprint()
    state = init_replicas(work, config, initial_spins)

    is_ring = work.is_ring()
    has_bip = work.bipartition is not None

    def reduced_field(g: float) -> np.ndarray:
        return (g * fields + offsets) / j_ref

    step_once(
        state, work, reduced_field(float(waveform.steps[0])), gamma_red,
        config.beta, config.resolved_init_sweeps(),
    )

    sample_sets: list[SampleSet] = []
    m_mean = np.empty(waveform.n_steps)
    m_err = np.empty(waveform.n_steps)
    m_s = np.full(waveform.n_steps, np.nan) if has_bip else None
    w_tot = np.full(waveform.n_steps, np.nan) if is_ring else None
    w_dd = np.full(waveform.n_steps, np.nan) if is_ring else None
    for k, g in enumerate(waveform.steps):
        step_once(
            state, work, reduced_field(float(g)), gamma_red,
            config.beta, config.sweeps_per_step,
        )
        samples = measure(state, field_value=float(g), lattice_ref=ref)
        sample_sets.append(samples)
        m_mean[k], m_err[k] = magnetization(samples)
        if has_bip:
            m_s[k] = neel_order(samples, work)[0]
        if is_ring:
            w_tot[k], w_dd[k], _ = wall_density(samples, work)
    trace = HysteresisTrace(
        h=waveform.steps.copy(),
        m_z=m_mean,
        m_z_stderr=m_err,
        m_s=m_s,
        wall_total=w_tot,
        wall_dd=w_dd,
        s_pause=waveform.s_pause,
        gamma_over_j=gamma_red,
    )
    return sample_sets, trace
