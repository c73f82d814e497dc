"""Exact oracle for small transverse-field Ising systems.

Builds the full 2^N Hamiltonian of any lattice, H = sum_edges J_ij sz_i sz_j
- sum_i h_i sz_i - Gamma sum_i sx_i, and samples z-basis configurations from
the ground state or the Gibbs distribution. Hard cap N <= 20 keeps the oracle
honest; bigger systems belong to the path-integral sampler.

Sign convention: J > 0 is antiferromagnetic and the Zeeman term enters with a
minus sign, so positive field favors sigma_z = +1. No magnetization sign flip
is applied anywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import SpinLattice
from .observables import SampleSet

__all__ = [
    "SamplerError",
    "TfimSpec",
    "build_hamiltonian",
    "basis_probabilities",
    "sample_z",
    "single_wall_spectrum",
]

SIZE_CAP = 20
DENSE_CUTOFF = 14
_GROUND_TOL = 1e-9
_TRUNCATION_TOL = 1e-10


class SamplerError(RuntimeError):
    """Diagonalization or sampling failure in the exact oracle."""


@dataclass(frozen=True)
class TfimSpec:
    """Problem instance for the exact sampler.

    beta is the inverse temperature; None selects ground-state mode (the
    maximally mixed state over the ground eigenspace, i.e. the beta -> inf
    limit). field_offsets are optional per-site additions to the uniform
    longitudinal field h, in the same energy units.
    """

    lattice: SpinLattice
    gamma: float = 0.0
    h: float = 0.0
    beta: float | None = None
    field_offsets: np.ndarray | None = None

    def __post_init__(self):
        if self.lattice.n_sites > SIZE_CAP:
            raise SamplerError(
                f"exact sampler capped at {SIZE_CAP} sites, got {self.lattice.n_sites}"
            )
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.beta is not None and self.beta <= 0:
            raise ValueError("beta must be positive (or None for ground state)")
        if self.field_offsets is not None:
            off = np.asarray(self.field_offsets, dtype=np.float64)
            if off.shape != (self.lattice.n_sites,):
                raise ValueError("field_offsets must have one entry per site")
            object.__setattr__(self, "field_offsets", off)

    def site_fields(self) -> np.ndarray:
        """Per-site longitudinal energies h_i entering -h_i sigma_z_i."""
        f = np.full(self.lattice.n_sites, float(self.h))
        if self.field_offsets is not None:
            f = f + self.field_offsets
        return f


def _spin_columns(n: int) -> np.ndarray:
    """(2^n, n) array of sigma_z values; site i lives on bit i, bit 0 -> +1."""
    states = np.arange(1 << n, dtype=np.int64)
    bits = (states[:, None] >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)


def classical_energies(spec: TfimSpec) -> np.ndarray:
    """Diagonal of the Hamiltonian over all 2^N basis states."""
    lat = spec.lattice
    spins = _spin_columns(lat.n_sites).astype(np.float64)
    diag = np.zeros(spins.shape[0])
    for (i, j), w in zip(lat.edges, lat.couplings):
        diag += w * spins[:, i] * spins[:, j]
    diag -= spins @ spec.site_fields()
    return diag


def build_hamiltonian(spec: TfimSpec) -> sp.csr_matrix:
    """Sparse symmetric 2^N x 2^N matrix in the computational z basis."""
    n = spec.lattice.n_sites
    dim = 1 << n
    diag = classical_energies(spec)
    ham = sp.diags(diag, format="csr", dtype=np.float64)
    if spec.gamma != 0.0:
        states = np.arange(dim, dtype=np.int64)
        rows = np.repeat(states, n)
        cols = (states[:, None] ^ (1 << np.arange(n))).ravel()
        vals = np.full(rows.size, -spec.gamma)
        ham = ham + sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    return ham


def _dense_probabilities(spec: TfimSpec) -> np.ndarray:
    ham = build_hamiltonian(spec).toarray()
    energies, vectors = np.linalg.eigh(ham)
    if spec.beta is None:
        tol = _GROUND_TOL * (1.0 + abs(energies[0]))
        ground = vectors[:, energies <= energies[0] + tol]
        return (ground**2).mean(axis=1)
    weights = np.exp(-spec.beta * (energies - energies[0]))
    probs = (vectors**2) @ weights
    return probs / weights.sum()


def _lanczos_probabilities(spec: TfimSpec) -> np.ndarray:
    ham = build_hamiltonian(spec)
    dim = ham.shape[0]
    k = 32
    while True:
        try:
            energies, vectors = spla.eigsh(ham, k=k, which="SA")
        except spla.ArpackNoConvergence as exc:
            raise SamplerError("Lanczos diagonalization did not converge") from exc
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        if spec.beta is None:
            tol = _GROUND_TOL * (1.0 + abs(energies[0]))
            mask = energies <= energies[0] + tol
            if not mask.all() or k >= dim - 2:
                ground = vectors[:, mask]
                return (ground**2).mean(axis=1)
        else:
            weights = np.exp(-spec.beta * (energies - energies[0]))
            tail_bound = (dim - k) * weights[-1]
            if tail_bound <= _TRUNCATION_TOL * weights.sum() or k >= dim - 2:
                if tail_bound > _TRUNCATION_TOL * weights.sum():
                    raise SamplerError(
                        "Gibbs truncation did not reach 1e-10 cumulative weight; "
                        "beta too small for the Lanczos path"
                    )
                probs = (vectors**2) @ weights
                return probs / weights.sum()
        if k >= 512:
            raise SamplerError("Lanczos truncation exceeded 512 states")
        k = min(2 * k, dim - 2)


def basis_probabilities(spec: TfimSpec) -> np.ndarray:
    """Measurement distribution |<z|psi>|^2 (ground) or Gibbs-averaged weights."""
    n = spec.lattice.n_sites
    if spec.gamma == 0.0:
        # diagonal Hamiltonian: Boltzmann weights directly, any N up to the cap
        diag = classical_energies(spec)
        if spec.beta is None:
            tol = _GROUND_TOL * (1.0 + abs(diag.min()))
            mask = diag <= diag.min() + tol
            return mask / mask.sum()
        w = np.exp(-spec.beta * (diag - diag.min()))
        return w / w.sum()
    if n <= DENSE_CUTOFF:
        return _dense_probabilities(spec)
    return _lanczos_probabilities(spec)


def sample_z(spec: TfimSpec, shots: int, seed: int) -> SampleSet:
    """Draw i.i.d. z-basis configurations; deterministic for a fixed seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = basis_probabilities(spec)
    rng = np.random.default_rng(seed)
    states = rng.choice(probs.size, size=shots, p=probs / probs.sum())
    spins = _spin_columns(spec.lattice.n_sites)[states]
    return SampleSet(
        spins=spins,
        field_value=float(spec.h),
        lattice_ref=spec.lattice.fingerprint(),
    )


def single_wall_effective_hamiltonian(
    n: int, J: float, h: float, gamma: float
) -> np.ndarray:
    """Dense 2n x 2n one-wall Hamiltonian on the |bond j, wall sign w> basis.

    Diagonal: E_J - h*w with E_J = -J(n-2). A transverse-field flip of either
    spin adjacent to the wall moves it one bond and toggles its sign, giving
    hopping -Gamma between (j, w) and (j +- 1, -w). The scalar E_J enters as a
    uniform diagonal shift.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"single-wall sector requires odd n >= 3, got {n}")
    e_j = -J * (n - 2)
    dim = 2 * n
    ham = np.zeros((dim, dim))
    idx = lambda j, w: 2 * (j % n) + (0 if w > 0 else 1)
    for j in range(n):
        ham[idx(j, +1), idx(j, +1)] = e_j - h
        ham[idx(j, -1), idx(j, -1)] = e_j + h
        for w in (+1, -1):
            r, c = idx(j, w), idx(j + 1, -w)
            ham[r, c] = -gamma
            ham[c, r] = -gamma
    return ham


def single_wall_spectrum(n: int, J: float, h: float, gamma: float) -> np.ndarray:
    """Sorted eigenvalues of the 2n x 2n one-wall Hamiltonian.

    Meaningful as a low-energy description only for gamma/J small; no check is
    enforced, the regime is the caller's responsibility.
    """
    return np.sort(np.linalg.eigvalsh(single_wall_effective_hamiltonian(n, J, h, gamma)))
