"""Spin lattice construction: odd rings, open square grids, high-coordination graphs.

All lattices are uniformly weighted antiferromagnets by default (J = +1 on every
edge, uniform per-site field 1.0). Instances are immutable after construction and
safe to share between workers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import networkx as nx
import numpy as np

__all__ = [
    "LatticeError",
    "SpinLattice",
    "make_odd_ring",
    "make_open_grid",
    "make_high_coordination",
    "import_edge_list",
    "export_edge_list",
]


class LatticeError(ValueError):
    """Invalid lattice construction or import."""


@dataclass(frozen=True)
class SpinLattice:
    """Undirected coupling graph with per-edge J and per-site longitudinal field.

    Attributes
    ----------
    n_sites     : number of spins.
    edges       : (E, 2) int array of site pairs, i < j, unique.
    couplings   : (E,) float array, J_ij in programmed (dimensionless) units.
    fields      : (n_sites,) float array, per-site h_i in programmed units.
    bipartition : optional (n_sites,) int array of sublattice labels {0: A, 1: B};
                  present only when every edge connects A to B.
    geometry    : optional integer site coordinates; shape (n_sites, 2) for grids,
                  (n_sites,) ring index for rings, None otherwise.
    """

    n_sites: int
    edges: np.ndarray
    couplings: np.ndarray
    fields: np.ndarray
    bipartition: np.ndarray | None = None
    geometry: np.ndarray | None = None
    kind: str = "generic"

    def __post_init__(self):
        if self.n_sites < 1:
            raise LatticeError(f"n_sites must be positive, got {self.n_sites}")
        edges = np.ascontiguousarray(np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))
        couplings = np.ascontiguousarray(np.asarray(self.couplings, dtype=np.float64))
        fields = np.ascontiguousarray(np.asarray(self.fields, dtype=np.float64))
        if couplings.shape[0] != edges.shape[0]:
            raise LatticeError("couplings length must match edge count")
        if fields.shape != (self.n_sites,):
            raise LatticeError("fields must have one entry per site")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n_sites:
                raise LatticeError("edge index out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise LatticeError("self-loops are not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.column_stack([lo, hi])
            keys = lo * self.n_sites + hi
            if np.unique(keys).size != keys.size:
                raise LatticeError("duplicate undirected edge")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "fields", fields)
        if self.bipartition is not None:
            bip = np.ascontiguousarray(np.asarray(self.bipartition, dtype=np.int8))
            if bip.shape != (self.n_sites,) or not np.isin(bip, (0, 1)).all():
                raise LatticeError("bipartition must label every site with 0 (A) or 1 (B)")
            if edges.size and np.any(bip[edges[:, 0]] == bip[edges[:, 1]]):
                raise LatticeError("bipartition violated: an edge connects same-sublattice sites")
            object.__setattr__(self, "bipartition", bip)
        if self.geometry is not None:
            geo = np.ascontiguousarray(np.asarray(self.geometry, dtype=np.int64))
            if geo.shape[0] != self.n_sites:
                raise LatticeError("geometry must have one entry per site")
            object.__setattr__(self, "geometry", geo)
        for arr in (self.edges, self.couplings, self.fields, self.bipartition, self.geometry):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_sites, dtype=np.int64)
        np.add.at(deg, self.edges[:, 0], 1)
        np.add.at(deg, self.edges[:, 1], 1)
        return deg

    def is_ring(self) -> bool:
        """True when the graph is a single cycle visiting every site."""
        if self.n_sites < 3 or self.n_edges != self.n_sites:
            return False
        if not np.all(self.degrees() == 2):
            return False
        # degree-2 everywhere + E == N: connected iff one cycle
        g = nx.Graph()
        g.add_nodes_from(range(self.n_sites))
        g.add_edges_from(map(tuple, self.edges))
        return nx.is_connected(g)

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Neighbor lists as CSR arrays (indptr, neighbor index, coupling)."""
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        wts = np.concatenate([self.couplings, self.couplings])
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(self.n_sites + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n_sites), out=indptr[1:])
        return indptr, dst[order], wts[order]

    def fingerprint(self) -> str:
        """Short content hash of the lattice (topology, couplings, fields, labels)."""
        h = hashlib.sha256()
        h.update(str(self.n_sites).encode())
        h.update(self.edges.tobytes())
        h.update(self.couplings.tobytes())
        h.update(self.fields.tobytes())
        if self.bipartition is not None:
            h.update(self.bipartition.tobytes())
        return h.hexdigest()[:12]


def make_odd_ring(n: int, J: float = 1.0, field: float = 1.0) -> SpinLattice:
    """Periodic chain with an odd number of sites.

    The odd length frustrates the antiferromagnet: every spin configuration
    carries an odd number of domain walls, so the ground state hosts exactly one
    mobile wall. Even n is rejected.
    """
    if n < 3 or n % 2 == 0:
        raise LatticeError(f"ring length must be odd and >= 3, got {n}")
    edges = np.array([(i, (i + 1) % n) for i in range(n)], dtype=np.int64)
    return SpinLattice(
        n_sites=n,
        edges=edges,
        couplings=np.full(n, float(J)),
        fields=np.full(n, float(field)),
        bipartition=None,  # odd cycle is not bipartite
        geometry=np.arange(n, dtype=np.int64),
        kind="ring",
    )


def make_open_grid(lx: int, ly: int, J: float = 1.0, field: float = 1.0) -> SpinLattice:
    """lx-by-ly square grid with open boundaries, checkerboard bipartition.

    Site order is x-major: site = ix*ly + iy. Sublattice A holds (ix+iy) even,
    so the (0, 0) corner is always in A.
    """
    if lx < 2 or ly < 2:
        raise LatticeError(f"grid dimensions must be >= 2, got {lx}x{ly}")
    n = lx * ly
    edges = []
    for ix in range(lx):
        for iy in range(ly):
            s = ix * ly + iy
            if iy + 1 < ly:
                edges.append((s, s + 1))
            if ix + 1 < lx:
                edges.append((s, s + ly))
    coords = np.array([(ix, iy) for ix in range(lx) for iy in range(ly)], dtype=np.int64)
    bip = ((coords[:, 0] + coords[:, 1]) % 2).astype(np.int8)
    return SpinLattice(
        n_sites=n,
        edges=np.array(edges, dtype=np.int64),
        couplings=np.full(len(edges), float(J)),
        fields=np.full(n, float(field)),
        bipartition=bip,
        geometry=coords,
        kind="grid",
    )


def make_high_coordination(
    n: int, c: int, seed: int, J: float = 1.0, field: float = 1.0
) -> SpinLattice:
    """Seeded random c-regular connected graph.

    Stand-in for dense annealer hardware graphs: the droplet-energetics analysis
    of such lattices depends only on the coordination number, so any connected
    c-regular topology carries the same physics knob. Deterministic for a fixed
    seed.
    """
    if c < 3:
        raise LatticeError(f"coordination must be >= 3, got {c}")
    if n <= c:
        raise LatticeError(f"need n > c for a simple c-regular graph, got n={n}, c={c}")
    if (n * c) % 2 != 0:
        raise LatticeError(f"n*c must be even, got n={n}, c={c}")
    g = None
    for attempt in range(64):
        cand = nx.random_regular_graph(c, n, seed=seed * 1000003 + attempt)
        if nx.is_connected(cand):
            g = cand
            break
    if g is None:
        raise LatticeError(f"no connected {c}-regular graph found for n={n}, seed={seed}")
    edges = np.array(sorted(tuple(sorted(e)) for e in g.edges()), dtype=np.int64)
    return SpinLattice(
        n_sites=n,
        edges=edges,
        couplings=np.full(edges.shape[0], float(J)),
        fields=np.full(n, float(field)),
        kind="regular",
    )


def _infer_bipartition(n: int, edges: np.ndarray) -> np.ndarray | None:
    """2-color the graph if possible; smallest index of each component gets A."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    color = np.full(n, -1, dtype=np.int8)
    for start in range(n):
        if color[start] != -1:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if color[v] == -1:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return None
    return color


def import_edge_list(text: str) -> SpinLattice:
    """Parse an edge-list document into a lattice.

    Format: optional ``# n_sites=<N>`` line, comments starting with ``#``, and one
    ``i j J`` triple per line (whitespace separated). The bipartition is inferred
    when the graph is 2-colorable. Parse failures name the offending line.
    """
    n_declared: int | None = None
    rows: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        header = raw.strip()
        if header.startswith("#") and "n_sites" in header:
            try:
                n_declared = int(header.split("=", 1)[1].strip())
            except (IndexError, ValueError) as exc:
                raise LatticeError(f"line {lineno}: malformed n_sites header: {raw!r}") from exc
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise LatticeError(f"line {lineno}: expected 'i j J', got {raw!r}")
        try:
            i, j, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise LatticeError(f"line {lineno}: could not parse {raw!r}") from exc
        if i == j:
            raise LatticeError(f"line {lineno}: self-loop on site {i}")
        if i < 0 or j < 0:
            raise LatticeError(f"line {lineno}: negative site index")
        rows.append((i, j, w))
    if not rows:
        raise LatticeError("no edges in document")
    edges = np.array([(min(i, j), max(i, j)) for i, j, _ in rows], dtype=np.int64)
    seen: set[tuple[int, int]] = set()
    for i, j in edges:
        key = (int(i), int(j))
        if key in seen:
            raise LatticeError(f"duplicate edge ({key[0]}, {key[1]})")
        seen.add(key)
    if n_declared is not None and int(edges.max()) >= n_declared:
        raise LatticeError(
            f"edge index {int(edges.max())} exceeds declared n_sites={n_declared}"
        )
    n = max(int(edges.max()) + 1, n_declared or 0)
    couplings = np.array([w for _, _, w in rows], dtype=np.float64)
    lat = SpinLattice(
        n_sites=n,
        edges=edges,
        couplings=couplings,
        fields=np.ones(n),
        bipartition=_infer_bipartition(n, edges),
        kind="imported",
    )
    return lat


def export_edge_list(lattice: SpinLattice) -> str:
    """Serialize to the edge-list text format (round-trips through import)."""
    lines = [f"# n_sites={lattice.n_sites}"]
    for (i, j), w in zip(lattice.edges, lattice.couplings):
        lines.append(f"{i} {j} {w!r}")
    return "\n".join(lines) + "\n"
