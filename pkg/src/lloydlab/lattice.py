"""Finite boxes in Z^d, the box-restricted Laplacian and sub-box partitions.

Sites of the box ``Lambda_L = {n : |n_i| <= L}`` are ordered lexicographically
(first coordinate slowest), which coincides with the Kronecker-product ordering
used to assemble the Laplacian.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MAX_SITES = 10_000


class SiteBudgetError(ValueError):
    """Raised when a box would produce a matrix larger than the dense cap."""


class NoValidPartition(ValueError):
    pass


@dataclass(frozen=True)
class BoxSpec:
    d: int
    L: int
    sites: np.ndarray = field(repr=False, compare=False)
    index: dict = field(repr=False, compare=False)

    @property
    def side(self) -> int:
        return 2 * self.L + 1

    @property
    def n_sites(self) -> int:
        return self.side ** self.d

    def __len__(self) -> int:
        return self.n_sites


@dataclass
class HamiltonianMatrix:
    """Dense real symmetric matrix indexed by the sites of ``box``.

    ``site_rows`` records which rows of the parent box the matrix covers; it is
    ``None`` for a full box and an index array for restrictions to sub-boxes.
    """

    box: BoxSpec | None
    entries: np.ndarray
    site_rows: np.ndarray | None = None

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass
class SubBoxPartition:
    parent: BoxSpec
    n_per_axis: int
    pieces: list[np.ndarray]
    boundaries: list[np.ndarray]
    interiors: list[np.ndarray]

    @property
    def piece_side(self) -> int:
        return self.parent.side // self.n_per_axis

    def __len__(self) -> int:
        return len(self.pieces)


def enumerate_box(d: int, L: int, max_sites: int = DEFAULT_MAX_SITES) -> BoxSpec:
    """Enumerate ``Lambda_L`` in ``Z^d`` in lexicographic order."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if L < 0:
        raise ValueError(f"half side must be >= 0, got {L}")
    n = (2 * L + 1) ** d
    if n > max_sites:
        raise SiteBudgetError(
            f"box d={d}, L={L} has {n} sites, above the dense budget of {max_sites}"
        )
    coords = range(-L, L + 1)
    sites = np.array(list(itertools.product(coords, repeat=d)), dtype=np.int64)
    index = {tuple(int(c) for c in s): i for i, s in enumerate(sites)}
    return BoxSpec(d=d, L=L, sites=sites, index=index)


def _path_adjacency(n: int) -> np.ndarray:
    P = np.zeros((n, n))
    i = np.arange(n - 1)
    P[i, i + 1] = 1.0
    P[i + 1, i] = 1.0
    return P


def build_laplacian(box: BoxSpec) -> HamiltonianMatrix:
    """Nearest-neighbour adjacency of the box (no diagonal term)."""
    side = box.side
    P = _path_adjacency(side)
    I = np.eye(side)
    A = np.zeros((box.n_sites, box.n_sites))
    for axis in range(box.d):
        term = np.ones((1, 1))
        for k in range(box.d):
            term = np.kron(term, P if k == axis else I)
        A += term
    return HamiltonianMatrix(box=box, entries=A)


def build_hamiltonian(box: BoxSpec, potential) -> HamiltonianMatrix:
    potential = np.asarray(potential, dtype=float)
    if potential.shape != (box.n_sites,):
        raise ValueError(
            f"potential has shape {potential.shape}, expected ({box.n_sites},)"
        )
    if not np.all(np.isfinite(potential)):
        raise ValueError("potential contains non-finite values")
    H = build_laplacian(box)
    H.entries[np.diag_indices(box.n_sites)] = potential
    return H


def restrict(H: HamiltonianMatrix, rows) -> HamiltonianMatrix:
    """Principal submatrix of ``H`` on the given site rows.

    For a sub-box this is exactly the matrix of the operator restricted to it.
    """
    rows = np.asarray(rows, dtype=np.int64)
    return HamiltonianMatrix(
        box=H.box, entries=H.entries[np.ix_(rows, rows)].copy(), site_rows=rows
    )


def choose_pieces_per_axis(side: int, epsilon: float) -> int:
    """Divisor of ``side`` (excluding 1) closest to ``side**epsilon``; ties go low."""
    target = side ** epsilon
    divisors = [q for q in range(2, side + 1) if side % q == 0]
    if not divisors:
        raise NoValidPartition(f"side {side} admits no non-trivial partition")
    return min(divisors, key=lambda q: (round(abs(q - target), 9), q))


def partition_subboxes(
    box: BoxSpec, epsilon: float, n_per_axis: int | None = None
) -> SubBoxPartition:
    """Tile the box with ``N_L^d`` disjoint cubes.

    ``N_L`` is a divisor of ``2L+1`` so that the tiling is exact. Boundary sites
    of a piece are those with a nearest neighbour outside the piece (including
    neighbours outside the parent box); interior sites are at l-infinity
    distance greater than ``ln L`` from the boundary.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    side = box.side
    if n_per_axis is None:
        n_per_axis = choose_pieces_per_axis(side, epsilon)
    elif n_per_axis < 1 or side % n_per_axis:
        raise NoValidPartition(f"{n_per_axis} does not divide side {side}")
    piece_side = side // n_per_axis
    radius = math.log(box.L) if box.L > 0 else -math.inf

    shifted = box.sites + box.L
    label = shifted // piece_side
    local = shifted - label * piece_side
    # l-infinity distance to the nearest face of the piece
    dist = np.minimum(local, piece_side - 1 - local).min(axis=1)

    flat = np.zeros(box.n_sites, dtype=np.int64)
    for axis in range(box.d):
        flat = flat * n_per_axis + label[:, axis]
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=n_per_axis ** box.d)
    splits = np.cumsum(counts)[:-1]

    pieces, boundaries, interiors = [], [], []
    for rows in np.split(order, splits):
        pieces.append(rows)
        boundaries.append(rows[dist[rows] == 0])
        interiors.append(rows[dist[rows] > radius])
    return SubBoxPartition(
        parent=box,
        n_per_axis=n_per_axis,
        pieces=pieces,
        boundaries=boundaries,
        interiors=interiors,
    )
