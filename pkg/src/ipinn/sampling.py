"""Collocation point generation: interior, boundary, and interface sets.

Batches are generated once per run from a seed and stay fixed for every
iteration. 1D uses a uniform grid partitioned by subdomain membership; 2D/3D
use per-subdomain uniform rejection sampling with interior counts allocated
proportionally to subdomain measure (floor of 50 points each).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ipinn.problems import ProblemSpec, _allocate

INTERIOR_FLOOR = 50
MAX_REJECTION_ROUNDS = 200


class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplingCounts:
    interior: int  # total interior points (grid size in 1D)
    boundary: int  # points per boundary face/edge
    interface: int  # points per interface

    def __post_init__(self):
        if min(self.interior, self.boundary, self.interface) < 1:
            raise ValueError(f"counts must be positive, got {self}")


def default_counts(problem: ProblemSpec) -> SamplingCounts:
    return {
        1: SamplingCounts(interior=131, boundary=1, interface=1),
        2: SamplingCounts(interior=3679, boundary=60, interface=100),
        3: SamplingCounts(interior=3336, boundary=300, interface=200),
    }[problem.dim]


@dataclass
class Batch:
    interior: list[np.ndarray]  # per subdomain, (n_m, d)
    dirichlet_points: np.ndarray
    dirichlet_values: np.ndarray
    dirichlet_subdomains: np.ndarray
    neumann_points: np.ndarray
    neumann_normals: np.ndarray
    neumann_values: np.ndarray
    neumann_subdomains: np.ndarray
    interface_points: list[np.ndarray]  # per interface
    interface_normals: list[np.ndarray]
    interface_p: list[np.ndarray]
    interface_q: list[np.ndarray]

    @property
    def dim(self) -> int:
        return self.dirichlet_points.shape[1]


def _interior_allocation(problem: ProblemSpec, total: int) -> np.ndarray:
    counts = _allocate(total, problem.measures)
    deficit = np.maximum(INTERIOR_FLOOR - counts, 0)
    counts += deficit
    overshoot = int(deficit.sum())
    while overshoot > 0:
        donor = int(np.argmax(counts))
        take = min(overshoot, int(counts[donor]) - INTERIOR_FLOOR)
        if take <= 0:
            raise SamplingError(f"cannot allocate {total} interior points with a floor of {INTERIOR_FLOOR}")
        counts[donor] -= take
        overshoot -= take
    return counts


def _sample_subdomain(problem: ProblemSpec, m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points of subdomain m by rejection from the domain bounding box."""
    lo, hi = problem.bounds
    got = []
    have = 0
    for _ in range(MAX_REJECTION_ROUNDS):
        draw = rng.uniform(lo, hi, size=(max(4 * count, 64), problem.dim))
        keep = draw[problem.membership(draw) == m]
        if keep.shape[0]:
            got.append(keep)
            have += keep.shape[0]
        if have >= count:
            return np.concatenate(got, axis=0)[:count]
    raise SamplingError(
        f"rejection sampling failed to collect {count} points in subdomain {m} "
        f"of {problem.name} after {MAX_REJECTION_ROUNDS} rounds"
    )


def _grid_batch_1d(problem: ProblemSpec, counts: SamplingCounts) -> list[np.ndarray]:
    n = counts.interior
    grid = np.arange(n) / (n - 1)
    iface_x = np.array([spec.sampler(1, 0)[0, 0] for spec in problem.interfaces])
    keep = (grid != 0.0) & (grid != 1.0) & ~np.isin(grid, iface_x)
    pts = grid[keep][:, None]
    ms = problem.membership(pts)
    return [pts[ms == m] for m in range(1, problem.M + 1)]


def build_batch(problem: ProblemSpec, counts: SamplingCounts, seed: int) -> Batch:
    """Deterministic collocation sets for a problem; fixed for the whole run."""
    seq = np.random.SeedSequence(seed)
    interior_seq, boundary_seq, iface_seq = seq.spawn(3)

    if problem.dim == 1:
        interior = _grid_batch_1d(problem, counts)
    else:
        alloc = _interior_allocation(problem, counts.interior)
        rngs = [np.random.Generator(np.random.PCG64(s)) for s in interior_seq.spawn(problem.M)]
        interior = [
            _sample_subdomain(problem, m + 1, int(alloc[m]), rngs[m])
            for m in range(problem.M)
        ]

    rng_b = np.random.Generator(np.random.PCG64(boundary_seq))
    bpts, bsub = [], []
    for face in problem.dirichlet_faces:
        pts = face.sample(counts.boundary, rng_b)
        bpts.append(pts)
        bsub.append(np.full(pts.shape[0], face.subdomain, dtype=np.int64))
    dirichlet_points = np.concatenate(bpts, axis=0)
    dirichlet_subdomains = np.concatenate(bsub)
    dirichlet_values = problem.dirichlet_value(dirichlet_points)

    npts = np.empty((0, problem.dim))
    neumann_points, neumann_normals, neumann_values = npts, npts.copy(), np.empty(0)
    neumann_subdomains = np.empty(0, dtype=np.int64)

    iface_children = iface_seq.spawn(len(problem.interfaces))
    interface_points, interface_normals, interface_p, interface_q = [], [], [], []
    for spec, child in zip(problem.interfaces, iface_children):
        pts = spec.sampler(counts.interface, int(child.generate_state(1)[0]))
        interface_points.append(pts)
        interface_normals.append(spec.normal(pts))
        interface_p.append(spec.jump_u(pts))
        interface_q.append(spec.jump_flux(pts))

    return Batch(
        interior=interior,
        dirichlet_points=dirichlet_points,
        dirichlet_values=dirichlet_values,
        dirichlet_subdomains=dirichlet_subdomains,
        neumann_points=neumann_points,
        neumann_normals=neumann_normals,
        neumann_values=neumann_values,
        neumann_subdomains=neumann_subdomains,
        interface_points=interface_points,
        interface_normals=interface_normals,
        interface_p=interface_p,
        interface_q=interface_q,
    )


def batch_to_csv(batch: Batch, path: str, header_comment: str | None = None) -> None:
    """Dump all collocation points with their role and subdomain/interface id."""
    coords = ["x", "y", "z"][: batch.dim]
    with open(path, "w", newline="") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        w = csv.writer(f)
        w.writerow(coords + ["role", "id"])
        for m, pts in enumerate(batch.interior, start=1):
            for p in pts:
                w.writerow([repr(float(c)) for c in p] + ["interior", m])
        for p, m in zip(batch.dirichlet_points, batch.dirichlet_subdomains):
            w.writerow([repr(float(c)) for c in p] + ["dirichlet", int(m)])
        for p, m in zip(batch.neumann_points, batch.neumann_subdomains):
            w.writerow([repr(float(c)) for c in p] + ["neumann", int(m)])
        for i, pts in enumerate(batch.interface_points, start=1):
            for p in pts:
                w.writerow([repr(float(c)) for c in p] + ["interface", i])
