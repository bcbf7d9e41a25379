"""Benchmark elliptic interface problems with exact piecewise-quadratic solutions.

Each problem stores the diffusion coefficient per subdomain, a single source
value g with the convention div(kappa * grad u) = g, Dirichlet boundary data,
and per-interface jump data. Jumps use the bracket [[w]] = w_inner - w_outer,
where "inner" is the inclusion side and the interface normal points away from
the inclusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ipinn.geometry import Letter, LetterLayout, Rect, Sphere, default_letter_layout

EDGE_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticPiece:
    """u(x) = sum_i quad_i x_i^2 + sum_i lin_i x_i + const."""

    quad: np.ndarray
    lin: np.ndarray
    const: float

    def value(self, X: np.ndarray) -> np.ndarray:
        return (X * X) @ self.quad + X @ self.lin + self.const

    def grad(self, X: np.ndarray) -> np.ndarray:
        return 2.0 * X * self.quad + self.lin

    def laplacian(self) -> float:
        return float(2.0 * self.quad.sum())


def _piece(quad, lin=None, const=0.0) -> QuadraticPiece:
    quad = np.asarray(quad, dtype=np.float64)
    lin = np.zeros_like(quad) if lin is None else np.asarray(lin, dtype=np.float64)
    return QuadraticPiece(quad, lin, float(const))


@dataclass
class InterfaceSpec:
    """One internal interface between an inclusion ("inner") and its surround."""

    index: int
    name: str
    inner: int  # subdomain on the inclusion side; jumps are inner minus outer
    outer: int
    sampler: Callable[[int, int], np.ndarray]  # (count, seed) -> (k, d) on-surface points
    normal: Callable[[np.ndarray], np.ndarray]  # unit normals pointing away from inner
    on_surface: Callable[[np.ndarray], np.ndarray]  # bool per point
    jump_u: Callable[[np.ndarray], np.ndarray]  # p
    jump_flux: Callable[[np.ndarray], np.ndarray]  # q along normal()


@dataclass
class BoundaryFace:
    name: str
    subdomain: int
    sample: Callable[[int, np.random.Generator], np.ndarray]


@dataclass
class ProblemSpec:
    name: str
    dim: int
    M: int
    kappa: np.ndarray
    g: float
    bounds: tuple[np.ndarray, np.ndarray]
    pieces: list[QuadraticPiece]
    membership: Callable[[np.ndarray], np.ndarray]
    measures: np.ndarray
    interfaces: list[InterfaceSpec]
    dirichlet_faces: list[BoundaryFace]
    neumann_faces: list[BoundaryFace] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def analytical(self, m: int, x) -> float | np.ndarray:
        X, single = self._as_points(x)
        u = self.pieces[m - 1].value(X)
        return float(u[0]) if single else u

    def analytical_grad(self, m: int, x) -> np.ndarray:
        X, single = self._as_points(x)
        grad = self.pieces[m - 1].grad(X)
        return grad[0] if single else grad

    def analytical_lap(self, m: int) -> float:
        return self.pieces[m - 1].laplacian()

    def dirichlet_value(self, X: np.ndarray) -> np.ndarray:
        """Boundary data: the trace of the exact solution of the owning subdomain."""
        ms = self.membership(X)
        out = np.empty(X.shape[0])
        for m in np.unique(ms):
            rows = ms == m
            out[rows] = self.pieces[m - 1].value(X[rows])
        return out

    def _as_points(self, x):
        X = np.asarray(x, dtype=np.float64)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[1]}, problem is {self.dim}D")
        return X, single


# ---------------------------------------------------------------------------
# 1D: five segments of [0, 1] with interfaces at 0.2, 0.4, 0.6, 0.8
# ---------------------------------------------------------------------------

IFACE_1D = (0.2, 0.4, 0.6, 0.8)
KAPPA_1D = (1.0, 0.25, 0.9, 0.1, 0.8)


def solve_1d_coefficients(kappas: Sequence[float]) -> list[tuple[float, float, float]]:
    """Piecewise-quadratic coefficients (c0, c1, c2) per segment.

    c0_m = -1/(2 kappa_m) is forced by the equation; the remaining ten
    coefficients solve the linear system of the two boundary values and the
    value/flux continuity conditions at the four interfaces.
    """
    kap = np.asarray(kappas, dtype=np.float64)
    if kap.shape != (5,) or np.any(kap <= 0):
        raise ValueError(f"need 5 positive coefficients, got {kappas}")
    c0 = -1.0 / (2.0 * kap)
    # unknowns: [c1_1..c1_5, c2_1..c2_5]
    A = np.zeros((10, 10))
    rhs = np.zeros(10)
    A[0, 5] = 1.0  # u_1(0) = 0
    A[1, 4] = 1.0  # u_5(1) = 0
    A[1, 9] = 1.0
    rhs[1] = -c0[4]
    for k, x in enumerate(IFACE_1D):
        row = 2 + 2 * k
        # value continuity: u_k(x) = u_{k+1}(x)
        A[row, k] = x
        A[row, 5 + k] = 1.0
        A[row, k + 1] = -x
        A[row, 5 + k + 1] = -1.0
        rhs[row] = (c0[k + 1] - c0[k]) * x * x
        # flux continuity: kappa_k u_k'(x) = kappa_{k+1} u_{k+1}'(x)
        A[row + 1, k] = kap[k]
        A[row + 1, k + 1] = -kap[k + 1]
        rhs[row + 1] = 2.0 * (kap[k + 1] * c0[k + 1] - kap[k] * c0[k]) * x
    sol = np.linalg.solve(A, rhs)
    return [(float(c0[m]), float(sol[m]), float(sol[5 + m])) for m in range(5)]


def problem_1d() -> ProblemSpec:
    kappa = np.array(KAPPA_1D)
    coeffs = solve_1d_coefficients(kappa)
    pieces = [_piece([c0], [c1], c2) for c0, c1, c2 in coeffs]
    ifaces = np.array(IFACE_1D)

    def membership(X: np.ndarray) -> np.ndarray:
        return np.searchsorted(ifaces, X[:, 0], side="right").astype(np.int64) + 1

    def make_interface(k: int) -> InterfaceSpec:
        x_k = IFACE_1D[k]
        point = np.array([[x_k]])

        def sampler(count: int, seed: int) -> np.ndarray:
            return np.repeat(point, count, axis=0)

        return InterfaceSpec(
            index=k + 1,
            name=f"x={x_k}",
            inner=k + 2,  # right segment plays the inclusion role
            outer=k + 1,
            sampler=sampler,
            normal=lambda X: np.full((X.shape[0], 1), -1.0),
            on_surface=lambda X, x_k=x_k: np.abs(X[:, 0] - x_k) < EDGE_TOL,
            jump_u=lambda X: np.zeros(X.shape[0]),
            jump_flux=lambda X: np.zeros(X.shape[0]),
        )

    faces = [
        BoundaryFace("x=0", 1, lambda count, rng: np.zeros((1, 1))),
        BoundaryFace("x=1", 5, lambda count, rng: np.ones((1, 1))),
    ]
    return ProblemSpec(
        name="poisson1d",
        dim=1,
        M=5,
        kappa=kappa,
        g=-1.0,
        bounds=(np.array([0.0]), np.array([1.0])),
        pieces=pieces,
        membership=membership,
        measures=np.full(5, 0.2),
        interfaces=[make_interface(k) for k in range(4)],
        dirichlet_faces=faces,
    )


# ---------------------------------------------------------------------------
# 2D: four letter-shaped inclusions in [0, 1.7] x [0, 1]
# ---------------------------------------------------------------------------

# Note: the quadratic piece of subdomain 4 (x^2 + 5 y^2, laplacian 12) forces
# kappa_4 = 1/12 for div(kappa grad u) = 1 to hold there.
KAPPA_2D = (0.25, 1.0 / 6.0, 0.1, 1.0 / 12.0, 1.0 / 3.0)

PIECES_2D = (
    ((1.0, 1.0), None),
    ((3.0, 0.0), (0.0, 2.0)),
    ((4.0, 1.0), None),
    ((1.0, 5.0), None),
    ((0.5, 1.0), None),
)


def _letter_edges(letter: Letter):
    """All (start, end, outward normal, length) tuples of a letter's rectangles."""
    out = []
    for r in letter.rects:
        for a, b, n in r.edges():
            out.append((a, b, n, float(np.linalg.norm(b - a))))
    return out


def _allocate(total: int, sizes: np.ndarray) -> np.ndarray:
    """Largest-remainder split of `total` proportional to `sizes`."""
    raw = total * sizes / sizes.sum()
    base = np.floor(raw).astype(np.int64)
    rest = total - int(base.sum())
    if rest > 0:
        order = np.argsort(-(raw - base), kind="stable")
        base[order[:rest]] += 1
    return base


def _letter_interface(index: int, letter: Letter, inner: int, pieces, kappa) -> InterfaceSpec:
    edges = _letter_edges(letter)
    lengths = np.array([e[3] for e in edges])

    def sampler(count: int, seed: int) -> np.ndarray:
        per_edge = _allocate(count, lengths)
        pts = []
        for (a, b, _n, _l), k in zip(edges, per_edge):
            if k == 0:
                continue
            t = (np.arange(k) + 0.5) / k
            pts.append(a + t[:, None] * (b - a))
        return np.concatenate(pts, axis=0)

    def normal(X: np.ndarray) -> np.ndarray:
        out = np.full((X.shape[0], 2), np.nan)
        for a, b, n, _l in edges:
            fixed = 0 if a[0] == b[0] else 1
            free = 1 - fixed
            on = (
                (np.abs(X[:, fixed] - a[fixed]) < EDGE_TOL)
                & (X[:, free] >= min(a[free], b[free]) - EDGE_TOL)
                & (X[:, free] <= max(a[free], b[free]) + EDGE_TOL)
            )
            out[on & np.isnan(out[:, 0])] = n
        if np.isnan(out).any():
            raise ValueError(f"point not on interface {index}")
        return out

    def on_surface(X: np.ndarray) -> np.ndarray:
        ok = np.zeros(X.shape[0], dtype=bool)
        for a, b, _n, _l in edges:
            fixed = 0 if a[0] == b[0] else 1
            free = 1 - fixed
            ok |= (
                (np.abs(X[:, fixed] - a[fixed]) < EDGE_TOL)
                & (X[:, free] >= min(a[free], b[free]) - EDGE_TOL)
                & (X[:, free] <= max(a[free], b[free]) + EDGE_TOL)
            )
        return ok

    p_in, p_out = pieces[inner - 1], pieces[0]
    k_in, k_out = kappa[inner - 1], kappa[0]
    return InterfaceSpec(
        index=index,
        name=f"letter {letter.name}",
        inner=inner,
        outer=1,
        sampler=sampler,
        normal=normal,
        on_surface=on_surface,
        jump_u=lambda X: p_in.value(X) - p_out.value(X),
        jump_flux=lambda X: np.einsum(
            "ij,ij->i", k_in * p_in.grad(X) - k_out * p_out.grad(X), normal(X)
        ),
    )


def problem_2d_letters(layout: LetterLayout | None = None) -> ProblemSpec:
    layout = layout or default_letter_layout()
    layout.validate()
    if len(layout.letters) != 4:
        raise ValueError(f"expected 4 letter inclusions, got {len(layout.letters)}")
    kappa = np.array(KAPPA_2D)
    pieces = [_piece(q, l) for q, l in PIECES_2D]
    w, h = layout.domain

    def membership(X: np.ndarray) -> np.ndarray:
        ms = np.ones(X.shape[0], dtype=np.int64)
        for i, letter in enumerate(layout.letters):
            ms[(ms == 1) & letter.contains(X)] = i + 2
        return ms

    areas = np.array([letter.area for letter in layout.letters])
    measures = np.concatenate([[w * h - areas.sum()], areas])

    def edge_face(name, fixed_axis, fixed_val, lo, hi):
        def sample(count: int, rng: np.random.Generator) -> np.ndarray:
            pts = np.empty((count, 2))
            pts[:, fixed_axis] = fixed_val
            pts[:, 1 - fixed_axis] = rng.uniform(lo, hi, size=count)
            return pts

        return BoundaryFace(name, 1, sample)

    faces = [
        edge_face("x=0", 0, 0.0, 0.0, h),
        edge_face(f"x={w}", 0, w, 0.0, h),
        edge_face("y=0", 1, 0.0, 0.0, w),
        edge_face(f"y={h}", 1, h, 0.0, w),
    ]
    interfaces = [
        _letter_interface(i + 1, letter, i + 2, pieces, kappa)
        for i, letter in enumerate(layout.letters)
    ]
    return ProblemSpec(
        name="letters2d",
        dim=2,
        M=5,
        kappa=kappa,
        g=1.0,
        bounds=(np.zeros(2), np.array([w, h])),
        pieces=pieces,
        membership=membership,
        measures=measures,
        interfaces=interfaces,
        dirichlet_faces=faces,
        extras={"layout": layout},
    )


# ---------------------------------------------------------------------------
# 3D: eight spherical inclusions in [-1, 1]^3
# ---------------------------------------------------------------------------

SPHERE_RADIUS = 0.3
SPHERE_CENTERS = (
    (-0.5, -0.5, -0.5),
    (-0.5, 0.5, -0.5),
    (0.5, -0.5, -0.5),
    (0.5, 0.5, -0.5),
    (-0.5, -0.5, 0.5),
    (-0.5, 0.5, 0.5),
    (0.5, -0.5, 0.5),
    (0.5, 0.5, 0.5),
)

KAPPA_3D = (
    1.0 / 6.0,
    1.0 / 8.0,
    1.0 / 14.0,
    1.0 / 16.0,
    1.0 / 10.0,
    1.0 / 2.0,
    1.0 / 12.0,
    1.0 / 9.0,
    1.0 / 18.0,
)

PIECES_3D = (
    ((1.0, 1.0, 1.0), None),
    ((3.0, 0.0, 1.0), (0.0, 2.0, 0.0)),
    ((4.0, 1.0, 2.0), None),
    ((1.0, 5.0, 2.0), None),
    ((1.0, 3.0, 1.0), None),
    ((0.0, 1.0, 0.0), (2.0, 0.0, 2.0)),
    ((5.0, 0.0, 1.0), (0.0, 2.0, 0.0)),
    ((2.0, 2.0, 0.5), None),
    ((3.0, 5.0, 1.0), None),
)


def _sphere_interface(index: int, sphere: Sphere, inner: int, pieces, kappa) -> InterfaceSpec:
    p_in, p_out = pieces[inner - 1], pieces[0]
    k_in, k_out = kappa[inner - 1], kappa[0]
    return InterfaceSpec(
        index=index,
        name=f"sphere {inner}",
        inner=inner,
        outer=1,
        sampler=sphere.surface_points,
        normal=sphere.normals,
        on_surface=lambda X: np.abs(sphere.signed_distance(X)) < EDGE_TOL,
        jump_u=lambda X: p_in.value(X) - p_out.value(X),
        jump_flux=lambda X: np.einsum(
            "ij,ij->i", k_in * p_in.grad(X) - k_out * p_out.grad(X), sphere.normals(X)
        ),
    )


def problem_3d_spheres() -> ProblemSpec:
    kappa = np.array(KAPPA_3D)
    pieces = [_piece(q, l) for q, l in PIECES_3D]
    spheres = [Sphere(c, SPHERE_RADIUS) for c in SPHERE_CENTERS]

    def membership(X: np.ndarray) -> np.ndarray:
        ms = np.ones(X.shape[0], dtype=np.int64)
        for i, s in enumerate(spheres):
            ms[(ms == 1) & s.contains(X)] = i + 2
        return ms

    def level_set(X: np.ndarray) -> np.ndarray:
        return np.min(np.stack([s.signed_distance(X) for s in spheres]), axis=0)

    vol = np.array([s.volume for s in spheres])
    measures = np.concatenate([[8.0 - vol.sum()], vol])

    def cube_face(name, axis, val):
        def sample(count: int, rng: np.random.Generator) -> np.ndarray:
            pts = rng.uniform(-1.0, 1.0, size=(count, 3))
            pts[:, axis] = val
            return pts

        return BoundaryFace(name, 1, sample)

    faces = [
        cube_face(f"{ax}={v}", axis, v)
        for axis, ax in enumerate("xyz")
        for v in (-1.0, 1.0)
    ]
    interfaces = [
        _sphere_interface(i + 1, s, i + 2, pieces, kappa) for i, s in enumerate(spheres)
    ]
    return ProblemSpec(
        name="spheres3d",
        dim=3,
        M=9,
        kappa=kappa,
        g=1.0,
        bounds=(np.full(3, -1.0), np.full(3, 1.0)),
        pieces=pieces,
        membership=membership,
        measures=measures,
        interfaces=interfaces,
        dirichlet_faces=faces,
        extras={"spheres": spheres, "level_set": level_set},
    )


_FACTORIES = {
    "poisson1d": problem_1d,
    "letters2d": problem_2d_letters,
    "spheres3d": problem_3d_spheres,
}


def make_problem(name: str, layout: LetterLayout | None = None) -> ProblemSpec:
    if name not in _FACTORIES:
        raise ValueError(f"unknown problem {name!r}; valid: {', '.join(_FACTORIES)}")
    if name == "letters2d":
        return problem_2d_letters(layout)
    if layout is not None:
        raise ValueError(f"letter layout only applies to letters2d, not {name}")
    return _FACTORIES[name]()
