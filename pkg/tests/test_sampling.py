import numpy as np
import pytest

from ipinn.sampling import (
    Batch,
    SamplingCounts,
    batch_to_csv,
    build_batch,
    default_counts,
)


def _equal_batches(a: Batch, b: Batch) -> bool:
    if any((x != y).any() for x, y in zip(a.interior, b.interior)):
        return False
    if (a.dirichlet_points != b.dirichlet_points).any():
        return False
    return all((x == y).all() for x, y in zip(a.interface_points, b.interface_points))


def test_1d_grid_partition(prob1d):
    batch = build_batch(prob1d, default_counts(prob1d), seed=0)
    # 131 grid points: 125 interior (25 per subdomain), 2 boundary, 4 interface
    sizes = [pts.shape[0] for pts in batch.interior]
    assert sizes == [25] * 5
    all_x = np.sort(np.concatenate([p[:, 0] for p in batch.interior]))
    grid = np.arange(131) / 130.0
    interface_x = [0.2, 0.4, 0.6, 0.8]
    expected = np.array([x for x in grid if x not in (0.0, 1.0) and x not in interface_x])
    assert (all_x == expected).all()
    assert (batch.dirichlet_points[:, 0] == [0.0, 1.0]).all()
    assert [p[0, 0] for p in batch.interface_points] == interface_x
    for m, pts in enumerate(batch.interior, start=1):
        assert (prob1d.membership(pts) == m).all()


def test_1d_interface_points_exact(prob1d):
    batch = build_batch(prob1d, default_counts(prob1d), seed=0)
    for pts in batch.interface_points:
        assert pts.shape == (1, 1)


@pytest.mark.parametrize("fixture", ["prob2d", "prob3d"])
def test_batch_determinism(fixture, request):
    problem = request.getfixturevalue(fixture)
    counts = SamplingCounts(interior=600, boundary=10, interface=20)
    a = build_batch(problem, counts, seed=42)
    b = build_batch(problem, counts, seed=42)
    assert _equal_batches(a, b)
    c = build_batch(problem, counts, seed=43)
    assert not _equal_batches(a, c)


@pytest.mark.parametrize("fixture", ["prob2d", "prob3d"])
def test_interior_membership_counts_and_floor(fixture, request):
    problem = request.getfixturevalue(fixture)
    counts = default_counts(problem)
    batch = build_batch(problem, counts, seed=1)
    total = 0
    for m, pts in enumerate(batch.interior, start=1):
        assert pts.shape[0] >= 50
        assert (problem.membership(pts) == m).all()
        total += pts.shape[0]
    assert total == counts.interior


def test_3d_interface_points_on_surface(prob3d):
    batch = build_batch(prob3d, SamplingCounts(600, 10, 50), seed=3)
    psi = prob3d.extras["level_set"]
    for pts in batch.interface_points:
        assert np.abs(psi(pts)).max() < 1e-12


def test_boundary_points_on_faces_exactly(prob2d, prob3d):
    for problem in (prob2d, prob3d):
        batch = build_batch(problem, SamplingCounts(600, 17, 20), seed=5)
        pts = batch.dirichlet_points
        lo, hi = problem.bounds
        on_face = np.zeros(pts.shape[0], dtype=bool)
        for axis in range(problem.dim):
            on_face |= (pts[:, axis] == lo[axis]) | (pts[:, axis] == hi[axis])
        assert on_face.all()
        assert pts.shape[0] == 17 * len(problem.dirichlet_faces)


def test_dirichlet_values_match_exact_solution(prob2d):
    batch = build_batch(prob2d, SamplingCounts(600, 10, 20), seed=6)
    ref = prob2d.analytical(1, batch.dirichlet_points)
    assert (batch.dirichlet_values == ref).all()


def test_counts_validation():
    with pytest.raises(ValueError):
        SamplingCounts(interior=0, boundary=1, interface=1)


def test_batch_csv_dump(tmp_path, prob1d):
    batch = build_batch(prob1d, default_counts(prob1d), seed=0)
    path = tmp_path / "batch.csv"
    batch_to_csv(batch, str(path), header_comment="config={}")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == "x,role,id"
    assert len(lines) == 2 + 125 + 2 + 4
    roles = {line.split(",")[1] for line in lines[2:]}
    assert roles == {"interior", "dirichlet", "interface"}
