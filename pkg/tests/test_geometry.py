import numpy as np
import pytest

from phireg.geometry import (
    Ball,
    Box,
    Interval,
    NonnegL1Ball,
    Simplex,
    Triangle2D,
    set_from_config,
)

ALL_SETS = [
    Interval(-1.0, 1.0),
    Box([0.0, 0.0], [1.0, 1.0]),
    Ball([0.0, 0.0, 0.0], 1.5),
    Simplex(3),
    NonnegL1Ball(3, 1.0),
    Triangle2D((0.0, 0.0), (1.0, 1.0), (0.2, 0.0)),
]


def polytope_project(p, A_ub, b_ub):
    """Independent exact oracle: nearest point subject to A_ub y <= b_ub, by
    enumerating active sets and solving each face's equality-constrained
    least-squares system."""
    import itertools

    p = np.asarray(p, dtype=float)
    m, d = A_ub.shape
    best, best_d = None, np.inf
    for r in range(m + 1):
        for active in itertools.combinations(range(m), r):
            if r == 0:
                y = p.copy()
            else:
                A = A_ub[list(active)]
                # KKT: y = p - A' mu with A y = b on the active face
                M = A @ A.T
                try:
                    mu = np.linalg.solve(M, A @ p - b_ub[list(active)])
                except np.linalg.LinAlgError:
                    continue
                y = p - A.T @ mu
            if np.all(A_ub @ y <= b_ub + 1e-10):
                dist = np.linalg.norm(y - p)
                if dist < best_d:
                    best, best_d = y, dist
    return best


def test_project_examples():
    np.testing.assert_allclose(Box([0, 0], [1, 1]).project([1.5, 0.5]), [1.0, 0.5])
    np.testing.assert_allclose(Simplex(2).project([0.8, 0.8]), [0.5, 0.5])
    np.testing.assert_allclose(NonnegL1Ball(2, 1.0).project([1.0, 1.0]), [0.5, 0.5], atol=1e-12)


def test_l1_ball_projection_matches_active_set_oracle():
    # {y >= 0, sum y <= 1} as half-planes: -y1 <= 0, -y2 <= 0, y1 + y2 <= 1
    A_ub = np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]])
    b_ub = np.array([0.0, 0.0, 1.0])
    set_ = NonnegL1Ball(2, 1.0)
    rng = np.random.default_rng(3)
    for p in np.vstack([[[1.0, 1.0]], rng.normal(scale=1.5, size=(50, 2))]):
        got = set_.project(p)
        ref = polytope_project(p, A_ub, b_ub)
        assert np.linalg.norm(got - ref) < 1e-10
    np.testing.assert_allclose(set_.project([1.0, 1.0]), [0.5, 0.5], atol=1e-12)


def test_support_maximizer_examples():
    p, v = Simplex(2).support_maximizer([1.0, -2.0])
    np.testing.assert_allclose(p, [1.0, 0.0])
    assert v == 1.0
    p, v = Box([0, 0], [1, 1]).support_maximizer([1.0, -2.0])
    np.testing.assert_allclose(p, [1.0, 0.0])
    assert v == 1.0
    p, v = Ball([0.0, 0.0], 1.0).support_maximizer([1.0, -2.0])
    np.testing.assert_allclose(p, np.array([1.0, -2.0]) / np.sqrt(5))
    assert np.isclose(v, np.sqrt(5))


def test_support_maximizer_tie_breaks_lexicographically():
    p, _ = Simplex(3).support_maximizer([1.0, 1.0, 0.0])
    np.testing.assert_allclose(p, [0.0, 1.0, 0.0])  # (0,1,0) < (1,0,0)
    p, _ = Box([0, 0], [1, 1]).support_maximizer([0.0, 1.0])
    np.testing.assert_allclose(p, [0.0, 1.0])


def test_diameters():
    assert np.isclose(Box([0] * 4, [1] * 4).diameter(), 2.0)
    assert Ball([0, 0], 2.0).diameter() == 4.0
    assert np.isclose(Simplex(3).diameter(), np.sqrt(2.0))
    assert np.isclose(NonnegL1Ball(3, 1.0).diameter(), np.sqrt(2.0))
    # derived: max over vertex pairs
    verts = np.eye(4)
    pair_max = max(
        np.linalg.norm(verts[i] - verts[j]) for i in range(4) for j in range(i + 1, 4)
    )
    assert np.isclose(Simplex(4).diameter(), pair_max)


@pytest.mark.parametrize("set_", ALL_SETS, ids=lambda s: s.kind)
def test_projection_idempotent(set_):
    rng = np.random.default_rng(0)
    pts = rng.normal(scale=2.0, size=(200, set_.dimension))
    proj = set_.project(pts)
    again = set_.project(proj)
    assert np.max(np.linalg.norm(proj - again, axis=1)) <= 1e-12


@pytest.mark.parametrize("set_", ALL_SETS, ids=lambda s: s.kind)
def test_projection_nonexpansive(set_):
    rng = np.random.default_rng(1)
    P = rng.normal(scale=2.0, size=(10_000, set_.dimension))
    Q = rng.normal(scale=2.0, size=(10_000, set_.dimension))
    dp = np.linalg.norm(set_.project(P) - set_.project(Q), axis=1)
    d = np.linalg.norm(P - Q, axis=1)
    assert np.all(dp <= d + 1e-10)


@pytest.mark.parametrize("set_", ALL_SETS, ids=lambda s: s.kind)
def test_projection_variational_optimality(set_):
    rng = np.random.default_rng(2)
    outside = rng.normal(scale=2.0, size=(20, set_.dimension))
    ys = set_.sample(rng, 1000)
    for p in outside:
        pp = set_.project(p)
        inner = (ys - pp) @ (p - pp)
        assert np.max(inner) <= 1e-9


@pytest.mark.parametrize("set_", ALL_SETS, ids=lambda s: s.kind)
def test_support_value_dominates_samples(set_):
    rng = np.random.default_rng(3)
    ys = set_.sample(rng, 500)
    for _ in range(20):
        d = rng.standard_normal(set_.dimension)
        _, val = set_.support_maximizer(d)
        assert val >= np.max(ys @ d) - 1e-9


@pytest.mark.parametrize("set_", ALL_SETS, ids=lambda s: s.kind)
def test_samples_are_feasible(set_):
    rng = np.random.default_rng(4)
    for y in set_.sample(rng, 500):
        assert set_.contains(y, tol=1e-9)


def test_invalid_constructions():
    with pytest.raises(ValueError):
        Interval(1.0, -1.0)
    with pytest.raises(ValueError):
        Ball([0.0], 0.0)
    with pytest.raises(ValueError):
        NonnegL1Ball(2, 0.0)
    with pytest.raises(ValueError):
        Triangle2D((0, 0), (1, 1), (2, 2))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        Box([0, 0], [1, 1]).project([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        Simplex(3).support_maximizer([1.0])


def test_config_round_trip():
    for set_ in ALL_SETS:
        clone = set_from_config(set_.to_config())
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(10, set_.dimension))
        np.testing.assert_allclose(set_.project(pts), clone.project(pts))


def test_ray_max_step_triangle_closed_form_matches_bisection():
    tri = Triangle2D((0.0, 0.0), (1.0, 1.0), (0.2, 0.0))
    rng = np.random.default_rng(6)
    xs = tri.sample(rng, 50)
    for x in xs:
        d = rng.standard_normal(2)
        d /= np.linalg.norm(d)
        closed = tri.ray_max_step(x, 0.3 * d)
        generic = Triangle2D.__mro__[1].ray_max_step(tri, x, 0.3 * d)
        assert abs(closed - generic) < 1e-9
