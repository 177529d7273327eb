import numpy as np
import pytest

from phireg import audit
from phireg.deviations import (
    ConstantMap,
    FiniteDeviations,
    FnMap,
    IdentityMap,
    IndicatorProx,
    IntFamily,
    LinearProx,
    ProjFamily,
    QuadToAnchorProx,
    make_prox_family,
)
from phireg.games import EmpiricalDistribution
from phireg.geometry import Ball, Box, Interval, Simplex


def abs_traj(T=2, delta_set=Interval(-1.0, 1.0)):
    xs = np.array([[0.5 if t % 2 == 0 else -0.5] for t in range(T)])
    return audit.Trajectory(
        xs=xs,
        grads=np.sign(xs),
        loss_values=np.abs(xs[:, 0]),
        set=delta_set,
        loss_eval=lambda t, x: abs(float(x[0])),
        loss_kind="abs1d",
        loss_params={"kinks": [0.0]},
    )


def linear_traj(xs, grads, set_, **kw):
    xs = np.atleast_2d(xs)
    grads = np.atleast_2d(grads)
    return audit.Trajectory(
        xs=xs, grads=grads, loss_values=np.sum(grads * xs, axis=1),
        set=set_, loss_kind="linear", **kw,
    )


def test_external_regret_abs_example():
    rep = audit.external_regret(abs_traj(100))
    assert rep.total == 50.0
    np.testing.assert_allclose(rep.witness, [0.0])
    assert rep.exactness == "exact"


def test_external_regret_gd_linear_example():
    # descent iterates 0, -0.1, -0.2 under the loss x with comparator -1
    traj = linear_traj([[0.0], [-0.1], [-0.2]], np.ones((3, 1)), Interval(-1, 1))
    rep = audit.external_regret(traj)
    assert np.isclose(rep.total, 2.7)
    np.testing.assert_allclose(rep.witness, [-1.0])


def test_external_regret_zero_aggregate_gradient():
    grads = np.array([[1.0], [-1.0]])
    traj = linear_traj([[0.3], [0.3]], grads, Interval(-1, 1))
    rep = audit.external_regret(traj)
    # comparator term vanishes: regret equals the summed played losses
    assert np.isclose(rep.total, float(np.sum(traj.loss_values)))


def test_proximal_regret_examples():
    traj = abs_traj(2)
    rep = audit.proximal_regret(traj, LinearProx([0.25]))
    assert rep.total == 0.0
    whole = IndicatorProx(Interval(-1.0, 1.0))
    rep2 = audit.proximal_regret(traj, whole)
    assert rep2.total == 0.0  # prox is the identity on the feasible set


def test_proximal_regret_neg_quadratic():
    T, L, delta = 100, 1.0, 0.3
    xs = np.zeros((T, 1))
    traj = audit.Trajectory(
        xs=xs, grads=-L * xs, loss_values=np.zeros(T), set=Interval(-1, 1),
        loss_eval=lambda t, x: -0.5 * L * float(x[0]) ** 2,
        loss_kind="neg_quadratic_1d",
    )
    rep = audit.proximal_regret(traj, LinearProx([delta]))
    assert np.isclose(rep.total, 0.5 * delta**2 * L * T, atol=1e-12)


def test_finite_phi_regret_examples():
    traj = abs_traj(2)
    ident = FiniteDeviations([IdentityMap()])
    assert audit.finite_phi_regret(traj, ident).total == 0.0
    zero = FiniteDeviations([FnMap("zero", lambda x: np.zeros_like(x))])
    assert audit.finite_phi_regret(traj, zero).total == 1.0
    both = FiniteDeviations([IdentityMap(), FnMap("zero", lambda x: np.zeros_like(x))])
    rep = audit.finite_phi_regret(traj, both)
    assert rep.total == 1.0 and rep.witness.name == "zero"


def test_finite_phi_regret_dominates_each_member():
    rng = np.random.default_rng(0)
    box = Box([0, 0], [1, 1])
    xs = box.sample(rng, 50)
    grads = rng.standard_normal((50, 2))
    traj = linear_traj(xs, grads, box)
    members = [IdentityMap(), ConstantMap([0.2, 0.8]), ConstantMap([1.0, 0.0])]
    fam = FiniteDeviations(members)
    best = audit.finite_phi_regret(traj, fam).total
    for phi in members:
        single = audit.finite_phi_regret(traj, FiniteDeviations([phi])).total
        assert best >= single - 1e-12


def test_external_equals_proximal_with_point_indicator():
    # the external comparator is the prox of the indicator of that point
    rng = np.random.default_rng(1)
    box = Box([-1, -1], [1, 1])
    for _ in range(100):
        xs = box.sample(rng, 20)
        grads = rng.standard_normal((20, 2))
        traj = linear_traj(xs, grads, box)
        ext = audit.external_regret(traj)
        point = ext.witness
        f = IndicatorProx(Box(point, point))
        prox_rep = audit.proximal_regret(traj, f)
        assert np.isclose(ext.total, prox_rep.total, atol=1e-9)


def test_int_regret_exact_linear():
    rng = np.random.default_rng(2)
    box = Box([0, 0], [1, 1])
    xs = box.sample(rng, 64)
    grads = rng.standard_normal((64, 2))
    traj = linear_traj(xs, grads, box)
    delta = 0.3
    rep = audit.int_regret(traj, delta)
    # brute-force over a lambda/target grid never beats the closed form
    lam_max = delta / box.diameter()
    best = 0.0
    for lam in np.linspace(0, lam_max, 7):
        for target in box.sample(rng, 200):
            gain = float(np.sum([grads[t] @ (xs[t] - ((1 - lam) * xs[t] + lam * target)) for t in range(64)]))
            best = max(best, gain)
    assert rep.total >= best - 1e-9
    assert rep.exactness == "exact"


def test_beam_regret_triangle_lower_bound():
    from phireg.geometry import Triangle2D

    tri = Triangle2D((0, 0), (1, 1), (0.2, 0))
    rng = np.random.default_rng(3)
    xs = tri.sample(rng, 40)
    grads = rng.standard_normal((40, 2))
    traj = linear_traj(xs, grads, tri)
    rep = audit.beam_regret(traj, 0.2, n_directions=16)
    assert rep.exactness == "lower_bound"
    v = rep.witness["v"]
    gains = []
    for t in range(40):
        lam = tri.ray_max_step(xs[t], -v)
        gains.append(float(grads[t] @ (lam * v)))
    assert np.isclose(rep.total, np.sum(gains), atol=1e-8)


def test_linearized_gain_int_example():
    # point mass at 0.5 with unit utility gradient on [0, 1]
    emp = EmpiricalDistribution([[[0.5]]], [[[1.0]]], [Interval(0, 1)])
    gain, exact, witness = audit.linearized_gain(emp, 0, IntFamily(0.5))
    assert np.isclose(gain, 0.25)
    assert exact == "exact"
    assert np.isclose(witness["lam"], 0.5)
    np.testing.assert_allclose(witness["target"], [1.0])


def test_linearized_gain_zero_at_stationary_point():
    emp = EmpiricalDistribution([[[0.5, 0.5]]], [[[0.0, 0.0]]], [Box([0, 0], [1, 1])])
    for fam in (IntFamily(0.3), ProjFamily(0.3)):
        gain, _, _ = audit.linearized_gain(emp, 0, fam)
        assert abs(gain) <= 1e-12


def test_linearized_gain_proj_interior_exact():
    # all support interior by margin delta: gain = delta * ||mean gradient||
    rng = np.random.default_rng(4)
    box = Box([0, 0], [1, 1])
    X = 0.4 + 0.2 * rng.uniform(size=(30, 2))
    U = np.tile([0.3, -0.1], (30, 1))
    emp = EmpiricalDistribution([X], [U], [box])
    gain, exact, _ = audit.linearized_gain(emp, 0, ProjFamily(0.1))
    assert exact == "exact"
    assert np.isclose(gain, 0.1 * np.linalg.norm([0.3, -0.1]), atol=1e-9)


def test_linearized_gain_finite_enumeration():
    X = np.array([[0.2], [0.8]])
    U = np.array([[1.0], [1.0]])
    emp = EmpiricalDistribution([X], [U], [Interval(0, 1)])
    fam = FiniteDeviations([IdentityMap(), ConstantMap([1.0])])
    gain, exact, witness = audit.linearized_gain(emp, 0, fam)
    assert exact == "exact"
    assert np.isclose(gain, np.mean([1.0 - 0.2, 1.0 - 0.8]))


def test_tree_decomposition_identity():
    rng = np.random.default_rng(5)
    log = []
    for _ in range(50):
        r = rng.uniform(size=4)
        p = rng.dirichlet(np.ones(4))
        log.append((np.zeros(1), float(rng.uniform()), r, p))
    out = audit.tree_decomposition(log)
    assert out["identity_residual"] <= 1e-12


def test_gd_prox_bound_holds_on_random_runs():
    rng = np.random.default_rng(6)
    ball = Ball(np.zeros(3), 1.0)
    fam = make_prox_family(ball, rng)
    T, eta = 256, 0.05
    grads = rng.standard_normal((T, 3))
    grads /= np.linalg.norm(grads, axis=1, keepdims=True)
    xs = np.empty((T + 1, 3))
    xs[0] = np.zeros(3)
    for t in range(T):
        xs[t + 1] = ball.project(xs[t] - eta * grads[t])
    traj = audit.Trajectory(
        xs=xs[:T], grads=grads, loss_values=np.sum(grads * xs[:T], axis=1),
        set=ball, final_x=xs[T], loss_kind="linear", meta={"eta": eta},
    )
    for f in fam.members():
        out = audit.check_gd_prox_bound(traj, f)
        assert out["slack"] >= -1e-9


def test_gd_prox_bound_requires_final_iterate():
    traj = linear_traj([[0.0]], [[1.0]], Interval(-1, 1))
    with pytest.raises(ValueError):
        audit.gd_prox_bound_series(traj, LinearProx([0.1]), eta=0.1)


def test_md_bound_holds():
    rng = np.random.default_rng(7)
    d, T, eta = 4, 128, 0.1
    from phireg.learners import MirrorDescentLearner, StepSchedule

    md = MirrorDescentLearner(d, StepSchedule.constant(eta))
    grads = rng.uniform(-1, 1, size=(T, d))
    xs = np.empty((T + 1, d))
    for t in range(T):
        xs[t] = md.next()
        md.observe(grads[t])
    xs[T] = md.next()
    traj = audit.Trajectory(
        xs=xs[:T], grads=grads, loss_values=np.sum(grads * xs[:T], axis=1),
        set=Simplex(d), final_x=xs[T], loss_kind="linear",
    )
    f = QuadToAnchorProx(0.3, np.full(d, 1.0 / d))
    out = audit.check_md_bound(traj, f, eta=eta, G=1.0)
    assert out["slack"] >= -1e-9


def test_conv_regret_quadratic_matches_multistart():
    rng = np.random.default_rng(8)
    box = Box([0, 0], [1, 1])
    maps = [ConstantMap(box.sample(rng, 1)[0]) for _ in range(3)] + [IdentityMap()]
    xs = box.sample(rng, 60)
    center = np.array([0.5, 0.5])
    curvature = 4.0 / 3.0
    total, weights = audit.conv_regret_quadratic(xs, maps, curvature, center)

    # independent multistart projected-ascent oracle over the weight simplex,
    # evaluating the mixture images directly
    Phi = np.stack([np.vstack([phi.apply(x) for x in xs]) for phi in maps], axis=2)  # (T,2,4)
    base = np.sum((xs - center) ** 2, axis=1)

    def objective(p):
        Y = Phi @ p
        return float(curvature * np.sum(base - np.sum((Y - center) ** 2, axis=1)))

    from phireg.geometry import project_simplex

    best = -np.inf
    for _ in range(20):
        p = rng.dirichlet(np.ones(4))
        for _ in range(200):
            Y = Phi @ p
            grad = -2.0 * curvature * np.einsum("td,tdm->m", Y - center, Phi)
            p = project_simplex(p + 0.05 * grad)
        best = max(best, objective(p))
    assert total >= best - 1e-7
    assert np.isclose(total, objective(weights), atol=1e-8)


def test_fit_growth_exponent():
    ts = np.arange(10, 1000)
    assert abs(audit.fit_growth_exponent(ts, 3.0 * np.sqrt(ts)) - 0.5) < 1e-9
    assert abs(audit.fit_growth_exponent(ts, 0.2 * ts) - 1.0) < 1e-9
    with pytest.raises(ValueError):
        audit.fit_growth_exponent([1, 2], [-1.0, -2.0])


def test_trajectory_validation():
    with pytest.raises(ValueError):
        audit.Trajectory(xs=np.zeros((3, 1)), grads=np.zeros((2, 1)), loss_values=np.zeros(3))
    with pytest.raises(ValueError):
        audit.Trajectory(
            xs=np.array([[5.0]]), grads=np.zeros((1, 1)), loss_values=np.zeros(1),
            set=Interval(-1, 1),
        )
