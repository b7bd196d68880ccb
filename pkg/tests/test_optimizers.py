import numpy as np
import pytest

from wahtor.optimizers import (
    ObjectiveHandle,
    OptimizationError,
    minimize_bfgs,
    newton_step,
    steihaug_cg,
    trust_region_minimize,
)


def quadratic_handle(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return ObjectiveHandle(
        dimension=b.size,
        value=lambda x: 0.5 * float(x @ a @ x) + float(b @ x),
        gradient=lambda x: a @ x + b,
        hessian=lambda x: a,
    )


def rosenbrock_handle():
    def f(x):
        return float((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)

    def grad(x):
        return np.array(
            [
                -2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2),
                200 * (x[1] - x[0] ** 2),
            ]
        )

    def hess(x):
        return np.array(
            [
                [2 - 400 * (x[1] - x[0] ** 2) + 800 * x[0] ** 2, -400 * x[0]],
                [-400 * x[0], 200.0],
            ]
        )

    return ObjectiveHandle(dimension=2, value=f, gradient=grad, hessian=hess)


# ---------------------------------------------------------------------------
# BFGS
# ---------------------------------------------------------------------------

def test_bfgs_scalar_parabola():
    obj = ObjectiveHandle(dimension=1, value=lambda x: float((x[0] - 3.0) ** 2))
    report = minimize_bfgs(obj, np.zeros(1), grad_tol=1e-10, f_tol=1e-14)
    assert report.x_opt[0] == pytest.approx(3.0, abs=1e-8)
    assert report.converged


def test_bfgs_rosenbrock():
    report = minimize_bfgs(rosenbrock_handle(), np.array([-1.2, 1.0]), grad_tol=1e-8, f_tol=1e-12)
    assert np.abs(report.x_opt - 1.0).max() < 1e-5
    assert report.iterations < 200


def test_bfgs_quadratic_termination(rng):
    for n in (2, 4, 6):
        raw = rng.normal(size=(n, n))
        a = raw @ raw.T + n * np.eye(n)
        b = rng.normal(size=n)
        obj = quadratic_handle(a, b)
        report = minimize_bfgs(obj, rng.normal(size=n), grad_tol=1e-9, f_tol=1e-13)
        assert report.converged
        assert report.iterations <= n + 2
        assert np.abs(report.x_opt - np.linalg.solve(a, -b)).max() < 1e-6


def test_bfgs_forward_difference_fallback():
    obj = ObjectiveHandle(dimension=2, value=lambda x: float(np.sum((x - 2.0) ** 2)))
    report = minimize_bfgs(obj, np.zeros(2), grad_tol=1e-6, f_tol=1e-12)
    assert np.abs(report.x_opt - 2.0).max() < 1e-5
    assert obj.ngev == 0  # no gradient callback existed


def test_bfgs_aborts_on_non_finite():
    obj = ObjectiveHandle(dimension=1, value=lambda x: float("nan"))
    with pytest.raises(OptimizationError):
        minimize_bfgs(obj, np.zeros(1))


def test_bfgs_monotone_trace():
    seen = []
    minimize_bfgs(
        rosenbrock_handle(),
        np.array([-1.2, 1.0]),
        callback=lambda k, x, f: seen.append(f),
    )
    assert all(b <= a + 1e-12 for a, b in zip(seen, seen[1:]))


def test_evaluation_counters_track_invocations():
    calls = {"f": 0, "g": 0}

    def f(x):
        calls["f"] += 1
        return float(np.sum(x**2))

    def g(x):
        calls["g"] += 1
        return 2 * x

    obj = ObjectiveHandle(dimension=2, value=f, gradient=g)
    minimize_bfgs(obj, np.array([1.0, -2.0]))
    assert obj.nfev == calls["f"]
    assert obj.ngev == calls["g"]


# ---------------------------------------------------------------------------
# Newton step
# ---------------------------------------------------------------------------

def test_newton_identity_hessian():
    step, fallback = newton_step(np.array([2.0, 0.0]), np.eye(2))
    assert np.allclose(step, [-2.0, 0.0])
    assert not fallback


def test_newton_lands_on_quadratic_minimizer(rng):
    n = 5
    raw = rng.normal(size=(n, n))
    a = raw @ raw.T + n * np.eye(n)
    b = rng.normal(size=n)
    x = rng.normal(size=n)
    gradient = a @ x + b
    step, fallback = newton_step(gradient, a)
    assert not fallback
    assert np.abs((x + step) - np.linalg.solve(a, -b)).max() < 1e-10


def test_newton_spd_solve_residual(rng):
    n = 6
    raw = rng.normal(size=(n, n))
    a = raw @ raw.T + 0.5 * np.eye(n)
    g = rng.normal(size=n)
    step, fallback = newton_step(g, a)
    assert not fallback
    assert np.linalg.norm(a @ step + g) / np.linalg.norm(g) < 1e-10


def test_newton_shifts_indefinite_to_descent(rng):
    for _ in range(10):
        n = 4
        raw = rng.normal(size=(n, n))
        h = 0.5 * (raw + raw.T)
        h -= (np.linalg.eigvalsh(h)[0] + 1.0) * np.eye(n)  # force lambda_min = -1
        assert np.linalg.eigvalsh(h)[0] == pytest.approx(-1.0, abs=1e-10)
        g = rng.normal(size=n)
        step, fallback = newton_step(g, h)
        assert not fallback
        assert float(step @ g) < 0.0  # descent direction


# ---------------------------------------------------------------------------
# trust region
# ---------------------------------------------------------------------------

def test_trust_region_first_step_is_newton_for_wide_radius(rng):
    n = 3
    raw = rng.normal(size=(n, n))
    a = raw @ raw.T + n * np.eye(n)
    b = rng.normal(size=n)
    x0 = rng.normal(size=n)
    newton_target = np.linalg.solve(a, -b)

    seen = []
    trust_region_minimize(
        quadratic_handle(a, b),
        x0,
        radius0=1e3,
        max_radius=1e3,
        callback=lambda k, x, f: seen.append(x.copy()),
    )
    first_accepted = seen[1]  # seen[0] is x0
    assert np.abs(first_accepted - newton_target).max() < 1e-8


def test_trust_region_rosenbrock():
    report = trust_region_minimize(rosenbrock_handle(), np.array([-1.2, 1.0]))
    assert np.abs(report.x_opt - 1.0).max() < 1e-5


def test_trust_region_escapes_saddle():
    # f = x^2 - y^2 + y^4/2 has a saddle at the origin: zero gradient,
    # indefinite Hessian; negative curvature must be taken
    def f(x):
        return float(x[0] ** 2 - x[1] ** 2 + 0.5 * x[1] ** 4)

    def grad(x):
        return np.array([2 * x[0], -2 * x[1] + 2 * x[1] ** 3])

    def hess(x):
        return np.array([[2.0, 0.0], [0.0, -2.0 + 6 * x[1] ** 2]])

    obj = ObjectiveHandle(dimension=2, value=f, gradient=grad, hessian=hess)
    report = trust_region_minimize(obj, np.zeros(2))
    assert report.f_opt < -0.49  # true minima at y = +-1 with f = -1/2
    assert report.f_opt <= 0.0


def test_trust_region_monotone_decrease():
    seen = []
    trust_region_minimize(
        rosenbrock_handle(),
        np.array([-1.2, 1.0]),
        callback=lambda k, x, f: seen.append(f),
    )
    assert all(b <= a + 1e-12 for a, b in zip(seen, seen[1:]))


def test_steihaug_respects_radius(rng):
    for _ in range(20):
        n = 5
        raw = rng.normal(size=(n, n))
        h = 0.5 * (raw + raw.T)
        g = rng.normal(size=n)
        radius = 0.5
        step, hit = steihaug_cg(g, h, radius)
        assert np.linalg.norm(step) <= radius + 1e-10
        model = float(g @ step) + 0.5 * float(step @ h @ step)
        assert model <= 1e-12  # never worse than staying put


def test_steihaug_zero_gradient_negative_curvature():
    h = np.diag([1.0, -2.0])
    step, hit = steihaug_cg(np.zeros(2), h, 0.7)
    assert hit
    assert np.linalg.norm(step) == pytest.approx(0.7, abs=1e-12)
    assert float(step @ h @ step) < 0.0
