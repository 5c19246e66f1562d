import math

import numpy as np
import pytest

from spheremc import geometry as geo
from spheremc import targets
from spheremc.exact import sample_uniform


def make_targets(rng):
    means = np.stack([sample_uniform(6, rng) for _ in range(4)])
    waypoints = np.stack([sample_uniform(3, rng) for _ in range(5)])
    return [
        targets.Uniform(6),
        targets.Bingham(np.linspace(0.0, 8.0, 6)),
        targets.VonMisesFisher(sample_uniform(6, rng), 4.0),
        targets.VonMisesFisherMixture(means, 12.0),
        targets.CurvedVonMisesFisher.from_unordered_points(waypoints, 20.0),
    ]


def test_bingham_examples():
    b = targets.Bingham([0.0, 1.0, 2.0])
    u_top = np.array([0.0, 0.0, 1.0])
    u_bottom = np.array([1.0, 0.0, 0.0])
    assert b.log_p(u_top) == pytest.approx(2.0)
    assert b.log_p(u_bottom) == pytest.approx(0.0)
    x = np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0)
    assert b.log_p(x) == pytest.approx(1.5)
    assert b.sup_log_p() == 2.0


def test_bingham_symmetry_and_validation():
    rng = np.random.default_rng(0)
    b = targets.Bingham(np.linspace(0.0, 10.0, 5))
    for _ in range(100):
        x = sample_uniform(5, rng)
        assert b.log_p(x) == b.log_p(-x)
    with pytest.raises(ValueError):
        targets.Bingham([1.0, 2.0, 3.0])  # smallest not zero
    with pytest.raises(ValueError):
        targets.Bingham([0.0, 2.0, 1.0])  # not ascending


def test_bingham_diagonal_shift_invariance():
    # adding c to every eigenvalue shifts log_p by exactly c, so log-density
    # differences (hence the distribution) are unchanged
    rng = np.random.default_rng(1)
    kappas = np.array([0.0, 3.0, 7.0, 11.0])
    base = targets.Bingham(kappas)
    c = 5.0
    shifted_matrix = base._matrix + c * np.eye(4)
    for _ in range(100):
        x = sample_uniform(4, rng)
        y = sample_uniform(4, rng)
        shifted_x = float(x @ shifted_matrix @ x)
        shifted_y = float(y @ shifted_matrix @ y)
        assert shifted_x - base.log_p(x) == pytest.approx(c, abs=1e-12)
        assert (base.log_p(x) - base.log_p(y)) == pytest.approx(
            shifted_x - shifted_y, abs=1e-10
        )


def test_bingham_rotated_basis():
    rng = np.random.default_rng(2)
    basis = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    b = targets.Bingham([0.0, 1.0, 2.0, 6.0], basis)
    assert b.log_p(b.mode()) == pytest.approx(6.0)
    assert abs(b.mode() @ basis[:, -1]) == pytest.approx(1.0)


def test_vmf_examples():
    rng = np.random.default_rng(3)
    mu = sample_uniform(5, rng)
    t = targets.VonMisesFisher(mu, 7.0)
    assert t.log_p(mu) == pytest.approx(7.0)
    assert t.log_p(-mu) == pytest.approx(-7.0)
    perp = geo.sample_tangent(mu, rng)
    assert t.log_p(perp) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        targets.VonMisesFisher(mu, 0.0)


def test_mixture_single_component_equals_vmf():
    rng = np.random.default_rng(4)
    mu = sample_uniform(4, rng)
    mix = targets.VonMisesFisherMixture(mu[None, :], 9.0)
    vmf = targets.VonMisesFisher(mu, 9.0)
    for _ in range(20):
        x = sample_uniform(4, rng)
        assert mix.log_p(x) == pytest.approx(vmf.log_p(x), abs=1e-12)


def test_mixture_antipodal_symmetry_point():
    mu = np.array([1.0, 0.0, 0.0])
    mix = targets.VonMisesFisherMixture(np.stack([mu, -mu]), 5.0)
    x = np.array([0.0, 1.0, 0.0])
    assert mix.log_p(x) == pytest.approx(0.0, abs=1e-12)


def test_mixture_logsumexp_matches_direct_summation():
    rng = np.random.default_rng(5)
    means = np.stack([sample_uniform(8, rng) for _ in range(5)])
    for kappa in (1.0, 10.0, 30.0):
        mix = targets.VonMisesFisherMixture(means, kappa)
        for _ in range(50):
            x = sample_uniform(8, rng)
            direct = math.log(np.mean(np.exp(kappa * (means @ x))))
            assert mix.log_p(x) == pytest.approx(direct, abs=1e-12)


def test_mixture_dominant_component_at_high_concentration():
    rng = np.random.default_rng(6)
    means = np.stack([sample_uniform(10, rng) for _ in range(4)])
    kappa = 200.0
    mix = targets.VonMisesFisherMixture(means, kappa)
    value = mix.log_p(means[0])
    assert value == pytest.approx(kappa - math.log(4), abs=1e-3)
    assert mix.log_p(means[0]) < mix.sup_log_p()


def test_mixture_numerically_stable_at_extreme_kappa():
    rng = np.random.default_rng(7)
    means = np.stack([sample_uniform(5, rng) for _ in range(3)])
    mix = targets.VonMisesFisherMixture(means, 1e4)
    for _ in range(20):
        x = sample_uniform(5, rng)
        assert np.isfinite(mix.log_p(x))
        assert np.all(np.isfinite(mix.grad_log_p(x)))


def test_shortest_open_path_two_points_identity_tiebreak():
    pts = [np.eye(3)[0], np.eye(3)[1]]
    assert targets.shortest_open_path(pts) == [0, 1]


def test_shortest_open_path_midpoint_between_endpoints():
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    mid = geo.slerp(e1, e2, 0.5)
    order = targets.shortest_open_path([e1, e2, mid])
    assert order[1] == 2  # the midpoint is visited between the endpoints
    assert order == [0, 2, 1]  # lexicographic tie-break over the reversal


def test_shortest_open_path_matches_brute_force():
    rng = np.random.default_rng(8)
    for m in (4, 5, 6, 7):
        pts = [sample_uniform(3, rng) for _ in range(m)]
        assert targets.shortest_open_path(pts) == targets.brute_force_open_path(pts)


def test_shortest_open_path_beats_heuristic():
    rng = np.random.default_rng(9)
    pts = [sample_uniform(3, rng) for _ in range(10)]
    order = targets.shortest_open_path(pts)
    exact_len = targets.path_length(pts, order)
    heuristic_len = targets.nearest_neighbor_path_length(pts)
    assert exact_len <= heuristic_len + 1e-12


def test_shortest_open_path_size_limits():
    rng = np.random.default_rng(10)
    with pytest.raises(ValueError):
        targets.shortest_open_path([sample_uniform(3, rng)])
    with pytest.raises(ValueError):
        targets.shortest_open_path([sample_uniform(3, rng) for _ in range(13)])


def test_curve_max_inner_at_waypoints():
    rng = np.random.default_rng(11)
    pts = np.stack([sample_uniform(3, rng) for _ in range(5)])
    curve = targets.CurvedVonMisesFisher.from_unordered_points(pts, 10.0)
    for w in curve.waypoints:
        t, value = curve.max_inner(w)
        assert value == pytest.approx(1.0, abs=1e-10)
        assert np.abs(curve.curve_point(t) - w).max() <= 1e-6


def test_curve_max_inner_orthogonal_point():
    curve = targets.CurvedVonMisesFisher(np.eye(3)[:2], 5.0)
    t, value = curve.max_inner(np.array([0.0, 0.0, 1.0]))
    assert value == pytest.approx(0.0, abs=1e-12)
    assert t == 0.0


def test_curve_max_inner_matches_grid_search():
    rng = np.random.default_rng(12)
    curve = targets.CurvedVonMisesFisher(np.eye(3)[:2], 5.0)
    ts = np.linspace(0.0, 1.0, 100_001)
    arc = np.stack([curve.curve_point(t) for t in ts])
    for _ in range(25):
        x = sample_uniform(3, rng)
        _, value = curve.max_inner(x)
        grid_value = float(np.max(arc @ x))
        assert value >= grid_value - 1e-12
        assert value == pytest.approx(grid_value, abs=1e-8)


def test_curved_log_p_examples():
    rng = np.random.default_rng(13)
    pts = np.stack([sample_uniform(3, rng) for _ in range(6)])
    kappa = 30.0
    curve = targets.CurvedVonMisesFisher.from_unordered_points(pts, kappa)
    on_curve = curve.curve_point(0.37)
    assert curve.log_p(on_curve) == pytest.approx(kappa, abs=1e-8)
    far = -curve.waypoints[0]
    assert curve.log_p(far) < kappa
    x = sample_uniform(3, rng)
    ts = np.linspace(0.0, 1.0, 100_001)
    arc = np.stack([curve.curve_point(t) for t in ts])
    assert curve.log_p(x) == pytest.approx(kappa * float(np.max(arc @ x)), abs=kappa * 1e-8)


def test_curve_rejects_antipodal_neighbors():
    e = np.eye(3)
    with pytest.raises(ValueError):
        targets.CurvedVonMisesFisher(np.stack([e[0], -e[0]]), 5.0)


def _argmax_segment_stable(curve, x, w, h):
    eps = 1e-6
    states = []
    for theta in (-h, 0.0, h):
        t, _ = curve.max_inner(geo.geodesic_point(x, w, theta))
        scaled = t * curve.n_segments
        idx = min(int(scaled), curve.n_segments - 1)
        local = scaled - idx
        states.append((idx, eps < local < 1.0 - eps))
    return all(s == states[0] and s[1] for s in states)


def test_gradients_match_tangent_finite_differences():
    rng = np.random.default_rng(14)
    h = 1e-5
    for target in make_targets(rng):
        checked = 0
        attempts = 0
        while checked < 100 and attempts < 1000:
            attempts += 1
            x = sample_uniform(target.dim, rng)
            w = geo.sample_tangent(x, rng)
            if isinstance(target, targets.CurvedVonMisesFisher) and not _argmax_segment_stable(
                target, x, w, h
            ):
                continue
            numeric = (
                target.log_p(geo.geodesic_point(x, w, h))
                - target.log_p(geo.geodesic_point(x, w, -h))
            ) / (2.0 * h)
            analytic = float(target.grad_log_p(x) @ w)
            assert abs(analytic - numeric) <= 1e-5, type(target).__name__
            checked += 1
        assert checked == 100


def test_uniform_gradient_is_zero():
    t = targets.Uniform(5)
    assert np.all(t.grad_log_p(np.eye(5)[0]) == 0.0)
    assert t.log_p(np.eye(5)[2]) == 0.0


def test_sup_log_p_values():
    rng = np.random.default_rng(15)
    for target in make_targets(rng):
        sup = target.sup_log_p()
        for _ in range(200):
            assert target.log_p(sample_uniform(target.dim, rng)) <= sup + 1e-9
