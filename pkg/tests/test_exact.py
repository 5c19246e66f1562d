import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from spheremc import exact
from spheremc.errors import RejectionLimitError


def vmf_cosine_cdf_s2(kappa):
    """Closed-form CDF of <mu, x> for the vMF law on the 2-sphere."""

    def cdf(w):
        return (np.exp(kappa * np.asarray(w)) - math.exp(-kappa)) / (
            math.exp(kappa) - math.exp(-kappa)
        )

    return cdf


def test_uniform_sampler_unit_norm_and_mean():
    rng = np.random.default_rng(0)
    draws = np.stack([exact.sample_uniform(3, rng) for _ in range(100_000)])
    assert np.abs(np.linalg.norm(draws, axis=1) - 1.0).max() <= 1e-12
    assert np.linalg.norm(draws.mean(axis=0)) < 0.02


def test_uniform_sampler_equal_area_chi_square():
    # exact equal-area cells on the 2-sphere: z-bands x azimuth sectors
    rng = np.random.default_rng(1)
    draws = np.stack([exact.sample_uniform(3, rng) for _ in range(100_000)])
    zi = np.minimum((0.5 * (draws[:, 2] + 1.0) * 8).astype(int), 7)
    ai = np.minimum(
        ((np.arctan2(draws[:, 1], draws[:, 0]) + math.pi) / (2 * math.pi) * 6).astype(int), 5
    )
    counts = np.bincount(zi * 6 + ai, minlength=48)
    assert stats.chisquare(counts).pvalue > 0.01


def test_vmf_cosine_matches_closed_form_cdf():
    rng = np.random.default_rng(2)
    kappa = 3.5
    sampler = exact.VonMisesFisherExact(np.array([0.0, 0.0, 1.0]), kappa)
    ws = np.array([sampler.draw_cosine(rng)[0] for _ in range(100_000)])
    assert stats.kstest(ws, vmf_cosine_cdf_s2(kappa)).pvalue > 0.01


def test_vmf_concentrates_at_large_kappa():
    rng = np.random.default_rng(3)
    mu = exact.sample_uniform(6, rng)
    sampler = exact.VonMisesFisherExact(mu, 500.0)
    draws = np.stack([sampler.draw(rng) for _ in range(2000)])
    assert np.mean(draws @ mu) > 0.99


def test_vmf_rotational_symmetry():
    rng = np.random.default_rng(4)
    mu = np.array([0.0, 0.0, 1.0])
    sampler = exact.VonMisesFisherExact(mu, 5.0)
    draws = np.stack([sampler.draw(rng) for _ in range(50_000)])
    n = draws.shape[0]
    for k in range(2):
        # components orthogonal to mu have mean zero; se of the mean is
        # bounded by 1/sqrt(n)
        assert abs(draws[:, k].mean()) < 3.0 / math.sqrt(n)


def test_vmf_unit_norm_and_validation():
    rng = np.random.default_rng(5)
    sampler = exact.VonMisesFisherExact(np.array([1.0, 0.0, 0.0, 0.0]), 10.0)
    draws = np.stack([sampler.draw(rng) for _ in range(1000)])
    assert np.abs(np.linalg.norm(draws, axis=1) - 1.0).max() <= 1e-12
    with pytest.raises(ValueError):
        exact.VonMisesFisherExact(np.array([1.0, 0.0, 0.0]), -1.0)


def test_bingham_zero_matrix_reduces_to_uniform():
    rng = np.random.default_rng(6)
    sampler = exact.BinghamExact(np.zeros(3))
    assert abs(sampler._b - 3.0) < 1e-9  # envelope scale hits the dimension
    draws, trials = [], []
    for _ in range(20_000):
        x, t = sampler.draw_with_trials(rng)
        draws.append(x)
        trials.append(t)
    assert np.mean(trials) == 1.0  # every proposal accepted
    draws = np.stack(draws)
    zi = np.minimum((0.5 * (draws[:, 2] + 1.0) * 6).astype(int), 5)
    ai = np.minimum(
        ((np.arctan2(draws[:, 1], draws[:, 0]) + math.pi) / (2 * math.pi) * 4).astype(int), 3
    )
    assert stats.chisquare(np.bincount(zi * 4 + ai, minlength=24)).pvalue > 0.01


def test_bingham_envelope_scale_solves_trace_equation():
    rng = np.random.default_rng(7)
    for _ in range(20):
        kappas = np.sort(np.concatenate([[0.0], rng.uniform(0, 300, 9)]))
        sampler = exact.BinghamExact(kappas)
        lam = kappas[-1] - kappas
        assert np.sum(1.0 / (sampler._b + 2.0 * lam)) == pytest.approx(1.0, abs=1e-9)


def test_bingham_second_moment_matches_quadrature():
    rng = np.random.default_rng(8)
    kappa = 5.0
    sampler = exact.BinghamExact(np.array([0.0, 0.0, kappa]))
    draws = np.stack([sampler.draw(rng) for _ in range(100_000)])
    emp = float(np.mean(draws[:, 2] ** 2))
    weight = lambda w: np.exp(kappa * w * w)
    num = integrate.quad(lambda w: w * w * weight(w), -1, 1)[0]
    den = integrate.quad(weight, -1, 1)[0]
    assert emp == pytest.approx(num / den, rel=0.01)


def test_bingham_mode_symmetry():
    rng = np.random.default_rng(9)
    sampler = exact.BinghamExact(np.concatenate([np.zeros(9), [30.0]]))
    draws = np.stack([sampler.draw(rng) for _ in range(50_000)])
    frac = np.mean(draws[:, -1] > 0)
    n = draws.shape[0]
    assert abs(frac - 0.5) <= 3.0 * 0.5 / math.sqrt(n)


def test_bingham_rotated_basis_moments():
    rng = np.random.default_rng(10)
    basis = np.linalg.qr(rng.standard_normal((4, 4)))[0]
    kappas = np.array([0.0, 1.0, 2.0, 8.0])
    rotated = exact.BinghamExact(kappas, basis)
    aligned = exact.BinghamExact(kappas)
    rd = np.stack([rotated.draw(rng) for _ in range(30_000)])
    ad = np.stack([aligned.draw(rng) for _ in range(30_000)])
    # second moments along each eigenvector agree between parameterizations
    m_rot = np.mean((rd @ basis) ** 2, axis=0)
    m_ali = np.mean(ad**2, axis=0)
    assert np.abs(m_rot - m_ali).max() < 0.01


def test_bingham_acceptance_feasible_at_scale():
    rng = np.random.default_rng(11)
    kappas = np.concatenate([[0.0], np.linspace(1.0, 300.0, 49)])
    sampler = exact.BinghamExact(kappas)
    trials = [sampler.draw_with_trials(rng)[1] for _ in range(2000)]
    acceptance = len(trials) / np.sum(trials)
    assert acceptance > 0.01


def test_bingham_rejection_cap_error():
    rng = np.random.default_rng(12)
    sampler = exact.BinghamExact(np.array([0.0, 0.0, 50.0]), max_rejections=1)
    with pytest.raises(RejectionLimitError):
        # acceptance < 1, so a single-trial cap must trip quickly
        for _ in range(1000):
            sampler.draw(rng)


def test_mixture_single_component_matches_vmf():
    rng_a = np.random.default_rng(13)
    rng_b = np.random.default_rng(13)
    mu = np.array([0.0, 1.0, 0.0])
    mix = exact.VonMisesFisherMixtureExact(mu[None, :], 4.0)
    vmf = exact.VonMisesFisherExact(mu, 4.0)
    a = np.stack([mix.draw(rng_a) for _ in range(200)])
    # the mixture draws one extra integer per sample; drawing via the same
    # component sampler with its own stream must give the same law
    b = np.stack([vmf.draw(rng_b) for _ in range(200)])
    assert stats.ks_2samp(a @ mu, b @ mu).pvalue > 0.01


def test_mixture_component_counts_uniform():
    rng = np.random.default_rng(14)
    means = np.stack([exact.sample_uniform(5, rng) for _ in range(4)])
    mix = exact.VonMisesFisherMixtureExact(means, 8.0)
    ks = [mix.draw_with_component(rng)[1] for _ in range(100_000)]
    counts = np.bincount(ks, minlength=4)
    assert stats.chisquare(counts).pvalue > 0.01


def test_mixture_projected_marginal_matches_numeric_density():
    # d=3 oracle: the density of s = <a, x> under vMF(mu, kappa) is
    # proportional to exp(kappa s cos(alpha)) I0(kappa sin(alpha) sqrt(1-s^2))
    # with alpha the angle between a and mu; the mixture marginal is the
    # average over components
    rng = np.random.default_rng(15)
    means = np.stack([exact.sample_uniform(3, rng) for _ in range(3)])
    kappa = 4.0
    mix = exact.VonMisesFisherMixtureExact(means, kappa)
    a = means[0]
    grid = np.linspace(-1.0, 1.0, 4001)
    density = np.zeros_like(grid)
    for m in means:
        cos_alpha = float(np.clip(a @ m, -1.0, 1.0))
        sin_alpha = math.sqrt(max(0.0, 1.0 - cos_alpha**2))
        comp = np.exp(kappa * grid * cos_alpha) * special.i0(
            kappa * sin_alpha * np.sqrt(np.clip(1.0 - grid**2, 0.0, 1.0))
        )
        density += comp / integrate.trapezoid(comp, grid)
    density /= len(means)
    cdf_grid = integrate.cumulative_trapezoid(density, grid, initial=0.0)
    cdf_grid /= cdf_grid[-1]
    draws = np.array([mix.draw(rng) @ a for _ in range(50_000)])
    p = stats.kstest(draws, lambda s: np.interp(s, grid, cdf_grid)).pvalue
    assert p > 0.01


def test_exact_sampler_factory():
    from spheremc import targets

    rng = np.random.default_rng(16)
    pairs = [
        (targets.Uniform(4), exact.UniformSphere),
        (targets.VonMisesFisher(np.eye(3)[0], 2.0), exact.VonMisesFisherExact),
        (targets.Bingham([0.0, 1.0, 5.0]), exact.BinghamExact),
        (
            targets.VonMisesFisherMixture(np.eye(4)[:2], 3.0),
            exact.VonMisesFisherMixtureExact,
        ),
    ]
    for target, klass in pairs:
        sampler = exact.exact_sampler_for(target)
        assert isinstance(sampler, klass)
        x = sampler.draw(rng)
        assert abs(np.linalg.norm(x) - 1.0) <= 1e-12
    curve = targets.CurvedVonMisesFisher(np.eye(3)[:2], 5.0)
    assert exact.exact_sampler_for(curve) is None
