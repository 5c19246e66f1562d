"""Exact (non-MCMC) reference samplers used as ground truth in tests.

All samplers expose ``draw(rng) -> point`` plus ``expected_acceptance()``
returning the known acceptance probability of any internal rejection loop,
or None when it has no closed form. Rejection loops share a hard cap that
turns a silent hang into a diagnosable ``RejectionLimitError``.
"""

import math

import numpy as np

from . import geometry
from .errors import RejectionLimitError

REJECTION_CAP = 10**6


def sample_uniform(dim, rng):
    """Uniform point on the sphere: a normalized standard normal draw."""
    while True:
        y = rng.standard_normal(dim)
        n = np.linalg.norm(y)
        if n >= geometry.DEGENERATE_EPS:
            return y / n


class UniformSphere:
    """Exact uniform sampler."""

    def __init__(self, dim):
        self.dim = dim

    def draw(self, rng):
        return sample_uniform(self.dim, rng)

    def expected_acceptance(self):
        return 1.0


class VonMisesFisherExact:
    """Rejection sampler for the vMF distribution (Wood's scheme).

    The cosine ``w = <mu, x>`` is drawn with a beta-distributed envelope,
    then completed with a uniform tangent direction:
    ``x = w mu + sqrt(1 - w^2) v``. With ``m = d - 1``:

    * ``b = m / (sqrt(4 kappa^2 + m^2) + 2 kappa)``
      (equals ``(-2 kappa + sqrt(4 kappa^2 + m^2)) / m``, written in the
      cancellation-free form),
    * ``w = (1 - (1+b) z) / (1 - (1-b) z)`` with ``z ~ Beta(m/2, m/2)``,
    * accept when ``kappa w + m log(1 - x0 w) - c >= log u`` where
      ``x0 = (1-b)/(1+b)`` and ``c = kappa x0 + m log(1 - x0^2)``.
    """

    def __init__(self, mu, kappa, max_rejections=REJECTION_CAP):
        if kappa <= 0:
            raise ValueError("kappa must be > 0")
        self.mu = geometry.unit_vector(mu)
        self.kappa = float(kappa)
        self.dim = self.mu.size
        self.max_rejections = max_rejections
        m = self.dim - 1
        self._b = m / (math.sqrt(4.0 * kappa**2 + m**2) + 2.0 * kappa)
        self._x0 = (1.0 - self._b) / (1.0 + self._b)
        self._c = kappa * self._x0 + m * math.log(1.0 - self._x0**2)

    def draw_cosine(self, rng):
        """Sample the marginal of ``<mu, x>``; returns ``(w, trials)``."""
        m = self.dim - 1
        for trial in range(1, self.max_rejections + 1):
            z = rng.beta(0.5 * m, 0.5 * m)
            w = (1.0 - (1.0 + self._b) * z) / (1.0 - (1.0 - self._b) * z)
            u = rng.random()
            if self.kappa * w + m * math.log(1.0 - self._x0 * w) - self._c >= math.log1p(
                -u
            ):
                return w, trial
        raise RejectionLimitError("vMF cosine sampler hit its cap", self.max_rejections)

    def draw(self, rng):
        w, _ = self.draw_cosine(rng)
        v = geometry.sample_tangent(self.mu, rng)
        x = w * self.mu + math.sqrt(max(0.0, 1.0 - w * w)) * v
        return x / np.linalg.norm(x)

    def expected_acceptance(self):
        return None


class BinghamExact:
    """Rejection sampler for ``exp(x^T A x)`` with an angular-central-Gaussian envelope.

    Work in the eigenbasis with ascending eigenvalues ``kappas`` (smallest 0)
    and rewrite the density as ``exp(kappa_d) exp(-x^T L x)`` where
    ``L = kappa_d I - A`` has nonnegative eigenvalues ``lam`` with the top one
    zero. The envelope is the distribution of a normalized draw from
    ``N(0, Omega^{-1})`` with ``Omega = I + 2 L / b``, where ``b`` solves
    ``sum_i 1 / (b + 2 lam_i) = 1`` (bisection to 1e-12; the root lies in
    ``(0, d]``). The log acceptance ratio for ``u = x^T L x`` is
    ``g(u) - g(u*)`` with ``g(u) = -u + (d/2) log(1 + 2u/b)`` maximized at
    ``u* = (d - b)/2``. For ``A = 0`` the ratio is identically one and the
    sampler reduces to the uniform distribution.
    """

    def __init__(self, kappas, basis=None, max_rejections=REJECTION_CAP):
        kappas = np.asarray(kappas, dtype=float)
        d = kappas.size
        if abs(kappas[0]) > 1e-12 or np.any(np.diff(kappas) < 0):
            raise ValueError("kappas must be ascending with the smallest pinned at 0")
        self.kappas = kappas
        self.basis = np.eye(d) if basis is None else np.asarray(basis, dtype=float)
        self.dim = d
        self.max_rejections = max_rejections
        self._lam = kappas[-1] - kappas
        self._b = self._solve_envelope_scale(self._lam)
        self._omega = 1.0 + 2.0 * self._lam / self._b
        ustar = 0.5 * (d - self._b)
        self._log_ratio_max = self._log_ratio(ustar)

    @staticmethod
    def _solve_envelope_scale(lam, tol=1e-12):
        d = lam.size

        def f(b):
            return float(np.sum(1.0 / (b + 2.0 * lam))) - 1.0

        lo, hi = tol, float(d)
        # f is strictly decreasing with f(0+) = +inf and f(d) <= 0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _log_ratio(self, u):
        return -u + 0.5 * self.dim * math.log1p(2.0 * u / self._b)

    def draw_with_trials(self, rng):
        sigma = 1.0 / np.sqrt(self._omega)
        for trial in range(1, self.max_rejections + 1):
            y = sigma * rng.standard_normal(self.dim)
            x = y / np.linalg.norm(y)
            u_quad = float(self._lam @ (x * x))
            if math.log1p(-rng.random()) <= self._log_ratio(u_quad) - self._log_ratio_max:
                return self.basis @ x, trial
        raise RejectionLimitError("Bingham ACG sampler hit its cap", self.max_rejections)

    def draw(self, rng):
        return self.draw_with_trials(rng)[0]

    def expected_acceptance(self):
        return None


class VonMisesFisherMixtureExact:
    """Equal-weight mixture: pick a component uniformly, then sample it."""

    def __init__(self, means, kappa, max_rejections=REJECTION_CAP):
        means = np.asarray(means, dtype=float)
        self.components = [
            VonMisesFisherExact(m, kappa, max_rejections) for m in means
        ]
        self.dim = self.components[0].dim

    def draw_with_component(self, rng):
        k = int(rng.integers(len(self.components)))
        return self.components[k].draw(rng), k

    def draw(self, rng):
        return self.draw_with_component(rng)[0]

    def expected_acceptance(self):
        return None


def exact_sampler_for(target, max_rejections=REJECTION_CAP):
    """Exact reference sampler matching ``target``, or None when none exists.

    There is no exact scheme for the curved target; its experiments are
    validated against a discretized density instead.
    """
    from . import targets as _targets

    if isinstance(target, _targets.Uniform):
        return UniformSphere(target.dim)
    if isinstance(target, _targets.VonMisesFisher):
        return VonMisesFisherExact(target.mu, target.kappa, max_rejections)
    if isinstance(target, _targets.Bingham):
        return BinghamExact(target.kappas, target.basis, max_rejections)
    if isinstance(target, _targets.VonMisesFisherMixture):
        return VonMisesFisherMixtureExact(target.means, target.kappa, max_rejections)
    return None
