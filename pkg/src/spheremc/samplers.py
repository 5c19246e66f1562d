"""Markov transition kernels on the sphere and the chain driver.

Five kernels are provided:

* ``slice_reject_step``  -- slice sampler whose within-slice move rejects
  uniform angles on a random great circle until the level set is hit,
* ``slice_shrink_step``  -- same slice structure, but the angle is produced
  by interval shrinkage instead of blind rejection,
* ``walk_step``          -- random walk along geodesics; targets the uniform
  distribution for any step-size law,
* ``rwmh_step``          -- random-walk Metropolis-Hastings with a radially
  reprojected Gaussian proposal,
* ``hmc_step``           -- Hamiltonian Monte Carlo whose leapfrog drift is
  an exact great-circle rotation.

Slice levels are drawn in log-space (``log t = log p(x) + log U``), an exact
reparametrization of ``t ~ U(0, p(x))`` that survives concentrations far
beyond double-precision range. ``run_chain`` is deterministic given
``(seed, config, x0)``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry
from .errors import GradientError, RejectionLimitError

SAMPLER_KINDS = ("geosss_reject", "geosss_shrink", "geodesic_walk", "rwmh", "hmc")

DEFAULT_MAX_REJECTIONS = 10**6


@dataclass(frozen=True)
class TauSpec:
    """Step-size distribution of the geodesic random walk.

    ``uniform``: angle uniform on [0, 2*pi). ``fixed``: constant angle
    ``epsilon``. ``chi_scaled``: ``epsilon`` times a chi(d-1) variate.
    ``kac``: rotate a uniformly chosen coordinate pair by a uniform angle
    instead of drawing a tangent direction.
    """

    kind: str
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "fixed", "chi_scaled", "kac"):
            raise ValueError(f"unknown tau kind {self.kind!r}")
        if self.kind in ("fixed", "chi_scaled") and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def fixed(cls, epsilon):
        return cls("fixed", epsilon)

    @classmethod
    def chi_scaled(cls, epsilon):
        return cls("chi_scaled", epsilon)

    @classmethod
    def kac(cls):
        return cls("kac")


@dataclass(frozen=True)
class TuningConfig:
    """Burn-in step-size adaptation: multiply by ``up`` on acceptance and by
    ``down`` on rejection, then freeze after ``burn_in`` steps."""

    enabled: bool = False
    burn_in: int = 0
    up: float = 1.02
    down: float = 0.98


@dataclass(frozen=True)
class SamplerConfig:
    kind: str
    step_size: float = None
    leapfrog_steps: int = 10
    max_rejections: int = DEFAULT_MAX_REJECTIONS
    tau: TauSpec = None
    tuning: TuningConfig = field(default_factory=TuningConfig)

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}")
        if self.kind in ("rwmh", "hmc"):
            if self.step_size is None or self.step_size <= 0:
                raise ValueError(f"{self.kind} requires step_size > 0")
        if self.kind == "hmc" and self.leapfrog_steps < 1:
            raise ValueError("leapfrog_steps must be >= 1")
        if self.kind == "geodesic_walk" and self.tau is None:
            object.__setattr__(self, "tau", TauSpec.uniform())


@dataclass
class Chain:
    """Realized chain: one row of ``states`` per transition, plus per-step
    rejections/acceptance metadata. Reproducible bit-for-bit from
    ``(seed, config, initial_point)``."""

    states: np.ndarray
    rejections: np.ndarray
    accepted: np.ndarray
    log_levels: np.ndarray
    seed: object
    config: SamplerConfig
    initial_point: np.ndarray
    final_step_size: float = None
    burn_in: int = 0

    def __len__(self):
        return self.states.shape[0]

    @property
    def kept_states(self):
        """States after the tuning burn-in (all states when untuned)."""
        return self.states[self.burn_in :]


def _log_uniform(rng):
    # log of a U(0,1] variate; rng.random() is in [0,1) so 1-u never hits 0
    return math.log1p(-rng.random())


def _reject_angle(target, x, v, log_level, rng, max_rejections):
    rejections = 0
    while True:
        theta = geometry.TWO_PI * rng.random()
        candidate = geometry.geodesic_point(x, v, theta)
        if target.log_p(candidate) > log_level:
            return candidate, rejections
        rejections += 1
        if rejections >= max_rejections:
            raise RejectionLimitError(
                "slice rejection loop failed to leave the level set", rejections
            )


def slice_reject_step(target, x, rng, max_rejections=DEFAULT_MAX_REJECTIONS):
    """One transition of the rejection-based geodesic slice sampler.

    Draws a uniform tangent direction and a log-level below ``log_p(x)``,
    then redraws angles uniformly on [0, 2*pi) until the point on the great
    circle clears the level. Returns ``(x', rejections)``. Termination is
    almost sure; the cap converts a measure-zero hang into an error.
    """
    v = geometry.sample_tangent(x, rng)
    log_level = target.log_p(x) + _log_uniform(rng)
    return _reject_angle(target, x, v, log_level, rng, max_rejections)


def shrink_angle(target, x, v, log_level, rng, max_iterations=DEFAULT_MAX_REJECTIONS):
    """Shrinkage search for an angle inside the slice through ``(x, v)``.

    The current point (angle 0) must lie in the slice. The first candidate is
    uniform on [0, 2*pi) with bracket [theta - 2*pi, theta]; on each rejection
    the bracket end on the candidate's side of 0 moves to the candidate, so 0
    stays strictly interior and the accepted angle leaves the current point
    reachable. Returns ``(theta mod 2*pi, rejections)``.
    """
    theta = geometry.TWO_PI * rng.random()
    theta_min = theta - geometry.TWO_PI
    theta_max = theta
    rejections = 0
    while target.log_p(geometry.geodesic_point(x, v, theta)) <= log_level:
        if theta < 0.0:
            theta_min = theta
        else:
            theta_max = theta
        theta = theta_min + (theta_max - theta_min) * rng.random()
        rejections += 1
        if rejections >= max_iterations:
            raise RejectionLimitError("shrinkage bracket failed to terminate", rejections)
    return geometry.canonical_angle(theta), rejections


def slice_shrink_step(target, x, rng, max_rejections=DEFAULT_MAX_REJECTIONS):
    """One transition of the shrinkage-based geodesic slice sampler."""
    v = geometry.sample_tangent(x, rng)
    log_level = target.log_p(x) + _log_uniform(rng)
    theta, rejections = shrink_angle(target, x, v, log_level, rng, max_rejections)
    return geometry.geodesic_point(x, v, theta), rejections


def walk_step(x, tau, rng):
    """Geodesic random walk transition with step-size law ``tau``.

    Uniform on the sphere is stationary for every ``tau``; the ``kac``
    variant rotates a random coordinate plane instead, which only touches the
    two chosen coordinates.
    """
    d = x.shape[0]
    if tau.kind == "kac":
        i, j = rng.choice(d, size=2, replace=False)
        theta = geometry.TWO_PI * rng.random()
        ei = np.zeros(d)
        ei[i] = 1.0
        ej = np.zeros(d)
        ej[j] = 1.0
        xp = geometry.givens_rotation(ei, ej, theta)(x)
        return xp / np.linalg.norm(xp)
    v = geometry.sample_tangent(x, rng)
    if tau.kind == "uniform":
        theta = geometry.TWO_PI * rng.random()
    elif tau.kind == "fixed":
        theta = tau.epsilon
    else:  # chi_scaled: epsilon times a chi(d-1) variate
        theta = tau.epsilon * math.sqrt(rng.chisquare(d - 1))
    return geometry.geodesic_point(x, v, theta)


def rwmh_step(target, x, step_size, rng):
    """Reprojected random-walk Metropolis-Hastings transition.

    Proposal: scale the current point by ``sqrt(r)`` with
    ``r ~ Gamma(d/2, rate 1/2)`` (chi-square with d degrees of freedom, the
    squared radius of a standard Gaussian), add isotropic noise of scale
    ``step_size`` and project back to the sphere. Accept in log-space.
    Returns ``(x', accepted)``.
    """
    d = x.shape[0]
    r = rng.gamma(0.5 * d, 2.0)
    y = math.sqrt(r) * x + step_size * rng.standard_normal(d)
    z = y / np.linalg.norm(y)
    if _log_uniform(rng) <= target.log_p(z) - target.log_p(x):
        return z, True
    return x, False


def leapfrog(target, x, v, step_size, n_steps):
    """Integrate Hamiltonian dynamics on the sphere for ``n_steps`` leapfrogs.

    Each step is a half gradient kick projected to the tangent space, an
    exact great-circle rotation in the plane of position and velocity, and a
    second projected half kick. Position stays unit-norm and velocity stays
    tangent up to round-off; both are re-projected every step. Returns the
    final ``(x, v)``.
    """
    x = x.copy()
    v = v.copy()
    for _ in range(n_steps):
        grad = target.grad_log_p(x)
        if not np.all(np.isfinite(grad)):
            raise GradientError(f"non-finite gradient at state {x!r}")
        v = v + 0.5 * step_size * (grad - (x @ grad) * x)
        speed = np.linalg.norm(v)
        if speed > geometry.DEGENERATE_EPS:
            rotate = geometry.givens_rotation(v / speed, x, step_size * speed)
            x = rotate(x)
            v = rotate(v)
        x = x / np.linalg.norm(x)
        v = v - (x @ v) * x
        grad = target.grad_log_p(x)
        if not np.all(np.isfinite(grad)):
            raise GradientError(f"non-finite gradient at state {x!r}")
        v = v + 0.5 * step_size * (grad - (x @ grad) * x)
    return x, v


def hmc_step(target, x, step_size, n_leapfrog, rng):
    """One Hamiltonian Monte Carlo transition. Returns ``(x', accepted)``.

    Velocities are standard normal projected to the tangent space; the
    proposal is accepted with probability
    ``min(1, exp(|v_0|^2/2 - |v_T|^2/2) p(x_T)/p(x_0))``, evaluated in
    log-space.
    """
    d = x.shape[0]
    v0 = rng.standard_normal(d)
    v0 = v0 - (x @ v0) * x
    x_new, v_new = leapfrog(target, x, v0, step_size, n_leapfrog)
    log_accept = (
        0.5 * float(v0 @ v0)
        - 0.5 * float(v_new @ v_new)
        + target.log_p(x_new)
        - target.log_p(x)
    )
    if _log_uniform(rng) < log_accept:
        return x_new, True
    return x, False


def tune_step_size(step_size, accepted, up=1.02, down=0.98):
    """Multiplicative step-size update used during burn-in."""
    return step_size * (up if accepted else down)


def run_chain(target, config, x0, n_steps, seed):
    """Run ``n_steps`` transitions from ``x0`` and collect them into a ``Chain``.

    When ``config.tuning.enabled`` the step size adapts for the first
    ``config.tuning.burn_in`` steps and is frozen afterwards; the chain still
    records every step, with ``Chain.burn_in`` marking the boundary. Errors
    raised by a kernel are re-raised annotated with the failing step index.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    x = geometry.unit_vector(x0)
    d = x.size
    rng = np.random.default_rng(seed)
    states = np.empty((n_steps, d))
    rejections = np.zeros(n_steps, dtype=np.int64)
    accepted = np.ones(n_steps, dtype=bool)
    log_levels = np.full(n_steps, np.nan)
    step_size = config.step_size
    tuning = config.tuning
    burn_in = tuning.burn_in if tuning.enabled else 0

    for n in range(n_steps):
        try:
            if config.kind == "geosss_reject":
                v = geometry.sample_tangent(x, rng)
                log_levels[n] = target.log_p(x) + _log_uniform(rng)
                x, rejections[n] = _reject_angle(
                    target, x, v, log_levels[n], rng, config.max_rejections
                )
            elif config.kind == "geosss_shrink":
                v = geometry.sample_tangent(x, rng)
                log_levels[n] = target.log_p(x) + _log_uniform(rng)
                theta, rejections[n] = shrink_angle(
                    target, x, v, log_levels[n], rng, config.max_rejections
                )
                x = geometry.geodesic_point(x, v, theta)
            elif config.kind == "geodesic_walk":
                x = walk_step(x, config.tau, rng)
            elif config.kind == "rwmh":
                x, ok = rwmh_step(target, x, step_size, rng)
                accepted[n] = ok
                rejections[n] = 0 if ok else 1
                if tuning.enabled and n < burn_in:
                    step_size = tune_step_size(step_size, ok, tuning.up, tuning.down)
            else:  # hmc
                x, ok = hmc_step(target, x, step_size, config.leapfrog_steps, rng)
                accepted[n] = ok
                rejections[n] = 0 if ok else 1
                if tuning.enabled and n < burn_in:
                    step_size = tune_step_size(step_size, ok, tuning.up, tuning.down)
        except RejectionLimitError as err:
            raise RejectionLimitError(
                f"chain aborted at step {n}: {err}", err.rejections
            ) from err
        states[n] = x

    return Chain(
        states=states,
        rejections=rejections,
        accepted=accepted,
        log_levels=log_levels,
        seed=seed,
        config=config,
        initial_point=np.array(x0, dtype=float),
        final_step_size=step_size,
        burn_in=min(burn_in, n_steps),
    )


def default_config(kind, **overrides):
    """SamplerConfig with the package defaults for ``kind``.

    Tuned kernels default to tuning enabled; the caller supplies ``burn_in``
    (typically 10% of the chain length) via overrides.
    """
    base = {
        "geosss_reject": SamplerConfig(kind="geosss_reject"),
        "geosss_shrink": SamplerConfig(kind="geosss_shrink"),
        "geodesic_walk": SamplerConfig(kind="geodesic_walk", tau=TauSpec.uniform()),
        "rwmh": SamplerConfig(kind="rwmh", step_size=0.5, tuning=TuningConfig(enabled=True)),
        "hmc": SamplerConfig(kind="hmc", step_size=0.1, tuning=TuningConfig(enabled=True)),
    }[kind]
    return replace(base, **overrides) if overrides else base
