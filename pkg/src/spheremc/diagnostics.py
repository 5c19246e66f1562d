"""Chain-quality metrics and convergence-theory verification utilities.

Everything here is a pure function of immutable inputs: the same chain
always produces the same report. Statistical helpers (grids, counts) back
both the harness summaries and the verification tests.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaincinv, gammaln

from . import geometry


def sphere_surface_area(k):
    """Surface volume of the k-dimensional unit sphere embedded in R^{k+1}:
    ``2 pi^{(k+1)/2} / Gamma((k+1)/2)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.exp(gammaln((k + 1) / 2.0))


def ergodicity_constant(beta, dim, set_mass=None):
    """Geometric convergence rate ``rho = 1 - beta * mass(C) / (2 pi w_{d-2})``.

    ``beta`` is the ratio of the density's infimum over a chosen set ``C`` to
    its supremum over the sphere; ``set_mass`` is the surface mass of ``C``
    (full sphere by default). The n-step total-variation distance of either
    slice sampler to its target is bounded by ``rho**n``.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must be in (0, 1]")
    full = sphere_surface_area(dim - 1)
    if set_mass is None:
        set_mass = full
    if not 0.0 < set_mass <= full * (1.0 + 1e-12):
        raise ValueError("set_mass must be in (0, area of the sphere]")
    return 1.0 - (beta / (2.0 * math.pi)) * set_mass / sphere_surface_area(dim - 2)


def ergodicity_dimension_bound(beta, dim):
    """Upper bound ``1 - beta / sqrt(2 pi (d-1))`` on the best achievable rate."""
    return 1.0 - beta / math.sqrt(2.0 * math.pi * (dim - 1))


def autocorrelation(series, max_lag=None):
    """Empirical autocorrelation at lags ``0..max_lag`` (FFT-based).

    Mean-subtracted and normalized so ``acf[0] = 1``; raises ``ValueError``
    on constant input, whose variance is zero.
    """
    x = np.asarray(series, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    x = x - x.mean()
    var = float(x @ x)
    if var <= 0.0:
        raise ValueError("series is constant; autocorrelation is undefined")
    if max_lag is None:
        max_lag = n - 1
    max_lag = min(max_lag, n - 1)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return acov / acov[0]


def integrated_autocorr_time(series):
    """Integrated autocorrelation time with Geyer's initial monotone sequence.

    Sums the autocorrelation over adjacent-lag pairs, truncates at the first
    non-positive pair and enforces monotonicity, which resists the noise in
    the empirical tail.
    """
    rho = autocorrelation(series)
    n_pairs = rho.size // 2
    pair_sums = []
    for m in range(n_pairs):
        g = rho[2 * m] + rho[2 * m + 1]
        if g <= 0.0:
            break
        pair_sums.append(g)
    if not pair_sums:
        return 1.0
    pair_sums = np.minimum.accumulate(pair_sums)
    return max(-1.0 + 2.0 * float(np.sum(pair_sums)), 1e-12)


def relative_ess(series):
    """Effective sample size divided by the chain length (i.e. 1 / IACT)."""
    return 1.0 / integrated_autocorr_time(series)


def hopping_frequency(states, mode_axis):
    """Fraction of steps on which the projection onto ``mode_axis`` changes sign.

    ``sign(0)`` counts as positive so the statistic is deterministic on the
    measure-zero boundary.
    """
    proj = np.asarray(states) @ np.asarray(mode_axis)
    signs = np.where(proj >= 0.0, 1, -1)
    if signs.size < 2:
        return 0.0
    return float(np.mean(signs[1:] != signs[:-1]))


def step_distances(states):
    """Great-circle distance between successive states."""
    states = np.asarray(states)
    dots = np.einsum("ij,ij->i", states[1:], states[:-1])
    return np.arccos(np.clip(dots, -1.0, 1.0))


def kl_mode_visits(states, modes):
    """KL divergence of empirical mode-visit frequencies from the uniform law.

    Each state is assigned to the geodesically nearest mode (ties to the
    lowest index). Zero iff all modes are visited equally; a chain stuck at
    one of K modes scores ``log K``.
    """
    states = np.asarray(states)
    modes = np.asarray(modes)
    k = modes.shape[0]
    # nearest by geodesic distance == largest inner product; argmax keeps the
    # lowest index on ties
    assignment = np.argmax(states @ modes.T, axis=1)
    counts = np.bincount(assignment, minlength=k)
    q = counts / counts.sum()
    p = 1.0 / k
    mask = q > 0
    return float(np.sum(q[mask] * np.log(q[mask] / p)))


def _fibonacci_sphere(n_cells):
    idx = np.arange(n_cells)
    z = 1.0 - (2.0 * idx + 1.0) / n_cells
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * idx
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, 1.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _product_centers(dim, n_cells):
    # recursive band construction: split the polar cosine into bands of equal
    # measure using the Beta((d-1)/2, (d-1)/2) law of (z+1)/2, then place a
    # lower-dimensional grid on each band
    if dim == 3:
        return _fibonacci_sphere(n_cells)
    n_bands = max(2, round(n_cells ** (1.0 / (dim - 1))))
    per_band = [n_cells // n_bands] * n_bands
    for i in range(n_cells - sum(per_band)):
        per_band[i % n_bands] += 1
    a = 0.5 * (dim - 1)
    centers = []
    for band, m in enumerate(per_band):
        if m == 0:
            continue
        z = 2.0 * betaincinv(a, a, (band + 0.5) / n_bands) - 1.0
        r = math.sqrt(max(0.0, 1.0 - z * z))
        sub = _product_centers(dim - 1, m)  # dim >= 4 here, so sub is a sphere grid
        block = np.column_stack([np.full(m, z), r * sub])
        centers.append(block)
    return np.vstack(centers)


@dataclass(frozen=True)
class SphereGrid:
    """Partition of the sphere by nearest-center assignment.

    Centers come from a Fibonacci lattice for d = 3 and from a recursive
    equal-measure band product for higher dimensions, so cells are
    approximately equal-area. Every unit vector maps to exactly one cell
    (ties resolve to the lowest center index).
    """

    centers: np.ndarray

    @classmethod
    def build(cls, dim, n_cells=1000):
        if dim < 3:
            raise ValueError("dim must be >= 3")
        if n_cells < 2:
            raise ValueError("n_cells must be >= 2")
        centers = _fibonacci_sphere(n_cells) if dim == 3 else _product_centers(dim, n_cells)
        return cls(centers=centers)

    @property
    def n_cells(self):
        return self.centers.shape[0]

    def assign(self, points):
        """Cell index of each point (row) of ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.argmax(points @ self.centers.T, axis=1)

    def counts(self, points):
        """Occupancy histogram of ``points`` over the cells."""
        return np.bincount(self.assign(points), minlength=self.n_cells)


def grid_probabilities(target, grid, floor=1e-12):
    """Discretize ``target`` on ``grid``: normalized cell-center weights.

    Weights are ``exp(log_p - max log_p)`` floored at ``floor`` before
    normalization, so cells that are numerically zero under a concentrated
    target cannot produce infinities in KL computations.
    """
    logs = np.array([target.log_p(c) for c in grid.centers])
    weights = np.maximum(np.exp(logs - logs.max()), floor)
    return weights / weights.sum()


def kl_grid(states, target, grid, floor=1e-12):
    """KL divergence between the empirical cell histogram and the
    discretized target."""
    p = grid_probabilities(target, grid, floor)
    counts = grid.counts(states)
    q = counts / counts.sum()
    mask = q > 0
    return float(np.sum(q[mask] * np.log(q[mask] / p[mask])))


def kl_discrete(q, p):
    """KL(q | p) for probability vectors, summing only over ``q > 0``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    mask = q > 0
    return float(np.sum(q[mask] * np.log(q[mask] / p[mask])))


def grid_total_variation(counts, reference_probs):
    """Total variation between a count histogram and reference cell
    probabilities (a lower bound on the underlying continuous TV)."""
    counts = np.asarray(counts, dtype=float)
    q = counts / counts.sum()
    return 0.5 * float(np.abs(q - np.asarray(reference_probs)).sum())


def tv_vs_bound(
    step,
    x0,
    n_max,
    grid,
    replications,
    rho,
    reference_probs,
    rng,
    reference_size=None,
):
    """Compare empirical n-step grid-TV against the geometric bound ``rho**n``.

    Runs ``replications`` independent chains from ``x0`` via the callable
    ``step(x, rng) -> x'`` and measures, for each ``n = 0..n_max``, the total
    variation between the empirical state histogram on ``grid`` and
    ``reference_probs``. The Monte Carlo error combines the multinomial
    noise floors of the replications and (when ``reference_size`` is given)
    of the reference sample. A row is flagged when
    ``tv - 3 * mc_error > rho**n``.

    Returns ``(rows, any_violation)`` with one dict per ``n``.
    """
    m = grid.n_cells
    counts = np.zeros((n_max + 1, m), dtype=np.int64)
    x0 = np.asarray(x0, dtype=float)
    start_cell = int(grid.assign(x0[None, :])[0])
    counts[0, start_cell] = replications
    for _ in range(replications):
        x = x0
        for n in range(1, n_max + 1):
            x = step(x, rng)
            counts[n, grid.assign(x[None, :])[0]] += 1

    mc_error = 0.5 * math.sqrt(2.0 * m / (math.pi * replications))
    if reference_size:
        mc_error += 0.5 * math.sqrt(2.0 * m / (math.pi * reference_size))
    rows = []
    any_violation = False
    for n in range(n_max + 1):
        tv = grid_total_variation(counts[n], reference_probs)
        bound = rho**n
        violation = tv - 3.0 * mc_error > bound
        any_violation = any_violation or violation
        rows.append(
            {
                "n": n,
                "tv": tv,
                "bound": bound,
                "mc_error": mc_error,
                "violation": bool(violation),
            }
        )
    return rows, any_violation


@dataclass
class DiagnosticsReport:
    """Summary metrics for one chain."""

    acf: np.ndarray
    relative_ess: float
    hopping: float
    step_distances: np.ndarray
    rejections_per_step: float
    kl_modes: float = None
    kl_grid: float = None

    def to_dict(self, acf_lags=50, distance_bins=20):
        """JSON-ready dict; the distance array is summarized as a histogram."""
        hist, edges = np.histogram(self.step_distances, bins=distance_bins, range=(0.0, math.pi))
        out = {
            "acf": [float(a) for a in self.acf[: acf_lags + 1]],
            "relative_ess": float(self.relative_ess),
            "hopping": float(self.hopping),
            "step_distance_mean": float(np.mean(self.step_distances))
            if self.step_distances.size
            else 0.0,
            "step_distance_hist": {
                "edges": [float(e) for e in edges],
                "counts": [int(c) for c in hist],
            },
            "rejections_per_step": float(self.rejections_per_step),
        }
        if self.kl_modes is not None:
            out["kl_modes"] = float(self.kl_modes)
        if self.kl_grid is not None:
            out["kl_grid"] = float(self.kl_grid)
        return out


def chain_report(chain, target, grid=None, max_lag=200):
    """Compute the standard report for a chain against ``target``.

    Uses the states after burn-in, the target's diagnostic axis for the
    projected series, its mode list for visit statistics and, when ``grid``
    is given, the discretized-target KL.
    """
    states = chain.kept_states
    axis = target.diagnostic_axis()
    series = states @ axis
    try:
        acf = autocorrelation(series, max_lag)
        rel_ess = relative_ess(series)
    except ValueError:  # constant projection (e.g. chain never moved)
        acf = np.ones(1)
        rel_ess = 0.0
    modes = target.modes()
    n_kept = max(1, len(states))
    return DiagnosticsReport(
        acf=acf,
        relative_ess=rel_ess,
        hopping=hopping_frequency(states, axis),
        step_distances=step_distances(states),
        rejections_per_step=float(chain.rejections[chain.burn_in :].sum()) / n_kept,
        kl_modes=kl_mode_visits(states, np.asarray(modes)) if modes else None,
        kl_grid=kl_grid(states, target, grid) if grid is not None else None,
    )
