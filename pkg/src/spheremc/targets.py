"""Unnormalized log-densities on the sphere.

Every target works purely in log-space (concentrations of a few hundred
overflow ``exp`` in double precision) and exposes

* ``log_p(x)``       -- unnormalized log-density at a unit vector,
* ``grad_log_p(x)``  -- ambient (unprojected) gradient, for Hamiltonian moves,
* ``sup_log_p()``    -- an upper bound of ``log_p`` over the sphere, or None.

Normalizing constants are never computed; samplers only consume differences
of ``log_p`` values.
"""

import itertools
import math

import numpy as np
from scipy.special import logsumexp, softmax

from . import geometry


class LogDensity:
    """Interface for unnormalized spherical targets."""

    dim = None

    def log_p(self, x):
        raise NotImplementedError

    def grad_log_p(self, x):
        raise NotImplementedError

    def sup_log_p(self):
        """Upper bound of ``log_p`` over the sphere; None when unknown."""
        return None

    def mode(self):
        """A canonical high-density point, used as a chain start."""
        raise NotImplementedError

    def modes(self):
        """List of mode locations for mode-visit statistics; None if not discrete."""
        return None

    def diagnostic_axis(self):
        """Unit vector whose projection is traced for ACF/ESS diagnostics."""
        axis = np.zeros(self.dim)
        axis[0] = 1.0
        return axis


class Uniform(LogDensity):
    """Uniform distribution on the sphere (constant density)."""

    def __init__(self, dim):
        if dim < 3:
            raise ValueError("dim must be >= 3")
        self.dim = dim

    def log_p(self, x):
        return 0.0

    def grad_log_p(self, x):
        return np.zeros(self.dim)

    def sup_log_p(self):
        return 0.0

    def mode(self):
        mode = np.zeros(self.dim)
        mode[0] = 1.0
        return mode


class Bingham(LogDensity):
    """Antipodally symmetric quadratic-form density ``exp(x^T A x)``.

    ``A`` is given by its eigenvalues ``kappas`` (ascending, smallest pinned
    to 0; adding a constant to all of them shifts ``log_p`` by that constant
    and leaves the distribution unchanged) and an orthogonal ``basis`` of
    eigenvectors (identity when already diagonal). The density is bimodal at
    plus/minus the top eigenvector with peak log-density ``kappas[-1]``.
    """

    def __init__(self, kappas, basis=None):
        kappas = np.asarray(kappas, dtype=float)
        if kappas.ndim != 1 or kappas.size < 3:
            raise ValueError("kappas must be a 1-D vector with d >= 3")
        if abs(kappas[0]) > 1e-12:
            raise ValueError("smallest eigenvalue must be 0 (shift the diagonal)")
        if np.any(np.diff(kappas) < 0):
            raise ValueError("kappas must be sorted ascending")
        d = kappas.size
        if basis is None:
            basis = np.eye(d)
        else:
            basis = np.asarray(basis, dtype=float)
            if basis.shape != (d, d):
                raise ValueError("basis must be a d x d matrix")
            if not np.allclose(basis.T @ basis, np.eye(d), atol=1e-10):
                raise ValueError("basis columns must be orthonormal")
        self.dim = d
        self.kappas = kappas
        self.basis = basis
        self._matrix = basis @ np.diag(kappas) @ basis.T
        self.mode_axis = basis[:, -1].copy()

    def log_p(self, x):
        return float(x @ self._matrix @ x)

    def grad_log_p(self, x):
        return 2.0 * (self._matrix @ x)

    def sup_log_p(self):
        return float(self.kappas[-1])

    def mode(self):
        return self.mode_axis.copy()

    def modes(self):
        return [self.mode_axis.copy(), -self.mode_axis]

    def diagnostic_axis(self):
        return self.mode_axis.copy()


class VonMisesFisher(LogDensity):
    """Density ``exp(kappa * <mu, x>)``: an isotropic peak around ``mu``."""

    def __init__(self, mu, kappa):
        if kappa <= 0:
            raise ValueError("kappa must be > 0")
        self.mu = geometry.unit_vector(mu)
        self.kappa = float(kappa)
        self.dim = self.mu.size

    def log_p(self, x):
        return self.kappa * float(self.mu @ x)

    def grad_log_p(self, x):
        return self.kappa * self.mu

    def sup_log_p(self):
        return self.kappa

    def mode(self):
        return self.mu.copy()

    def diagnostic_axis(self):
        return self.mu.copy()


class VonMisesFisherMixture(LogDensity):
    """Equal-weight mixture of vMF components sharing one concentration.

    ``log_p`` uses a max-shifted log-sum-exp so concentrations up to 1e4 stay
    finite; ``sup_log_p`` returns ``kappa``, a valid upper bound (the true
    supremum lies in ``[kappa - log K, kappa]``).
    """

    def __init__(self, means, kappa):
        means = np.asarray(means, dtype=float)
        if means.ndim != 2 or means.shape[0] < 1:
            raise ValueError("means must be a (K, d) array with K >= 1")
        if kappa <= 0:
            raise ValueError("kappa must be > 0")
        self.means = np.stack([geometry.unit_vector(m) for m in means])
        self.kappa = float(kappa)
        self.dim = self.means.shape[1]
        self.n_components = self.means.shape[0]

    def _component_logs(self, x):
        return self.kappa * (self.means @ x)

    def log_p(self, x):
        return float(logsumexp(self._component_logs(x))) - math.log(self.n_components)

    def grad_log_p(self, x):
        weights = softmax(self._component_logs(x))
        return self.kappa * (weights @ self.means)

    def sup_log_p(self):
        return self.kappa

    def mode(self):
        return self.means[0].copy()

    def modes(self):
        return [m.copy() for m in self.means]


def shortest_open_path(points):
    """Order ``points`` into the shortest open path under geodesic length.

    Exact dynamic program over subsets (Held-Karp), so the cost is
    ``O(2^m m^2)`` instead of factorial; ``m`` is capped at 12. Ties,
    including the path-reversal tie every path has, are broken by returning
    the lexicographically smallest index permutation.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    m = len(pts)
    if not 2 <= m <= 12:
        raise ValueError("need between 2 and 12 points for exact ordering")
    dist = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            dist[i, j] = dist[j, i] = geometry.geodesic_distance(pts[i], pts[j])

    full = (1 << m) - 1
    costs = np.full((full + 1, m), np.inf)
    for i in range(m):
        costs[1 << i, i] = 0.0
    for mask in range(1, full + 1):
        for last in range(m):
            base = costs[mask, last]
            if not np.isfinite(base) or not (mask >> last) & 1:
                continue
            for nxt in range(m):
                if (mask >> nxt) & 1:
                    continue
                cand = base + dist[last, nxt]
                if cand < costs[mask | (1 << nxt), nxt]:
                    costs[mask | (1 << nxt), nxt] = cand

    best = float(costs[full].min())
    # Greedy front-to-back reconstruction: costs[mask, j] is also the minimal
    # length over mask *starting* at j (reversal symmetry), so picking the
    # smallest feasible index at each position yields the lexicographically
    # smallest optimal permutation. Tolerance absorbs addition-order round-off.
    tol = 1e-9
    order = []
    remaining = full
    budget = best
    prev = None
    for _ in range(m):
        for cand in range(m):
            if not (remaining >> cand) & 1:
                continue
            edge = 0.0 if prev is None else dist[prev, cand]
            if abs(edge + costs[remaining, cand] - budget) <= tol:
                order.append(cand)
                budget -= edge
                remaining &= ~(1 << cand)
                prev = cand
                break
        else:  # pragma: no cover - float safety net
            raise RuntimeError("path reconstruction failed")
    return order


def brute_force_open_path(points):
    """Reference ordering by full enumeration; only viable for small m."""
    pts = [np.asarray(p, dtype=float) for p in points]
    m = len(pts)
    dist = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            dist[i, j] = dist[j, i] = geometry.geodesic_distance(pts[i], pts[j])
    best_len = np.inf
    best_perm = None
    for perm in itertools.permutations(range(m)):
        if perm[0] > perm[-1]:
            continue  # keep the lexicographically smaller of each reversal pair
        length = sum(dist[perm[k], perm[k + 1]] for k in range(m - 1))
        if length < best_len:
            best_len = length
            best_perm = perm
    return list(best_perm)


def nearest_neighbor_path_length(points, start=0):
    """Greedy heuristic path length, used as a sanity bound on the exact search."""
    pts = [np.asarray(p, dtype=float) for p in points]
    m = len(pts)
    unvisited = set(range(m)) - {start}
    total = 0.0
    current = start
    while unvisited:
        nxt = min(unvisited, key=lambda j: geometry.geodesic_distance(pts[current], pts[j]))
        total += geometry.geodesic_distance(pts[current], pts[nxt])
        unvisited.remove(nxt)
        current = nxt
    return total


def path_length(points, order):
    """Total geodesic length of ``points`` visited in ``order``."""
    pts = [np.asarray(p, dtype=float) for p in points]
    return sum(
        geometry.geodesic_distance(pts[order[k]], pts[order[k + 1]])
        for k in range(len(order) - 1)
    )


class CurvedVonMisesFisher(LogDensity):
    """Density concentrated around a piecewise great-circle curve.

    The curve interpolates ordered waypoints with slerp segments;
    ``log_p(x) = kappa * max_t <x, mu(t)>`` with the maximum taken over the
    whole curve. Per segment the maximum has a closed form (see
    ``max_inner``), so no numerical optimization is involved.
    """

    def __init__(self, waypoints, kappa):
        waypoints = np.asarray(waypoints, dtype=float)
        if waypoints.ndim != 2 or waypoints.shape[0] < 2:
            raise ValueError("need at least two waypoints")
        if kappa <= 0:
            raise ValueError("kappa must be > 0")
        self.waypoints = np.stack([geometry.unit_vector(w) for w in waypoints])
        self.kappa = float(kappa)
        self.dim = self.waypoints.shape[1]
        self.segments = []
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            theta = geometry.geodesic_distance(a, b)
            if theta > math.pi - 1e-6:
                raise ValueError("consecutive waypoints must not be antipodal")
            self.segments.append((a, b, theta))
        self.n_segments = len(self.segments)

    @classmethod
    def from_unordered_points(cls, points, kappa):
        """Build the curve after ordering ``points`` into the shortest open path."""
        order = shortest_open_path(points)
        pts = np.asarray(points, dtype=float)
        return cls(pts[order], kappa)

    def curve_point(self, t):
        """Point ``mu(t)`` on the curve for a global parameter ``t`` in [0, 1]."""
        t = min(1.0, max(0.0, float(t)))
        scaled = t * self.n_segments
        idx = min(int(scaled), self.n_segments - 1)
        local = scaled - idx
        a, b, _ = self.segments[idx]
        return geometry.slerp(a, b, local)

    def max_inner(self, x):
        """Maximize ``<x, mu(t)>`` over the curve; returns ``(t, value)``.

        On the segment from ``a`` to ``b`` with opening angle ``th`` the
        inner product is ``[sin(th (1-t)) <x,a> + sin(th t) <x,b>] / sin(th)``
        whose interior stationary point solves
        ``-<x,a> cos(th (1-t)) + <x,b> cos(th t) = 0`` in closed form. The
        segment maximum is the best of both endpoints and the stationary
        point; ties across segments keep the lowest segment index.
        """
        best_val = -np.inf
        best_t = 0.0
        for idx, (a, b, theta) in enumerate(self.segments):
            ca = float(x @ a)
            cb = float(x @ b)
            # endpoints first (t=0 preferred on an exact tie)
            if cb > ca:
                val, local = cb, 1.0
            else:
                val, local = ca, 0.0
            phi = math.atan2(cb - ca * math.cos(theta), ca * math.sin(theta))
            if 0.0 < phi < theta:
                interior = (
                    math.sin(theta - phi) * ca + math.sin(phi) * cb
                ) / math.sin(theta)
                if interior > val:
                    val, local = interior, phi / theta
            if val > best_val:
                best_val = val
                best_t = (idx + local) / self.n_segments
        return best_t, best_val

    def log_p(self, x):
        return self.kappa * self.max_inner(x)[1]

    def grad_log_p(self, x):
        t, _ = self.max_inner(x)
        return self.kappa * self.curve_point(t)

    def sup_log_p(self):
        return self.kappa

    def mode(self):
        return self.waypoints[0].copy()
