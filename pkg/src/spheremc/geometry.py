"""Geometric primitives on the unit sphere embedded in ``R^d``.

Conventions used throughout the package:

* a *point* is a 1-D float array ``x`` with ``||x|| = 1``,
* a *tangent direction* at ``x`` is a unit vector ``v`` with ``<v, x> = 0``,
* the great circle through ``x`` with initial direction ``v`` is
  ``gamma(theta) = cos(theta) * x + sin(theta) * v``, which is 2*pi-periodic
  and traverses the sphere's geodesics at unit speed.

All functions are pure; randomized ones take an explicit
``numpy.random.Generator``. Points returned after trigonometric updates are
renormalized so norms do not drift over very long chains.
"""

import math

import numpy as np

from .errors import DegenerateTangentError

TWO_PI = 2.0 * math.pi

#: absolute tolerance for unit-norm and orthogonality checks
NORM_ATOL = 1e-10
#: below this norm a vector is treated as numerically zero
DEGENERATE_EPS = 1e-12


def unit_vector(coords):
    """Return ``coords`` renormalized to unit length.

    Raises ``ValueError`` for inputs that are not 1-D with at least three
    entries, or whose norm is numerically zero.
    """
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError(f"expected a 1-D vector with d >= 3, got shape {x.shape}")
    n = np.linalg.norm(x)
    if not np.isfinite(n) or n < DEGENERATE_EPS:
        raise ValueError("cannot normalize a (near-)zero or non-finite vector")
    return x / n


def tangent_unit_vector(base, direction):
    """Project ``direction`` onto the tangent space at ``base`` and normalize.

    Raises ``ValueError`` if the projection is numerically zero (``direction``
    parallel to ``base``).
    """
    x = np.asarray(base, dtype=float)
    v = np.asarray(direction, dtype=float)
    z = v - (x @ v) * x
    n = np.linalg.norm(z)
    if n < DEGENERATE_EPS:
        raise ValueError("direction is parallel to the base point")
    return z / n


def assert_unit(x, atol=NORM_ATOL):
    """Raise ``ValueError`` unless ``||x|| = 1`` within ``atol``."""
    err = abs(np.linalg.norm(x) - 1.0)
    if err > atol:
        raise ValueError(f"vector is not unit norm (|norm - 1| = {err:.3e})")


def assert_tangent(base, direction, atol=NORM_ATOL):
    """Raise ``ValueError`` unless ``direction`` is unit and orthogonal to ``base``."""
    assert_unit(direction, atol)
    ip = abs(float(np.dot(base, direction)))
    if ip > atol:
        raise ValueError(f"direction is not orthogonal to base (<v,x> = {ip:.3e})")


def canonical_angle(theta):
    """Reduce an angle to the representative in ``[0, 2*pi)``.

    Floor-based reduction; a result that rounds up to exactly ``2*pi`` maps
    to ``0``.
    """
    reduced = theta - TWO_PI * math.floor(theta / TWO_PI)
    if reduced >= TWO_PI:
        return 0.0
    return reduced


def geodesic_point(x, v, theta):
    """Point reached after angle ``theta`` along the great circle ``(x, v)``.

    ``gamma(0) = x`` and ``gamma(pi/2) = v``; the result is renormalized.
    """
    p = math.cos(theta) * x + math.sin(theta) * v
    return p / np.linalg.norm(p)


def geodesic_distance(a, b):
    """Great-circle distance ``arccos(<a, b>)`` in ``[0, pi]``.

    The inner product is clamped to ``[-1, 1]`` so round-off cannot produce
    NaN at coincident or antipodal inputs.
    """
    return math.acos(min(1.0, max(-1.0, float(np.dot(a, b)))))


def slerp(a, b, t):
    """Spherical linear interpolation between unit vectors ``a`` and ``b``.

    Follows the great circle from ``a`` (``t = 0``) to ``b`` (``t = 1``).
    Antipodal inputs are rejected (the interpolant is not unique); nearly
    identical inputs fall back to normalized linear interpolation.
    """
    theta = geodesic_distance(a, b)
    if theta > math.pi - 1e-6:
        raise ValueError("slerp is undefined for (near-)antipodal endpoints")
    if theta < 1e-8:
        p = (1.0 - t) * a + t * b
        return p / np.linalg.norm(p)
    s = math.sin(theta)
    p = (math.sin(theta * (1.0 - t)) * a + math.sin(theta * t) * b) / s
    return p / np.linalg.norm(p)


def sample_tangent(x, rng):
    """Draw a direction uniformly from the unit sphere of the tangent space at ``x``.

    Draws a standard normal vector, removes its component along ``x`` and
    normalizes. Numerically zero projections (a probability-zero event) are
    redrawn; after 100 failures a ``DegenerateTangentError`` is raised.
    """
    d = x.shape[0]
    for _ in range(100):
        y = rng.standard_normal(d)
        z = y - (x @ y) * x
        n = np.linalg.norm(z)
        if n >= DEGENERATE_EPS:
            return z / n
    raise DegenerateTangentError("100 consecutive degenerate tangent draws")


def reverse_geodesic_state(x, v, theta):
    """Advance ``(x, v)`` by ``theta`` along its geodesic and flip the direction.

    The returned pair ``(x', v') = (cos(theta) x + sin(theta) v,
    sin(theta) x - cos(theta) v)`` satisfies two retracing identities used in
    the property tests: the geodesic from ``(x', v')`` reaches ``x`` after the
    same angle ``theta``, and more generally
    ``gamma_{(x,v)}(theta - r) = gamma_{(x',v')}(r)`` for every ``r``.
    """
    c, s = math.cos(theta), math.sin(theta)
    xp = c * x + s * v
    vp = s * x - c * v
    xp = xp / np.linalg.norm(xp)
    # remove the drift component along the new base before renormalizing
    vp = vp - (xp @ vp) * xp
    return xp, vp / np.linalg.norm(vp)


class GivensRotation:
    """Rotation by ``theta`` in the plane spanned by orthonormal ``y`` and ``z``.

    Acts as ``Id + (cos(theta) - 1)(y y^T + z z^T) + sin(theta)(y z^T - z y^T)``
    but is applied as a rank-2 update in O(d) rather than a matrix product.
    """

    def __init__(self, y, z, theta):
        ip = abs(float(np.dot(y, z)))
        if ip > NORM_ATOL:
            raise ValueError(f"rotation plane vectors are not orthogonal (<y,z> = {ip:.3e})")
        self.y = y
        self.z = z
        self.theta = theta

    def __call__(self, w):
        cy = float(np.dot(self.y, w))
        cz = float(np.dot(self.z, w))
        cm1 = math.cos(self.theta) - 1.0
        s = math.sin(self.theta)
        return w + (cm1 * cy + s * cz) * self.y + (cm1 * cz - s * cy) * self.z

    def matrix(self):
        d = self.y.shape[0]
        y = self.y[:, None]
        z = self.z[:, None]
        cm1 = math.cos(self.theta) - 1.0
        s = math.sin(self.theta)
        return np.eye(d) + cm1 * (y @ y.T + z @ z.T) + s * (y @ z.T - z @ y.T)


def givens_rotation(y, z, theta):
    """Build the rotation by ``theta`` acting in the plane ``span(y, z)``.

    ``y`` and ``z`` must be orthogonal unit vectors. The zero-angle rotation
    is the identity; every rotation preserves Euclidean norms.
    """
    return GivensRotation(y, z, theta)


def tangent_basis(x):
    """Orthonormal basis of the tangent space at ``x`` as a ``(d, d-1)`` matrix.

    Columns 2..d of the Householder reflection mapping ``e_1`` to ``x``; used
    to express tangent directions in intrinsic coordinates for tests.
    """
    d = x.shape[0]
    e1 = np.zeros(d)
    e1[0] = 1.0
    u = x - e1
    nu2 = float(u @ u)
    if nu2 < DEGENERATE_EPS:
        return np.eye(d)[:, 1:]
    h = np.eye(d) - (2.0 / nu2) * np.outer(u, u)
    return h[:, 1:]
