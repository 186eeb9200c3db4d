"""Kummer embedding, Gauss map, theta-divisor membership and Gauss-fiber
combinatorics.

Projective objects (Kummer points, Gauss directions) are returned
max-modulus normalized; all membership and smoothness decisions are
relative, calibrated against sampled points of the theta divisor, because
absolute theta magnitudes vary over many orders with tau.
"""

from dataclasses import dataclass
from math import comb
import itertools

import numpy as np

from .errors import InvalidInput, NumericalFailure, NotOnTheta
from .numeric import nearest_lattice_vector, projective_angle
from .theta import (RiemannMatrix, theta_batch, second_order_basis,
                    DEFAULT_THETA_TOL)

#: Relative |theta| threshold below which a point counts as on the divisor.
DEFAULT_ON_THETA_TOL = 1e-8
#: Relative gradient-norm threshold separating smooth from singular points.
SMOOTHNESS_THRESHOLD = 1e-6


@dataclass(frozen=True)
class KummerPoint:
    """Image of a Jacobian point under the 2-theta (Kummer) embedding."""

    coords: np.ndarray          # 2^g values, max-modulus coordinate = 1
    raw_scale: float            # modulus of the normalizing coordinate

    @property
    def g(self):
        return int(np.log2(len(self.coords)))

    def angle_to(self, other):
        return projective_angle(self.coords, other.coords)


@dataclass(frozen=True)
class GaussImage:
    """Projectivized theta gradient at a smooth divisor point."""

    direction: np.ndarray       # g-vector, unit norm (zero when undefined)
    defined: bool
    gradient_norm: float
    threshold: float

    def angle_to(self, other):
        dir2 = other.direction if isinstance(other, GaussImage) else other
        return projective_angle(self.direction, dir2)


@dataclass(frozen=True)
class GaussFiberEntry:
    """One degree-(g-1) subdivisor of K0 in the fiber of the Gauss map."""

    subdivisor: object          # Divisor, or tuple of (label, l_i) pairs
    multiplicity: int
    special: object             # True/False, or None when undecidable


def _as_rm(tau):
    return tau if isinstance(tau, RiemannMatrix) else RiemannMatrix(tau)


def _as_vector(z, g):
    if hasattr(z, "z"):
        z = z.z
    z = np.asarray(z, dtype=complex).reshape(-1)
    if len(z) != g:
        raise InvalidInput("point dimension does not match genus",
                           got=len(z), genus=g)
    return z


def kummer_map(tau, z, tol=DEFAULT_THETA_TOL):
    """Kummer image: all 2^g second-order theta values, projectively.

    The argument is reduced to the fundamental cell first; since the
    quasi-periodic factor of the 2-theta system is a common scalar, this
    does not move the projective point but avoids overflow far from the
    cell.
    """
    rm = _as_rm(tau)
    vec = _as_vector(z, rm.g)
    red = nearest_lattice_vector(vec, rm.entries).residual
    coords = second_order_basis(rm, red, tol=tol)
    scale = float(np.max(np.abs(coords)))
    if scale < 1e-13:
        raise NumericalFailure(
            "all second-order theta coordinates vanish; tau is broken",
            scale=scale)
    pivot = int(np.argmax(np.abs(coords)))
    coords = coords / coords[pivot]
    coords.setflags(write=False)
    return KummerPoint(coords=coords, raw_scale=scale)


def theta_divisor_point(tau, rng, tol=DEFAULT_THETA_TOL, max_tries=8):
    """A point of the theta divisor found by Newton iteration on a line.

    Draws a random base point and complex direction, then solves
    theta(z0 + t d) = 0 for scalar t.  Retries with fresh draws if the
    iteration stalls.
    """
    rm = _as_rm(tau)
    g = rm.g
    for _ in range(max_tries):
        z0 = (rng.standard_normal(g) + 1j * rng.standard_normal(g)) * 0.25
        d = rng.standard_normal(g) + 1j * rng.standard_normal(g)
        d /= np.linalg.norm(d)
        t = 0.1 + 0.1j
        ok = False
        for _ in range(60):
            if not np.isfinite(t) or abs(t) > 4.0:
                break
            z = z0 + t * d
            val, _, _ = theta_batch(rm, z, tol=tol)
            grad, _, _ = theta_batch(rm, z, tol=tol, deriv=1)
            dd = complex(grad @ d)
            if not np.isfinite(dd) or abs(dd) < 1e-14:
                break
            step = complex(val) / dd
            if abs(step) > 0.5:
                step *= 0.5 / abs(step)
            t = t - step
            if abs(step) < 1e-14 * max(1.0, abs(t)):
                ok = True
                break
        if ok:
            z = z0 + t * d
            val, _, _ = theta_batch(rm, z, tol=tol)
            grad, _, _ = theta_batch(rm, z, tol=tol, deriv=1)
            if abs(complex(val)) < 1e-9 * np.linalg.norm(grad):
                return np.asarray(z)
    raise NumericalFailure("Newton search for a theta-divisor point failed")


def _theta_scales(rm, tol=DEFAULT_THETA_TOL, n_points=12, seed=20260823):
    """Median |theta| near and |grad theta| on the divisor, cached on rm.

    These calibrate all relative membership/smoothness thresholds for this
    Riemann matrix.
    """
    cached = getattr(rm, "_theta_scales", None)
    if cached is not None:
        return cached
    rng = np.random.default_rng(seed)
    pts = np.stack([theta_divisor_point(rm, rng, tol=tol)
                    for _ in range(n_points)])
    grads, _, _ = theta_batch(rm, pts, tol=tol, deriv=1)
    grad_scale = float(np.median(np.linalg.norm(grads, axis=1)))
    probes = pts + 0.2 * (rng.standard_normal(pts.shape)
                          + 1j * rng.standard_normal(pts.shape))
    vals, _, _ = theta_batch(rm, probes, tol=tol)
    val_scale = float(np.median(np.abs(vals)))
    scales = (val_scale, grad_scale)
    rm._theta_scales = scales
    return scales


def on_theta(tau, x, tol=DEFAULT_ON_THETA_TOL, theta_tol=DEFAULT_THETA_TOL):
    """Theta-divisor membership with an explicit relative residual.

    The scale is the larger of the median |theta| over generic probes and
    the local probe values around x, so the test is meaningful both near
    and far from the fundamental cell.
    """
    rm = _as_rm(tau)
    vec = _as_vector(x, rm.g)
    vec = nearest_lattice_vector(vec, rm.entries).residual
    val_scale, _ = _theta_scales(rm, tol=theta_tol)
    rng = np.random.default_rng(7)
    probes = vec[None, :] + 0.2 * (rng.standard_normal((6, rm.g))
                                   + 1j * rng.standard_normal((6, rm.g)))
    pvals, _, _ = theta_batch(rm, probes, tol=theta_tol)
    scale = max(val_scale, float(np.max(np.abs(pvals))))
    val, _, _ = theta_batch(rm, vec, tol=theta_tol)
    residual = abs(complex(val)) / scale
    return residual < tol, residual


def gauss_map(tau, x, tol=DEFAULT_ON_THETA_TOL,
              theta_tol=DEFAULT_THETA_TOL):
    """Projectivized theta gradient at a point of the theta divisor.

    ``defined`` is False at singular points, decided by a relative
    gradient-norm threshold calibrated on sampled smooth divisor points.
    """
    rm = _as_rm(tau)
    vec = _as_vector(x, rm.g)
    member, residual = on_theta(rm, vec, tol=tol, theta_tol=theta_tol)
    if not member:
        raise NotOnTheta("point is not on the theta divisor",
                         residual=residual)
    red = nearest_lattice_vector(vec, rm.entries).residual
    grad, _, _ = theta_batch(rm, red, tol=theta_tol, deriv=1)
    gnorm = float(np.linalg.norm(grad))
    _, grad_scale = _theta_scales(rm, tol=theta_tol)
    threshold = SMOOTHNESS_THRESHOLD * grad_scale
    if gnorm <= threshold:
        return GaussImage(direction=np.zeros(rm.g, dtype=complex),
                          defined=False, gradient_norm=gnorm,
                          threshold=threshold)
    direction = grad / gnorm
    direction.setflags(write=False)
    return GaussImage(direction=direction, defined=True,
                      gradient_norm=gnorm, threshold=threshold)


def vanishing_order(tau, x, max_order=2, tol=DEFAULT_ON_THETA_TOL,
                    theta_tol=DEFAULT_THETA_TOL):
    """Order of vanishing of theta at x: 1, 2, or 3 meaning ">= 3".

    Orders above 2 are not resolved (third derivatives are out of scope);
    the return value 3 only asserts that value, gradient and Hessian are
    all below their relative thresholds.
    """
    if max_order > 2:
        raise InvalidInput("orders above 2 are not resolved", got=max_order)
    rm = _as_rm(tau)
    image = gauss_map(rm, x, tol=tol, theta_tol=theta_tol)
    if image.defined:
        return 1
    vec = nearest_lattice_vector(_as_vector(x, rm.g), rm.entries).residual
    hess, _, _ = theta_batch(rm, vec, tol=theta_tol, deriv=2)
    _, grad_scale = _theta_scales(rm, tol=theta_tol)
    # a nonzero Hessian on the scale of the generic gradient marks order 2
    if np.linalg.norm(hess) > SMOOTHNESS_THRESHOLD * grad_scale:
        return 2
    return 3


def canonical_direction(curve, periods, point):
    """Canonical-embedding image of a curve point, in normalized coordinates.

    Projectively this is (omega_1 : ... : omega_g) evaluated at the point;
    the common 1/y factor drops out, and the point at infinity maps to the
    image of the highest monomial.
    """
    g = curve.genus
    if point.at_infinity:
        mono = np.zeros(g)
        mono[g - 1] = 1.0
    else:
        mono = np.array([point.x ** k for k in range(g)], dtype=complex)
    direction = periods.normalization @ mono
    n = np.linalg.norm(direction)
    if n == 0.0:
        raise NumericalFailure("canonical direction degenerated")
    return direction / n


def hyperplane_residual(gradient, direction):
    """Relative bilinear pairing |<grad, v>| / (|grad| |v|).

    Zero iff the canonical point lies on the hyperplane cut out by the
    gradient; the pairing is bilinear (no conjugation), matching the
    tangent-hyperplane condition.
    """
    gradient = np.asarray(gradient, dtype=complex).reshape(-1)
    direction = np.asarray(direction, dtype=complex).reshape(-1)
    num = abs(np.sum(gradient * direction))
    den = np.linalg.norm(gradient) * np.linalg.norm(direction)
    if den == 0.0:
        raise InvalidInput("zero vector in hyperplane pairing")
    return float(num / den)


def _multiplicity_vector(k0):
    """(labels, n_i) from a Divisor or a bare sequence of multiplicities."""
    if hasattr(k0, "terms"):
        labels = [p for p, _ in k0.terms]
        mults = [m for _, m in k0.terms]
    else:
        labels = list(range(len(k0)))
        mults = [int(n) for n in k0]
    if any(n <= 0 for n in mults):
        raise InvalidInput("multiplicities must be positive")
    return labels, mults


def gauss_fiber_enumerate(k0, genus, curve=None, periods=None, kappa=None):
    """All degree-(g-1) subdivisors of K0 with their fiber multiplicities.

    For K0 with multiplicity vector (n_1, ..., n_k) the entries are the
    integer vectors 0 <= l_i <= n_i with sum l_i = g-1, each weighted by
    prod C(n_i, l_i).  Specialness of an entry comes from the vanishing
    order of theta when periods and kappa are supplied, from the
    conjugate-pair oracle when only the curve is, and is left undecided
    for purely symbolic input.
    """
    labels, mults = _multiplicity_vector(k0)
    if sum(mults) != 2 * genus - 2:
        raise InvalidInput("K0 must have canonical degree 2g-2",
                           degree=sum(mults), genus=genus)
    target = genus - 1
    entries = []
    for lvec in itertools.product(*[range(n + 1) for n in mults]):
        if sum(lvec) != target:
            continue
        mult = 1
        for n, l in zip(mults, lvec):
            mult *= comb(n, l)
        sub = tuple((lab, l) for lab, l in zip(labels, lvec) if l > 0)
        special = None
        if curve is not None and hasattr(k0, "terms"):
            from .curves import Divisor, divisor_is_special
            div = Divisor.of(*sub)
            sub = div
            if periods is not None and kappa is not None:
                from .curves import abel_jacobi_divisor
                x = abel_jacobi_divisor(curve, div, periods) - kappa
                special = vanishing_order(periods.tau, x) >= 2
            else:
                special = divisor_is_special(curve, div)
        entries.append(GaussFiberEntry(subdivisor=sub, multiplicity=mult,
                                       special=special))
    return entries


def fiber_total_multiplicity(entries):
    """Sum of the multiplicities; equals C(2g-2, g-1) for every K0."""
    return sum(e.multiplicity for e in entries)
