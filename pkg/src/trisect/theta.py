"""Error-controlled Riemann theta functions with half-integer characteristics.

The series is truncated over the ellipsoid ||T(n + center)|| <= R, with T the
Cholesky factor of pi * Im(tau); R is chosen from the Gaussian tail estimate
so the omitted mass is below the requested tolerance.  Arguments are first
reduced modulo the period lattice and the exact quasi-periodicity prefactor
is reapplied, so returned values are the true (unreduced) ones.

Derivative series reuse the value-series ellipsoid enlarged by a fixed
margin, since the polynomial prefactors grow slower than the Gaussian decays.

Characteristic ordering convention: eps in {0,1}^g is indexed
lexicographically with eps_1 most significant.  Every other module and the
CLI file formats rely on this ordering.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gamma as gamma_fn

from .errors import InvalidInput
from .numeric import nearest_lattice_vector

TOL_FLOOR = 1e-15
TOL_CEIL = 1e-3
DEFAULT_THETA_TOL = 1e-10

_TWO_PI_I = 2j * np.pi


class RiemannMatrix:
    """A g x g complex symmetric matrix with positive definite imaginary part.

    Caches the Cholesky data and lattice-point enumerations used by the
    theta series; instances are immutable after construction.
    """

    def __init__(self, entries):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidInput("Riemann matrix must be square",
                               shape=entries.shape)
        if not np.all(np.isfinite(entries)):
            raise InvalidInput("Riemann matrix has non-finite entries")
        scale = max(np.linalg.norm(entries), 1.0)
        if np.linalg.norm(entries - entries.T) > 1e-10 * scale:
            raise InvalidInput("Riemann matrix is not symmetric",
                               asym=float(np.linalg.norm(entries - entries.T)))
        eigs = np.linalg.eigvalsh(entries.imag)
        if eigs.min() <= 0:
            raise InvalidInput("imaginary part is not positive definite",
                               min_eig=float(eigs.min()))
        entries = 0.5 * (entries + entries.T)
        entries.setflags(write=False)
        self.entries = entries
        self.g = entries.shape[0]
        self._imag_inv = np.linalg.inv(entries.imag)
        # T with ||T v||^2 = pi v^T Im(tau) v
        self._chol = np.linalg.cholesky(np.pi * entries.imag).T
        self._chol_inv = np.linalg.inv(self._chol)
        # shortest lattice vector of T Z^g, approximated over the +-1 box
        ticks = np.arange(-1, 2)
        grids = np.meshgrid(*([ticks] * self.g), indexing="ij")
        box = np.stack([grid.ravel() for grid in grids], axis=1)
        box = box[np.any(box != 0, axis=1)]
        self._rho = float(np.min(np.linalg.norm(box @ self._chol.T, axis=1)))
        self._point_cache = {}
        self._doubled = None

    @property
    def doubled(self):
        """The Riemann matrix 2*tau (used by second-order theta functions)."""
        if self._doubled is None:
            self._doubled = RiemannMatrix(2.0 * self.entries)
        return self._doubled

    def lattice_points(self, radius):
        """Integer points n with ||T n|| <= radius, cached per radius step."""
        key = float(np.ceil(radius * 4.0) / 4.0)
        pts = self._point_cache.get(key)
        if pts is None:
            bound = key * np.linalg.norm(self._chol_inv, axis=1)
            ranges = [np.arange(-int(np.floor(b)), int(np.floor(b)) + 1)
                      for b in bound]
            grids = np.meshgrid(*ranges, indexing="ij")
            pts = np.stack([grid.ravel() for grid in grids], axis=1)
            keep = np.linalg.norm(pts @ self._chol.T, axis=1) <= key + 1e-12
            pts = pts[keep].astype(float)
            pts.setflags(write=False)
            self._point_cache[key] = pts
        return pts


@dataclass(frozen=True)
class HalfCharacteristic:
    """Half-integer characteristic [eps'/2; eps''/2], eps vectors in {0,1}^g."""

    eps_prime: tuple
    eps_dblprime: tuple

    def __post_init__(self):
        for v in (self.eps_prime, self.eps_dblprime):
            if not all(e in (0, 1) for e in v):
                raise InvalidInput("characteristic entries must be 0 or 1")
        if len(self.eps_prime) != len(self.eps_dblprime):
            raise InvalidInput("characteristic halves have unequal length")

    @classmethod
    def zero(cls, g):
        return cls((0,) * g, (0,) * g)

    @property
    def g(self):
        return len(self.eps_prime)

    @property
    def parity(self):
        """0 for even characteristics, 1 for odd."""
        return int(np.dot(self.eps_prime, self.eps_dblprime)) % 2

    @property
    def a(self):
        return np.asarray(self.eps_prime, dtype=float) / 2.0

    @property
    def b(self):
        return np.asarray(self.eps_dblprime, dtype=float) / 2.0


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    truncation_radius: float
    bound_on_tail: float


def eps_from_index(idx, g):
    """Inverse of index_from_eps: binary digits, eps_1 most significant."""
    return tuple((idx >> (g - 1 - i)) & 1 for i in range(g))


def index_from_eps(eps):
    g = len(eps)
    return sum(int(e) << (g - 1 - i) for i, e in enumerate(eps))


def all_epsilons(g):
    return [eps_from_index(i, g) for i in range(2 ** g)]


def _check_tol(tol):
    if not TOL_FLOOR < tol < TOL_CEIL:
        raise InvalidInput("theta tolerance must lie in (1e-15, 1e-3)",
                           tol=tol)


def _round_reduce(rm, Z):
    """Vectorised rounding reduction of points modulo Z^g + tau Z^g.

    Returns (Z_reduced, m, p) with Z = Z_reduced + m + tau p.
    """
    tau = rm.entries
    p = np.round(Z.imag @ rm._imag_inv.T)
    m = np.round(Z.real - p @ tau.real.T)
    z_red = Z - m - p @ tau.T
    return z_red, m, p


def _tail_bound(rm, radius, offset, deriv_order):
    g = rm.g
    rho = rm._rho
    arg = max(radius - offset - rho / 2.0, 0.0) ** 2
    eps = (g / 2.0) * (2.0 / rho) ** g * gamma_fn(g / 2.0) \
        * gammaincc(g / 2.0, arg)
    if deriv_order:
        smin = np.linalg.svd(rm._chol, compute_uv=False)[-1]
        eps *= (2.0 * np.pi * (radius + 1.0) / smin) ** deriv_order
    return eps


def _pick_radius(rm, tol, offset, deriv_order):
    radius = rm._rho / 2.0 + offset + np.sqrt(max(-np.log(tol), 1.0))
    for _ in range(200):
        if _tail_bound(rm, radius, offset, deriv_order) < tol:
            return radius
        radius += 0.4
    raise InvalidInput("theta series does not converge at this tolerance",
                       tol=tol)


def _series(rm, Z_red, a, b, tol, deriv):
    """Truncated theta sums at reduced points, all orders 0..deriv at once.

    Z_red: (N, g) reduced arguments; a, b: characteristic shifts.
    Returns (results, radius, tail_bound) where results is a list with the
    value array (N,), then gradients (N, g) and Hessians (N, g, g) as needed.
    """
    tau = rm.entries
    yinv_y = Z_red.imag @ rm._imag_inv.T
    centers = a[None, :] + yinv_y
    offset = float(np.max(np.linalg.norm(centers @ rm._chol.T, axis=1),
                          initial=0.0))
    # omitted terms carry the factor exp(pi y^T Y^{-1} y)
    boost = float(np.exp(np.pi * np.max(
        np.einsum("ng,ng->n", Z_red.imag, yinv_y), initial=0.0)))
    margin = float(deriv)
    radius = _pick_radius(rm, tol / max(boost, 1.0), offset, deriv) + margin
    pts = rm.lattice_points(radius + offset)

    shifted = pts + a[None, :]
    quad = 1j * np.pi * np.einsum("tg,gh,th->t", shifted, tau, shifted)
    n_pts, g = Z_red.shape
    outs = [np.empty(n_pts, dtype=complex)]
    if deriv >= 1:
        outs.append(np.empty((n_pts, g), dtype=complex))
    if deriv >= 2:
        outs.append(np.empty((n_pts, g, g), dtype=complex))
    for start in range(0, n_pts, 128):
        block = slice(start, min(start + 128, n_pts))
        lin = _TWO_PI_I * shifted @ (Z_red[block] + b[None, :]).T
        terms = np.exp(quad[:, None] + lin)
        outs[0][block] = terms.sum(axis=0)
        if deriv >= 1:
            outs[1][block] = _TWO_PI_I * np.einsum("tn,tg->ng",
                                                   terms, shifted)
        if deriv >= 2:
            outs[2][block] = _TWO_PI_I ** 2 * np.einsum(
                "tn,tg,th->ngh", terms, shifted, shifted)
    tail = boost * _tail_bound(rm, radius - margin, offset, deriv)
    return outs, radius, tail


def _prefactor(rm, a, b, m, p, Z_red):
    """Quasi-periodicity factor relating theta at Z and at the reduction."""
    tau = rm.entries
    quad = np.einsum("ng,gh,nh->n", p, tau, p)
    expo = (_TWO_PI_I * (m @ a - p @ b)
            - 1j * np.pi * quad
            - _TWO_PI_I * np.einsum("ng,ng->n", p, Z_red))
    return np.exp(expo)


def theta_batch(tau, Z, char=None, tol=DEFAULT_THETA_TOL, deriv=0):
    """Evaluate theta (or its first/second z-derivatives) at many points.

    Returns (values, radius, tail_bound); values shaped (N,), (N, g) or
    (N, g, g) according to ``deriv``.  Exact quasi-periodic reduction is
    applied internally, so the returned values correspond to the raw
    (unreduced) arguments.
    """
    rm = tau if isinstance(tau, RiemannMatrix) else RiemannMatrix(tau)
    _check_tol(tol)
    Z = np.asarray(Z, dtype=complex)
    squeeze = Z.ndim == 1
    Z = np.atleast_2d(Z)
    if Z.shape[1] != rm.g:
        raise InvalidInput("argument dimension does not match genus",
                           got=Z.shape[1], genus=rm.g)
    if not np.all(np.isfinite(Z)):
        raise InvalidInput("non-finite theta argument")
    char = char or HalfCharacteristic.zero(rm.g)
    if char.g != rm.g:
        raise InvalidInput("characteristic length does not match genus")
    a, b = char.a, char.b

    Z_red, m, p = _round_reduce(rm, Z)
    outs, radius, tail = _series(rm, Z_red, a, b, tol, deriv)
    pre = _prefactor(rm, a, b, m, p, Z_red)
    if deriv == 0:
        out = pre * outs[0]
    elif deriv == 1:
        out = pre[:, None] * (outs[1] + (-_TWO_PI_I * p) * outs[0][:, None])
    else:
        shift = -_TWO_PI_I * p
        out = pre[:, None, None] * (
            outs[2]
            + shift[:, :, None] * outs[1][:, None, :]
            + shift[:, None, :] * outs[1][:, :, None]
            + shift[:, :, None] * shift[:, None, :] * outs[0][:, None, None])
    if squeeze:
        out = out[0]
    return out, radius, tail


def theta(tau, z, char=None, tol=DEFAULT_THETA_TOL):
    """Riemann theta with half-integer characteristic at a single point."""
    vals, radius, tail = theta_batch(tau, z, char, tol, deriv=0)
    return ThetaValue(value=complex(vals), truncation_radius=float(radius),
                      bound_on_tail=float(tail))


def theta_gradient(tau, z, char=None, tol=DEFAULT_THETA_TOL):
    """Gradient of theta in the z variables, same tail-bound discipline."""
    vals, _, _ = theta_batch(tau, z, char, tol, deriv=1)
    return vals


def theta_hessian(tau, z, char=None, tol=DEFAULT_THETA_TOL):
    """Hessian of theta in the z variables; symmetric by construction."""
    vals, _, _ = theta_batch(tau, z, char, tol, deriv=2)
    return 0.5 * (vals + np.swapaxes(vals, -1, -2))


def second_order_theta(tau, z, eps, tol=DEFAULT_THETA_TOL):
    """Second-order theta function: theta[eps/2, 0](2 tau, 2 z)."""
    rm = tau if isinstance(tau, RiemannMatrix) else RiemannMatrix(tau)
    char = HalfCharacteristic(tuple(int(e) for e in eps), (0,) * rm.g)
    return theta(rm.doubled, 2.0 * np.asarray(z, dtype=complex), char, tol).value


def second_order_basis(tau, Z, tol=DEFAULT_THETA_TOL, deriv=0):
    """All 2^g second-order theta values at each point, in the fixed eps order.

    Computed through a single enumeration of the half-lattice: with
    m = 2n + eps, theta[eps/2,0](2 tau, 2 z) is the sum of
    exp(i pi m^T tau m / 2 + 2 pi i m^T z) over m congruent to eps mod 2.
    deriv=0 returns (N, 2^g) values, deriv=2 uses the term-wise factor
    (2 pi i m)(2 pi i m)^T and returns (N, 2^g, g, g) Hessians.  Derivative
    jets skip the lattice reduction, so they are meant for arguments already
    inside the fundamental cell (in practice: the origin).
    """
    rm = tau if isinstance(tau, RiemannMatrix) else RiemannMatrix(tau)
    _check_tol(tol)
    Z = np.asarray(Z, dtype=complex)
    squeeze = Z.ndim == 1
    Z = np.atleast_2d(Z)
    g = rm.g
    if Z.shape[1] != g:
        raise InvalidInput("argument dimension does not match genus")

    # reduce modulo the full lattice; the prefactor is common to all eps
    tau_e = rm.entries
    if deriv == 0:
        Z_red, _, p = _round_reduce(rm, Z)
        quad_p = np.einsum("ng,gh,nh->n", p, tau_e, p)
        pre = np.exp(-_TWO_PI_I * quad_p
                     - 2.0 * _TWO_PI_I * np.einsum("ng,ng->n", p, Z_red))
    else:
        Z_red = Z
        pre = np.ones(Z.shape[0], dtype=complex)

    # Work on the half-integer lattice of tau/2: ||T_h m|| with
    # T_h = chol(pi Im(tau) / 2).
    imag = tau_e.imag / 2.0
    chol = np.linalg.cholesky(np.pi * imag).T
    yinv_y = 2.0 * (Z_red.imag @ rm._imag_inv.T)  # (Im tau/2)^{-1} Im z
    offset = float(np.max(np.linalg.norm(yinv_y @ chol.T, axis=1),
                          initial=0.0))
    boost = float(np.exp(np.pi * np.max(
        np.einsum("ng,ng->n", Z_red.imag, yinv_y), initial=0.0)))
    ticks = np.arange(-1, 2)
    grids = np.meshgrid(*([ticks] * g), indexing="ij")
    box = np.stack([grid.ravel() for grid in grids], axis=1)
    box = box[np.any(box != 0, axis=1)]
    rho = float(np.min(np.linalg.norm(box @ chol.T, axis=1)))

    margin = 2.0 if deriv else 0.0
    radius = rho / 2.0 + offset + np.sqrt(max(-np.log(tol / boost), 1.0))
    arg = lambda r: max(r - offset - rho / 2.0, 0.0) ** 2  # noqa: E731
    smin = np.linalg.svd(chol, compute_uv=False)[-1]
    def bound(r):
        e = (g / 2.0) * (2.0 / rho) ** g * gamma_fn(g / 2.0) \
            * gammaincc(g / 2.0, arg(r))
        if deriv:
            e *= (2.0 * np.pi * (r + 1.0) / smin) ** deriv
        return boost * e
    for _ in range(200):
        if bound(radius) < tol:
            break
        radius += 0.4
    radius += margin

    chol_inv = np.linalg.inv(chol)
    lim = (radius + offset) * np.linalg.norm(chol_inv, axis=1)
    ranges = [np.arange(-int(np.floor(l)), int(np.floor(l)) + 1)
              for l in lim]
    grids = np.meshgrid(*ranges, indexing="ij")
    pts = np.stack([grid.ravel() for grid in grids], axis=1)
    keep = np.linalg.norm(pts @ chol.T, axis=1) <= radius + offset + 1e-12
    pts = pts[keep].astype(float)

    parity = (pts.astype(int) % 2)
    eps_idx = np.zeros(len(pts), dtype=int)
    for i in range(g):
        eps_idx = (eps_idx << 1) | parity[:, i]

    quad = 0.5j * np.pi * np.einsum("tg,gh,th->t", pts, tau_e, pts)
    n_pts = Z.shape[0]
    n_eps = 2 ** g
    if deriv == 0:
        out = np.zeros((n_pts, n_eps), dtype=complex)
    else:
        out = np.zeros((n_pts, n_eps, g, g), dtype=complex)
    for start in range(0, n_pts, 64):
        block = slice(start, min(start + 64, n_pts))
        lin = _TWO_PI_I * pts @ Z_red[block].T
        terms = np.exp(quad[:, None] + lin)  # (T, nb)
        for e in range(n_eps):
            sel = eps_idx == e
            if deriv == 0:
                out[block, e] = terms[sel].sum(axis=0)
            else:
                out[block, e] = _TWO_PI_I ** 2 * np.einsum(
                    "tn,tg,th->ngh", terms[sel], pts[sel], pts[sel])
    if deriv == 0:
        out *= pre[:, None]
    else:
        out *= pre[:, None, None, None]
    if squeeze:
        out = out[0]
    return out
