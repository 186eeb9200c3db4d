"""Sections of twice the theta divisor in the second-order theta basis,
and the subspace with vanishing order four at the origin.

A section is a 2^g coefficient vector; since every basis function is even,
order-4 vanishing at 0 reduces to 1 + g(g+1)/2 linear conditions (the
value and the upper Hessian).  Everything downstream is finite-dimensional
linear algebra with shared rank-tolerance policy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, IndeterminateRank, PreconditionFailed
from .numeric import numerical_rank, projective_angle, DEFAULT_RANK_TOL
from .theta import theta_batch, second_order_basis, DEFAULT_THETA_TOL
from .geometry import _as_rm, _as_vector


@dataclass(frozen=True)
class SectionCoefficients:
    """A section of the second-order system as a 2^g coefficient vector."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if np.all(c == 0):
            raise InvalidInput("section coefficients are identically zero")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


@dataclass(frozen=True)
class TaylorConditions:
    """Value at 0 followed by the upper-triangular Hessian entries at 0."""

    values: np.ndarray
    relative_residual: float


def _condition_data(rm, tol=DEFAULT_THETA_TOL):
    """The (1 + g(g+1)/2) x 2^g matrix of order-4 vanishing conditions.

    Row 0: basis values at the origin; remaining rows: upper Hessian
    entries.  Cached on the Riemann matrix together with a row-normalized
    copy used for all rank and residual decisions.
    """
    cached = getattr(rm, "_gamma00_conditions", None)
    if cached is not None:
        return cached
    g = rm.g
    origin = np.zeros(g, dtype=complex)
    values = second_order_basis(rm, origin, tol=tol)          # (2^g,)
    hess = second_order_basis(rm, origin, tol=tol, deriv=2)   # (2^g, g, g)
    rows = [values]
    for i in range(g):
        for j in range(i, g):
            rows.append(hess[:, i, j])
    matrix = np.stack(rows)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    normalized = matrix / np.maximum(norms, 1e-300)
    data = (matrix, normalized)
    rm._gamma00_conditions = data
    return data


def section_from_point(tau, x, tol=DEFAULT_THETA_TOL):
    """The section z -> theta(z-x) theta(z+x) as a coefficient vector.

    The coefficients are the raw second-order theta values at the given
    lift, keeping the scale consistent with theta gradients evaluated at
    the same lift.
    """
    rm = _as_rm(tau)
    vec = _as_vector(x, rm.g)
    coeffs = second_order_basis(rm, vec, tol=tol)
    return SectionCoefficients(coeffs=coeffs)


def taylor_conditions(tau, section, tol=DEFAULT_THETA_TOL):
    """Order-4 vanishing conditions applied to a section.

    ``relative_residual`` uses row-normalized conditions and a normalized
    coefficient vector, so it is comparable across sections and tau.
    """
    rm = _as_rm(tau)
    matrix, normalized = _condition_data(rm, tol=tol)
    coeffs = section.coeffs if isinstance(section, SectionCoefficients) \
        else np.asarray(section, dtype=complex).reshape(-1)
    values = matrix @ coeffs
    rel = float(np.max(np.abs(normalized @ coeffs))
                / max(np.linalg.norm(coeffs), 1e-300))
    return TaylorConditions(values=values, relative_residual=rel)


def gamma00_dimension(tau, tol=DEFAULT_RANK_TOL, theta_tol=DEFAULT_THETA_TOL):
    """Dimension of the order-4 subspace as the nullity of the condition
    matrix, with a nullspace basis and the rank certificate.

    A singular-value ratio inside [tol, 10 tol] is treated as undecidable
    and raises IndeterminateRank rather than guessing.
    """
    rm = _as_rm(tau)
    _, normalized = _condition_data(rm, tol=theta_tol)
    cert = numerical_rank(normalized, tol=tol)
    ratios = cert.singular_values / cert.singular_values[0]
    borderline = (ratios >= tol) & (ratios <= 10.0 * tol)
    if np.any(borderline):
        raise IndeterminateRank("singular values inside the undecidable band",
                                ratios=[float(r) for r in ratios[borderline]])
    _, _, vh = np.linalg.svd(normalized)
    nullspace = vh[cert.decided_rank:].conj().T        # (2^g, nullity)
    dimension = 2 ** rm.g - cert.decided_rank
    return dimension, nullspace, cert


def gamma00_combination(tau, x1, x2, tol=1e-6, theta_tol=DEFAULT_THETA_TOL):
    """The order-4 combination s_{x1} - lambda s_{x2} for two smooth
    divisor points in one Gauss fiber, with lambda the squared gradient
    ratio.

    Returns (section, lambda, gamma, conditions).
    """
    rm = _as_rm(tau)
    v1 = _as_vector(x1, rm.g)
    v2 = _as_vector(x2, rm.g)
    g1, _, _ = theta_batch(rm, v1, tol=theta_tol, deriv=1)
    g2, _, _ = theta_batch(rm, v2, tol=theta_tol, deriv=1)
    angle = projective_angle(g1, g2)
    if angle > tol:
        raise PreconditionFailed("points have different Gauss images",
                                 angle=float(angle))
    gamma = complex(np.sum(g2 * g1) / np.sum(g2 * g2))
    lam = gamma ** 2
    s1 = section_from_point(rm, v1, tol=theta_tol)
    s2 = section_from_point(rm, v2, tol=theta_tol)
    combo = SectionCoefficients(coeffs=s1.coeffs - lam * s2.coeffs)
    conds = taylor_conditions(rm, combo, tol=theta_tol)
    return combo, lam, gamma, conds


def trisecant_gamma00_test(tau, x1, x2, x3, tol=DEFAULT_RANK_TOL,
                           theta_tol=DEFAULT_THETA_TOL):
    """Dimension of the intersection of the order-4 subspace with the span
    of the three point sections; value 1 characterizes a trisecant.

    Returns (dimension, {"span_rank", "degenerate_span", ...}).
    """
    rm = _as_rm(tau)
    cols = []
    for x in (x1, x2, x3):
        c = section_from_point(rm, x, tol=theta_tol).coeffs
        cols.append(c / np.linalg.norm(c))
    S = np.stack(cols, axis=1)                          # (2^g, 3)
    _, normalized = _condition_data(rm, tol=theta_tol)
    span_cert = numerical_rank(S, tol=tol)
    ms_cert = numerical_rank(normalized @ S, tol=tol)
    dimension = span_cert.decided_rank - ms_cert.decided_rank
    info = {
        "span_rank": span_cert.decided_rank,
        "conditions_rank": ms_cert.decided_rank,
        "degenerate_span": span_cert.decided_rank < 3,
        "span_cert": span_cert,
        "conditions_cert": ms_cert,
    }
    return dimension, info


def span_VpWp(curve, periods, sample, kappa, tol=DEFAULT_RANK_TOL,
              theta_tol=DEFAULT_THETA_TOL):
    """Dimensions of the fiber-combination spans inside the order-4 space.

    The inner span comes from combinations over smooth fiber points of
    the sampled canonical divisor; the outer span adds the sections of
    the special (singular-image) fiber points.  Returns
    (dim inner, dim outer, dim order-4 space, details).
    """
    from .geometry import gauss_fiber_enumerate
    from .curves import abel_jacobi_divisor

    g = curve.genus
    rm = periods.tau
    entries = gauss_fiber_enumerate(sample.k0, g, curve=curve)
    if not entries:
        raise InvalidInput("empty fiber enumeration")

    smooth_lifts = []
    special_lifts = []
    for entry in entries:
        lift = abel_jacobi_divisor(curve, entry.subdivisor, periods) - kappa
        if entry.special:
            special_lifts.append(lift)
        else:
            smooth_lifts.append(lift)

    combos = []
    base = smooth_lifts[0] if smooth_lifts else None
    for other in smooth_lifts[1:]:
        combo, lam, _, _ = gamma00_combination(rm, base, other,
                                               theta_tol=theta_tol)
        scale = max(np.linalg.norm(section_from_point(rm, base).coeffs),
                    abs(lam) * np.linalg.norm(
                        section_from_point(rm, other).coeffs))
        norm = np.linalg.norm(combo.coeffs)
        if norm < 1e-6 * scale:
            # the two sections were proportional (e.g. the fiber point
            # opposite to the base); the combination is trivially zero
            continue
        combos.append(combo.coeffs / norm)
    dim_inner = 0
    if combos:
        dim_inner = numerical_rank(np.stack(combos), tol=tol).decided_rank

    outer_rows = list(combos)
    for lift in special_lifts:
        c = section_from_point(rm, lift, tol=theta_tol).coeffs
        outer_rows.append(c / np.linalg.norm(c))
    dim_outer = 0
    if outer_rows:
        dim_outer = numerical_rank(np.stack(outer_rows), tol=tol).decided_rank

    dim_gamma00, _, _ = gamma00_dimension(rm, tol=tol, theta_tol=theta_tol)
    details = {
        "n_fiber_entries": len(entries),
        "n_smooth": len(smooth_lifts),
        "n_special": len(special_lifts),
    }
    return dim_inner, dim_outer, dim_gamma00, details
