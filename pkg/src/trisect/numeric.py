"""Shared numerical utilities: rank certification, lattice reduction,
projective comparison and singular-endpoint quadrature nodes.

All functions are pure and operate on plain numpy arrays; tolerances are
explicit arguments with documented defaults.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

#: Default relative singular-value threshold used across the package.
DEFAULT_RANK_TOL = 1e-7


@dataclass(frozen=True)
class RankCertificate:
    """Auditable outcome of a numerical rank decision.

    ``gap_ratio`` is sigma_{r+1} / sigma_1 (0.0 when the matrix is decided
    full rank), so a confident rank-deficiency decision shows a ratio well
    below ``tolerance_used``.
    """

    singular_values: np.ndarray
    decided_rank: int
    gap_ratio: float
    tolerance_used: float

    @property
    def full_rank(self):
        return self.decided_rank == len(self.singular_values)

    def to_dict(self):
        return {
            "singular_values": [float(s) for s in self.singular_values],
            "decided_rank": int(self.decided_rank),
            "gap_ratio": float(self.gap_ratio),
            "tolerance_used": float(self.tolerance_used),
        }


@dataclass(frozen=True)
class LatticeReduction:
    """Integer part (m, n) and residual of reducing z modulo Z^g + tau Z^g."""

    m: np.ndarray
    n: np.ndarray
    residual: np.ndarray = field(repr=False)
    residual_norm: float = 0.0


def numerical_rank(matrix, tol=DEFAULT_RANK_TOL):
    """Decide the rank of a complex matrix from its singular spectrum.

    Rank = number of singular values exceeding ``tol * sigma_1``.  The whole
    spectrum is returned so callers can audit the decision.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise InvalidInput("numerical_rank expects a non-empty 2-d matrix")
    if not np.all(np.isfinite(a)):
        raise InvalidInput("matrix contains non-finite entries")
    if not 0.0 < tol < 1.0:
        raise InvalidInput("rank tolerance must lie in (0, 1)", tol=tol)
    s = np.linalg.svd(a, compute_uv=False)
    smax = s[0]
    if smax == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > tol * smax))
    full = min(a.shape)
    gap = 0.0 if rank == full else float(s[rank] / smax) if smax > 0 else 0.0
    return RankCertificate(singular_values=s, decided_rank=rank,
                           gap_ratio=gap, tolerance_used=tol)


def _offset_box(g, radius=1):
    """All integer offset pairs (dm, dn) in the +-radius box, shape (N, 2g)."""
    ticks = np.arange(-radius, radius + 1)
    grids = np.meshgrid(*([ticks] * (2 * g)), indexing="ij")
    return np.stack([grid.ravel() for grid in grids], axis=1)


_OFFSET_CACHE = {}


def nearest_lattice_vector(z, tau):
    """Reduce z in C^g modulo the lattice Z^g + tau Z^g.

    The real coordinates of z in the (I, tau) basis are rounded and the
    +-1 integer box around the rounding is searched exhaustively.  This
    window is adequate for the moderately conditioned Riemann matrices the
    package produces; extremely skew tau would need proper lattice
    reduction, which is out of scope.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    tau = np.asarray(tau, dtype=complex)
    g = len(z)
    if tau.shape != (g, g):
        raise InvalidInput("dimension mismatch between z and tau",
                           g=g, tau_shape=tau.shape)
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(tau))):
        raise InvalidInput("non-finite input")

    imag_tau = tau.imag
    n_real = np.linalg.solve(imag_tau, z.imag)
    m_real = z.real - tau.real @ n_real
    m0 = np.round(m_real).astype(int)
    n0 = np.round(n_real).astype(int)

    if g not in _OFFSET_CACHE:
        _OFFSET_CACHE[g] = _offset_box(g)
    offsets = _OFFSET_CACHE[g]
    ms = m0 + offsets[:, :g]
    ns = n0 + offsets[:, g:]
    lattice = ms + ns @ tau.T
    residuals = z[None, :] - lattice
    norms = np.linalg.norm(residuals, axis=1)
    best = int(np.argmin(norms))
    return LatticeReduction(m=ms[best].copy(), n=ns[best].copy(),
                            residual=residuals[best].copy(),
                            residual_norm=float(norms[best]))


def projective_angle(v, w):
    """Fubini-Study angle between the lines spanned by v and w, in [0, pi/2].

    Zero iff the vectors are proportional over C.
    """
    v = np.asarray(v, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    nv = np.linalg.norm(v)
    nw = np.linalg.norm(w)
    if nv == 0.0 or nw == 0.0:
        raise InvalidInput("projective_angle of a zero vector is undefined")
    v = v / nv
    w = w / nw
    inner = np.vdot(w, v)
    # sine from the orthogonal component: accurate for tiny angles where
    # the arccos formulation loses half the digits
    perp = v - inner * w
    return float(np.arctan2(np.linalg.norm(perp), abs(inner)))


def quadrature_nodes(n):
    """Gauss-Chebyshev nodes and weights on (-1, 1).

    Exact for integrands of the form (smooth polynomial) * (1 - t^2)^(-1/2);
    the weight absorbs inverse-square-root singularities at both endpoints.
    """
    if n < 2:
        raise InvalidInput("need at least 2 quadrature nodes", n=n)
    k = np.arange(1, n + 1)
    nodes = np.cos((2 * k - 1) * np.pi / (2 * n))
    weights = np.full(n, np.pi / n)
    return nodes, weights
