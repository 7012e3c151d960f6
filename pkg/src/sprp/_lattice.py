"""Enumeration of integer lattice points by a positive-definite quadratic form.

Every lattice sum in the package has the shape sum_k f(k^T M k), so we only
need the distinct values q = k^T M k below a cutoff together with how many
lattice points share each value.
"""

from functools import lru_cache

import numpy as np

from .errors import NumericError

# log(1e18): terms smaller than 1e-18 relative to the leading one are dropped
TRUNC_EXPONENT = 18.0 * np.log(10.0)
# largest box we are willing to enumerate for non-diagonal forms
MAX_BOX_POINTS = 20_000_000


def _round_cutoff(cut):
    # snap to a power of two so nearby requests share a cache entry
    if cut <= 1.0:
        return 1.0
    return float(2.0 ** np.ceil(np.log2(cut)))


def padded_cutoff(exponent_scale, M, margin=2):
    """Cutoff on q for terms exp(-exponent_scale * q) >= exp(-TRUNC_EXPONENT).

    The radius is enlarged by ``margin`` lattice shells measured in the
    norm of M, as a guard against anisotropy.
    """
    if exponent_scale <= 0:
        raise NumericError("lattice truncation needs a positive decay rate", "lattice")
    lam_max = float(np.linalg.eigvalsh(M)[-1])
    radius = np.sqrt(TRUNC_EXPONENT / exponent_scale) + margin * np.sqrt(lam_max)
    return radius * radius


def lattice_forms(M, cut):
    """Distinct values of k^T M k <= cut over k in Z^d with their multiplicities.

    Returns ``(q, mult)`` sorted by q, with q[0] == 0 (the origin).
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    key = tuple(M.ravel().tolist())
    return _lattice_forms_cached(key, M.shape[0], _round_cutoff(float(cut)))


@lru_cache(maxsize=256)
def _lattice_forms_cached(key, d, cut):
    M = np.array(key).reshape(d, d)
    if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
        q, mult = _diagonal_forms(np.diag(M), cut)
    else:
        pts, qv = _box_points(M, cut)
        q, inv = np.unique(qv, return_inverse=True)
        mult = np.bincount(inv.ravel()).astype(float)
    q.setflags(write=False)
    mult.setflags(write=False)
    return q, mult


def _diagonal_forms(diag, cut):
    # build the value/multiplicity list one coordinate at a time
    q = np.zeros(1)
    mult = np.ones(1)
    for m in diag:
        kmax = int(np.floor(np.sqrt(cut / m)))
        k = np.arange(kmax + 1)
        qk = m * k * k
        mk = np.where(k == 0, 1.0, 2.0)
        qq = (q[:, None] + qk[None, :]).ravel()
        mm = (mult[:, None] * mk[None, :]).ravel()
        keep = qq <= cut
        q, inv = np.unique(qq[keep], return_inverse=True)
        mult = np.bincount(inv.ravel(), weights=mm[keep])
    return q, mult


def _box_points(M, cut):
    d = M.shape[0]
    Minv = np.linalg.inv(M)
    half = np.floor(np.sqrt(cut * np.diag(Minv))).astype(int)
    size = np.prod(2 * half + 1, dtype=float)
    if size > MAX_BOX_POINTS:
        raise NumericError(
            f"lattice enumeration needs {size:.3g} points; truncation bound unattainable",
            "lattice",
        )
    axes = [np.arange(-h, h + 1) for h in half]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    qv = np.einsum("ij,jk,ik->i", pts, M, pts)
    keep = qv <= cut * (1 + 1e-12)
    return pts[keep], qv[keep]


def lattice_points(M, cut):
    """Explicit lattice vectors k with k^T M k <= cut, and their q values."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return _box_points(M, float(cut))
