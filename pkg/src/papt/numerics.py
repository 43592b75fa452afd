"""Dense symmetric linear algebra used throughout the package.

All tolerances are relative to an operator norm, with an absolute floor of
``ABS_FLOOR``.
"""
import numpy as np

from .errors import ContractError, DegenerateZeroOrderError

ABS_FLOOR = 1e-14
SYM_TOL = 1e-12
DEFAULT_RANK_CUTOFF = 1e-8


def max_abs(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def check_symmetric(a, name="matrix", tol=SYM_TOL):
    """Return ``a`` as a float array after checking it is finite, square and symmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ContractError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} has non-finite entries")
    scale = max(1.0, max_abs(a))
    asym = max_abs(a - a.T)
    if asym > tol * scale:
        raise ContractError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    return a


def eig_sym(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.

    Raises ContractError for non-symmetric or non-finite input.
    """
    a = check_symmetric(a)
    w, v = np.linalg.eigh(a)
    return w, v


def solve_min_norm(a, b, rank_cutoff=DEFAULT_RANK_CUTOFF):
    """Minimum-norm least-squares solution of ``a @ x = b``.

    Singular values below ``rank_cutoff * s_max`` are discarded.

    Returns
    -------
    x : ndarray
    residual : float
        ``||a @ x - b||``.
    n_discarded : int
        Number of singular values treated as zero.
    singular_values : ndarray
        Full singular-value spectrum, descending.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ContractError("empty linear system")
    if rank_cutoff <= 0:
        raise ContractError("rank_cutoff must be positive")
    if a.shape[0] != b.shape[0]:
        raise ContractError(f"shape mismatch: A is {a.shape}, b has {b.shape[0]} rows")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = s > max(rank_cutoff * smax, ABS_FLOOR)
    coef = (u[:, keep].T @ b) / s[keep]
    x = vt[keep].T @ coef
    residual = float(np.linalg.norm(a @ x - b))
    return x, residual, int(s.size - keep.sum()), s


class Resolvent:
    """Inverse of ``Q M Q`` on the orthogonal complement of a reference vector.

    ``M`` is decomposed once and reused for every right-hand side, which is the
    usage pattern of an order-by-order perturbation series.  Diagonal ``M`` is
    detected and handled without a dense eigensolve.

    Raises DegenerateZeroOrderError if ``Q M Q`` is singular on the complement.
    """

    def __init__(self, m, v0, tol=1e-10):
        m = check_symmetric(m, "zero-order matrix")
        v0 = np.asarray(v0, dtype=float)
        nrm = np.linalg.norm(v0)
        if abs(nrm - 1.0) > 1e-10:
            raise ContractError(f"reference vector must be normalized (norm {nrm:.15g})")
        self.v0 = v0
        self.dim = m.shape[0]
        scale = max(1.0, max_abs(m))
        off = m - np.diag(np.diag(m))
        unit = np.flatnonzero(np.abs(v0) > 0.5)
        self._diag = None
        if not off.any() and unit.size == 1 and abs(abs(v0[unit[0]]) - 1.0) < 1e-15:
            d = np.diag(m).copy()
            k = unit[0]
            d[k] = np.inf
            small = np.abs(d) < tol * scale
            if small.any():
                raise DegenerateZeroOrderError(
                    f"zero-order operator singular on the complement "
                    f"({int(small.sum())} near-zero level(s) besides the reference)")
            self._diag = d
            self._k = k
            return
        # Shift the reference direction away from zero; the complement block is untouched.
        shift = scale + 1.0
        qm = m - np.outer(v0, v0 @ m) - np.outer(m @ v0, v0) + np.outer(v0, v0) * (v0 @ m @ v0)
        qm = 0.5 * (qm + qm.T) + shift * np.outer(v0, v0)
        w, u = np.linalg.eigh(qm)
        if np.min(np.abs(w)) < tol * scale:
            raise DegenerateZeroOrderError(
                "zero-order operator singular on the complement of the reference")
        self._w = w
        self._u = u

    def __call__(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if self._diag is not None:
            x = rhs / self._diag
            x[self._k] = 0.0
            return x
        x = self._u @ ((self._u.T @ rhs) / self._w)
        return x - self.v0 * (self.v0 @ x)


def solve_in_complement(m, rhs, v0):
    """Solve ``Q M Q x = rhs`` with ``x`` orthogonal to ``v0``, ``Q = 1 - |v0><v0|``."""
    rhs = np.asarray(rhs, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if abs(v0 @ rhs) > 1e-10 * scale:
        raise ContractError("right-hand side is not orthogonal to the reference vector")
    return Resolvent(m, v0)(rhs)

