"""Closed-shell restricted Hartree-Fock in an orthonormal orbital basis."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ConvergenceError
from .fcidump import IntegralSet, orbital_components
from .numerics import max_abs

log = logging.getLogger(__name__)


@dataclass
class HFSolution:
    coeffs: np.ndarray
    orbital_energies: np.ndarray
    energy: float
    n_closed: int
    fock: np.ndarray
    iterations: int = 0

    @property
    def density(self):
        c = self.coeffs[:, : self.n_closed]
        return c @ c.T


def fock_matrix(s, density):
    """Closed-shell Fock matrix ``h + sum_rs D_rs [2 (pq|rs) - (pr|qs)]``; ``tr D = n_closed``."""
    d = np.asarray(density, dtype=float)
    return s.h + 2.0 * np.einsum("pqrs,rs->pq", s.g, d) - np.einsum("prqs,rs->pq", s.g, d)


def hf_energy(s, density, fock=None):
    if fock is None:
        fock = fock_matrix(s, density)
    return float(np.sum(density * (s.h + fock)) + s.core_energy)


def _diagonalize(f, labels):
    """Eigenpairs of ``f`` computed block by block over orbital components.

    Keeps orbitals of noninteracting fragments localized even when their
    energies are degenerate across fragments.  Returns ascending energies,
    coefficients and the component label of every eigenvector.
    """
    n = f.shape[0]
    eps = np.empty(n)
    c = np.zeros((n, n))
    mo_labels = np.empty(n, dtype=labels.dtype)
    col = 0
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        w, v = np.linalg.eigh(f[np.ix_(idx, idx)])
        eps[col:col + idx.size] = w
        c[idx, col:col + idx.size] = v
        mo_labels[col:col + idx.size] = lab
        col += idx.size
    order = np.argsort(eps, kind="stable")
    return eps[order], c[:, order], mo_labels[order]


def _canonical_identity(s, n_closed, conv_tol):
    n = s.norb
    d = np.zeros((n, n))
    d[np.arange(n_closed), np.arange(n_closed)] = 1.0
    f = fock_matrix(s, d)
    off = f - np.diag(np.diag(f))
    if max_abs(off) > conv_tol:
        return None
    eps = np.diag(f).copy()
    if 0 < n_closed < n and eps[:n_closed].max() >= eps[n_closed:].min():
        return None
    if np.any(np.diff(eps[:n_closed]) < 0) or np.any(np.diff(eps[n_closed:]) < 0):
        return None
    return HFSolution(np.eye(n), eps, hf_energy(s, d, f), n_closed, f, 0)


def run_rhf(s, max_iter=200, conv_tol=1e-10, damping=0.0, diis_size=8):
    """Converge a closed-shell RHF solution.

    If the input orbitals are already canonical (off-diagonal Fock elements
    below ``conv_tol`` with the lowest ``nelec/2`` orbitals occupied, in
    aufbau order) the identity solution is returned unchanged.  Otherwise
    the iteration starts from the eigenvectors of ``h`` and uses Pulay
    extrapolation on the commutator ``FD - DF``, optionally with density
    damping.  Raises ConvergenceError after ``max_iter`` iterations.
    """
    if s.nelec % 2:
        raise ContractError("closed-shell RHF requires an even electron count")
    if s.ms2 != 0:
        raise ContractError("closed-shell RHF requires MS2 = 0")
    n_closed = s.nelec // 2
    if n_closed > s.norb:
        raise ContractError("more doubly occupied orbitals than orbitals")
    ident = _canonical_identity(s, n_closed, conv_tol)
    if ident is not None:
        return ident

    labels = orbital_components(s)
    _, c, mo_labels = _diagonalize(s.h, labels)
    d = c[:, :n_closed] @ c[:, :n_closed].T
    focks, errs = [], []
    change = np.inf
    for it in range(max_iter + 1):
        f = fock_matrix(s, d)
        fmo = c.T @ f @ c
        fov = max_abs(fmo[:n_closed, n_closed:])
        log.debug("rhf iter %d: max|F_ov| %.3e  dD %.3e", it, fov, change)
        if fov <= conv_tol:
            c = _semicanonical(fmo, c, n_closed, mo_labels)
            fmo = c.T @ f @ c
            return HFSolution(c, np.diag(fmo).copy(), hf_energy(s, d, f), n_closed, f, it)
        if it == max_iter:
            break
        focks.append(f)
        errs.append(f @ d - d @ f)
        if len(focks) > diis_size:
            focks.pop(0)
            errs.pop(0)
        f_use = _diis(focks, errs) if len(focks) > 1 else f
        _, c, mo_labels = _diagonalize(f_use, labels)
        d_new = c[:, :n_closed] @ c[:, :n_closed].T
        if damping:
            d_new = (1.0 - damping) * d_new + damping * d
            # orbitals consistent with the damped density
            _, c, mo_labels = _diagonalize(fock_matrix(s, d_new), labels)
            d_new = c[:, :n_closed] @ c[:, :n_closed].T
        change = max_abs(d_new - d)
        d = d_new
    raise ConvergenceError(f"RHF not converged after {max_iter} iterations (last density change "
                           f"{change:.3e})", last_change=change)


def _semicanonical(fmo, c, n_closed, mo_labels):
    """Diagonalize the occupied and virtual Fock blocks fragment by fragment."""
    n = fmo.shape[0]
    out = c.copy()
    for blk in (np.arange(n_closed), np.arange(n_closed, n)):
        if blk.size == 0:
            continue
        w = np.empty(blk.size)
        u = np.zeros((blk.size, blk.size))
        lab = mo_labels[blk]
        pos = 0
        for value in np.unique(lab):
            idx = np.flatnonzero(lab == value)
            ww, uu = np.linalg.eigh(fmo[np.ix_(blk[idx], blk[idx])])
            w[pos:pos + idx.size] = ww
            u[idx, pos:pos + idx.size] = uu
            pos += idx.size
        perm = np.argsort(w, kind="stable")
        out[:, blk] = c[:, blk] @ u[:, perm]
    return out


def _diis(focks, errs):
    m = len(focks)
    b = -np.ones((m + 1, m + 1))
    b[m, m] = 0.0
    for i in range(m):
        for j in range(i + 1):
            b[i, j] = b[j, i] = np.vdot(errs[i], errs[j])
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        coef = np.linalg.solve(b, rhs)[:m]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(w * f for w, f in zip(coef, focks))


def transform(s, c):
    """Integrals in the orbital basis given by the columns of orthogonal ``c``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (s.norb, s.norb):
        raise ContractError("transformation must be norb x norb")
    if max_abs(c.T @ c - np.eye(s.norb)) > 1e-10:
        raise ContractError("transformation matrix is not orthogonal")
    h = c.T @ s.h @ c
    g = np.einsum("pqrs,pi->iqrs", s.g, c, optimize=True)
    g = np.einsum("iqrs,qj->ijrs", g, c, optimize=True)
    g = np.einsum("ijrs,rk->ijks", g, c, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, c, optimize=True)
    return IntegralSet(s.norb, s.nelec, s.ms2, s.core_energy, 0.5 * (h + h.T), g, list(s.orbsym), s.isym)
