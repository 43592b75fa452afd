"""Determinant full-CI spaces, Slater-Condon matrices and operator strings.

A determinant is a pair of spatial occupation bitmasks ``(alpha, beta)``.
Internally every determinant also has a spin-orbital key in which bit ``2p``
is orbital ``p`` alpha and bit ``2p + 1`` is orbital ``p`` beta; fermionic
phases follow that ordering, with operators applied right to left and a sign
of ``(-1)**(occupied spin orbitals below the acted index)`` at each step.
"""
from __future__ import annotations

from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np
import scipy.sparse

from . import _kernels
from .errors import ContractError
from .fcidump import SpinOrbitalView
from .numerics import check_symmetric, eig_sym


class Determinant(NamedTuple):
    alpha: int
    beta: int


def interleave(alpha, beta, norb):
    key = 0
    for p in range(norb):
        key |= ((alpha >> p) & 1) << (2 * p)
        key |= ((beta >> p) & 1) << (2 * p + 1)
    return key


def deinterleave(key, norb):
    alpha = beta = 0
    for p in range(norb):
        alpha |= ((key >> (2 * p)) & 1) << p
        beta |= ((key >> (2 * p + 1)) & 1) << p
    return Determinant(alpha, beta)


def _strings(active, n, frozen_mask):
    out = []
    for occ in combinations(active, n):
        m = frozen_mask
        for p in occ:
            m |= 1 << p
        out.append(m)
    return out


class DetSpace:
    """Ordered full-CI determinant list, alpha string major and beta string minor."""

    def __init__(self, norb, n_alpha, n_beta, frozen=()):
        frozen = tuple(sorted(set(int(f) for f in frozen)))
        if any(f < 0 or f >= norb for f in frozen):
            raise ContractError(f"frozen orbitals must lie in 0..{norb - 1}")
        nf = len(frozen)
        if not (nf <= n_alpha <= norb and nf <= n_beta <= norb):
            raise ContractError(
                f"inconsistent counts: norb={norb}, n_alpha={n_alpha}, n_beta={n_beta}, frozen={frozen}")
        if 2 * norb > _kernels.MAX_SPIN_ORBITALS:
            raise ContractError(f"at most {_kernels.MAX_SPIN_ORBITALS // 2} orbitals supported")
        self.norb = norb
        self.n_alpha = n_alpha
        self.n_beta = n_beta
        self.frozen = frozen
        fmask = sum(1 << f for f in frozen)
        active = [p for p in range(norb) if p not in frozen]
        astr = _strings(active, n_alpha - nf, fmask)
        bstr = _strings(active, n_beta - nf, fmask)
        self.dets = [Determinant(a, b) for a in astr for b in bstr]
        self.index = {d: i for i, d in enumerate(self.dets)}
        self.keys = np.array([interleave(d.alpha, d.beta, norb) for d in self.dets], dtype=np.int64)
        self._order = np.argsort(self.keys)
        self._sorted = self.keys[self._order]
        self._table = None

    def __len__(self):
        return len(self.dets)

    @property
    def nso(self):
        return 2 * self.norb

    @property
    def ref_index(self):
        """Position of the aufbau determinant (lowest orbitals occupied)."""
        return 0

    @property
    def expected_size(self):
        nf = len(self.frozen)
        na = self.norb - nf
        return comb(na, self.n_alpha - nf) * comb(na, self.n_beta - nf)

    def unit(self, i=None):
        v = np.zeros(len(self))
        v[self.ref_index if i is None else i] = 1.0
        return v

    def key_of(self, det):
        return interleave(det.alpha, det.beta, self.norb)

    def lookup_keys(self, keys):
        """Positions of spin-orbital ``keys`` in the space, ``-1`` where absent."""
        keys = np.asarray(keys, dtype=np.int64)
        pos = np.minimum(np.searchsorted(self._sorted, keys), len(self) - 1)
        found = self._sorted[pos] == keys
        return np.where(found, self._order[pos], -1)

    def occupations(self):
        return _kernels.occupations(self.keys, self.nso)

    def single_table(self):
        """Cached spin-conserving single-excitation connectivity ``(J, I, p, q, phase)``."""
        if self._table is None:
            self._table = _kernels.single_table(self.keys, self._sorted, self._order, self.nso)
        return self._table


def enumerate_space(norb, n_alpha, n_beta, frozen=()):
    return DetSpace(norb, n_alpha, n_beta, frozen)


def _act(key, dagger, k):
    occupied = (key >> k) & 1
    if dagger == bool(occupied):
        return None, 0
    sign = -1 if bin(key & ((1 << k) - 1)).count("1") & 1 else 1
    return key ^ (1 << k), sign


def apply_string(key, ops):
    """Apply an operator string to a spin-orbital key.

    ``ops`` lists ``(dagger, spin_orbital)`` in written order; the rightmost
    acts first.  Returns ``(new_key, phase)`` or ``None``.
    """
    phase = 1
    for dagger, k in reversed(list(ops)):
        key, sign = _act(key, dagger, k)
        if key is None:
            return None
        phase *= sign
    return key, phase


def apply_excitation(d, det, creators, annihilators):
    """Apply ``c1^+ c2^+ ... a_1 a_2 ...`` (written order) to ``det``.

    ``creators`` and ``annihilators`` are spin-orbital indices in the order
    they appear in the written string, e.g. ``([a, b], [j, i])`` for
    ``a^+ b^+ j i``.  Returns ``(Determinant, phase)`` or ``None`` when the
    string annihilates the determinant.
    """
    ops = [(True, k) for k in creators] + [(False, k) for k in annihilators]
    if any(k < 0 or k >= d.nso for _, k in ops):
        raise ContractError("spin-orbital index out of range")
    res = apply_string(d.key_of(det), ops)
    if res is None:
        return None
    key, phase = res
    return deinterleave(key, d.norb), phase


def build_h_matrix(s, d):
    """Full Hamiltonian matrix over ``d`` (Slater-Condon rules, core energy on the diagonal)."""
    if s.norb != d.norb:
        raise ContractError(f"integrals have norb={s.norb}, space has norb={d.norb}")
    v = SpinOrbitalView(s)
    return _kernels.slater_condon(d.keys, v.h_so(), v.tensor(), s.core_energy)


def one_body_connectivity(d):
    """Sparse representation of ``p^+ q`` (p != q) over the space.

    Returns ``(I, J, pq)`` index arrays and phases such that
    ``<I|p^+ q|J> = phase`` with ``pq = p * nso + q``.
    """
    src, dst, p, q, ph = d.single_table()
    return dst, src, p * d.nso + q, ph


def build_one_body_matrix(lam, d, const=0.0):
    """Matrix of ``sum_pq lam_pq (p_a^+ q_a + p_b^+ q_b) + const`` over ``d``.

    ``lam`` is a symmetric spatial-orbital matrix acting identically on both spins.
    """
    lam = check_symmetric(lam, "one-body matrix")
    if lam.shape[0] != d.norb:
        raise ContractError("one-body matrix dimension does not match the space")
    lam_so = np.kron(lam, np.eye(2))
    occ = d.occupations()
    out = np.zeros((len(d), len(d)))
    src, dst, p, q, ph = d.single_table()
    out[dst, src] = ph * lam_so[p, q]
    out[np.arange(len(d)), np.arange(len(d))] = occ @ np.diag(lam_so) + const
    return out


def apply_one_body_components(d, vec):
    """All ``<.|p^+ q|vec>`` as a sparse ``(ndet, nso*nso)`` matrix, diagonal included."""
    n, nso = len(d), d.nso
    src, dst, p, q, ph = d.single_table()
    occ = d.occupations()
    dr, dc = np.nonzero(occ)
    rows = np.concatenate([dst, dr])
    cols = np.concatenate([p * nso + q, dc * nso + dc])
    vals = np.concatenate([ph * vec[src], vec[dr]])
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, nso * nso))


def fci_ground(s, d, h=None):
    """Lowest eigenvalue of the Hamiltonian in ``d``."""
    if h is None:
        h = build_h_matrix(s, d)
    return float(eig_sym(h)[0][0])
