"""Moller-Plesset and perturbation-adapted series for closed-shell electrons.

The zero-order operator for the adapted series is a Hermitian one-body
operator with occupied-occupied and virtual-virtual blocks,

    Lambda = sum_pq lam_pq (p_a^+ q_a + p_b^+ q_b) + E_core,

whose parameters are fitted so that ``Lambda - <0|Lambda|0>`` reproduces
``H - <0|H|0>`` on the first-order wavefunction, projected onto vectors that
sample the first-order interacting space.  All determinant-space work uses
dense matrices; the series itself is propagated by :mod:`papt.rspt`.
"""
from __future__ import annotations

import logging
from math import comb
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .detci import DetSpace, apply_one_body_components, build_h_matrix, build_one_body_matrix
from .errors import (ContractError, InconsistentSystemError, QuasiDegenerateError,
                     RankDeficiencyError, SizeLimitError)
from .fcidump import SpinOrbitalView, freeze_orbitals, orbital_components
from .numerics import DEFAULT_RANK_CUTOFF, eig_sym, solve_min_norm
from .rspt import Partitioning, run_series
from .scf import run_rhf, transform

log = logging.getLogger(__name__)

DENOM_FLOOR = 1e-8
DEFAULT_MAX_DETS = 5000


# ------------------------------------------------------------------ amplitudes

@dataclass
class Amplitudes:
    """First-order doubles amplitudes ``c[i, j, a, b]`` over spin orbitals.

    ``occ`` and ``virt`` hold the spin-orbital indices (in the determinant
    space) that the first two and last two axes refer to.
    """

    c: np.ndarray
    occ: np.ndarray
    virt: np.ndarray

    @property
    def n_occ(self):
        return len(self.occ)

    @property
    def n_virt(self):
        return len(self.virt)


def spin_orbitals(spatial):
    return np.array([2 * p + s for p in spatial for s in (0, 1)], dtype=np.int64)


def mp_amplitudes(eps, n_closed, v, frozen=(), denom_floor=DENOM_FLOOR):
    """``c^{ij}_{ab} = <ab||ij> / (e_i + e_j - e_a - e_b)`` for canonical orbitals.

    Parameters
    ----------
    eps : array_like
        Spatial orbital energies aligned with the orbitals of ``v``.
    n_closed : int
        Number of doubly occupied orbitals (the lowest ``n_closed``).
    v : SpinOrbitalView
    frozen : iterable of int
        Occupied spatial orbitals excluded from the excitations.
    """
    eps = np.asarray(eps, dtype=float)
    frozen = set(int(f) for f in frozen)
    occ = spin_orbitals([p for p in range(n_closed) if p not in frozen])
    virt = spin_orbitals(range(n_closed, v.integrals.norb))
    e_so = np.repeat(eps, 2)
    denom = (e_so[occ][:, None, None, None] + e_so[occ][None, :, None, None]
             - e_so[virt][None, None, :, None] - e_so[virt][None, None, None, :])
    if denom.size and np.min(np.abs(denom)) < denom_floor:
        raise QuasiDegenerateError(
            f"quasi-degenerate Fock spectrum: smallest denominator {np.min(np.abs(denom)):.3e}")
    t = v.tensor()
    num = t[np.ix_(virt, virt, occ, occ)].transpose(2, 3, 0, 1)
    return Amplitudes(num / denom, occ, virt)


def mp2_energy(amp, v):
    t = v.tensor()
    num = t[np.ix_(amp.occ, amp.occ, amp.virt, amp.virt)]
    return 0.25 * float(np.sum(amp.c * num))


def double_map(d, occ, virt):
    """Targets and phases of ``a^+ b^+ k j |0>`` for all ``k, j`` in ``occ`` and ``a, b`` in ``virt``.

    Returns ``(idx, phase)`` of shape ``(nocc, nocc, nvirt, nvirt)`` indexed
    ``[k, j, a, b]``; ``idx`` is -1 where the string vanishes.
    """
    ref = np.int64(d.keys[d.ref_index])
    k = np.asarray(occ, dtype=np.int64)[:, None, None, None]
    j = np.asarray(occ, dtype=np.int64)[None, :, None, None]
    a = np.asarray(virt, dtype=np.int64)[None, None, :, None]
    b = np.asarray(virt, dtype=np.int64)[None, None, None, :]
    bit = _kernels._bit
    sb = _kernels._sign_below_np
    s1 = ref ^ bit(j)
    ph = sb(ref, j) * sb(s1, k)
    s2 = s1 ^ bit(k)
    ph = ph * sb(s2, b)
    s3 = s2 | bit(b)
    ph = ph * sb(s3, a)
    new = s3 | bit(a)
    valid = (k != j) & (a != b) & ((ref >> a) & 1 == 0)
    idx = d.lookup_keys(np.broadcast_to(new, valid.shape).ravel()).reshape(valid.shape)
    idx = np.where(valid, idx, -1)
    return idx, np.where(idx >= 0, ph, 0.0)


def _scatter(idx, weights, n):
    sel = idx >= 0
    return np.bincount(idx[sel], weights=weights[sel], minlength=n)


def first_order_vector(amp, d, dmap=None):
    """``|1> = 1/4 c^{ij}_{ab} a^+ b^+ j i |0>`` as a determinant-space vector."""
    idx, ph = dmap if dmap is not None else double_map(d, amp.occ, amp.virt)
    # slot [k, j] of the map holds "a_k a_j"; |1> needs a_j a_i
    return 0.25 * _scatter(idx, ph * amp.c.transpose(1, 0, 2, 3), len(d))


def projection_vectors(amp, d, dmap=None):
    """Vectors ``|proj_ij>`` and ``|proj_ab>`` as arrays ``[i, j, :]`` and ``[a, b, :]``.

    ``|proj_ij> = 1/4 c^{ik}_{ab} a^+ b^+ k j |0>`` and
    ``|proj_ab> = 1/4 c^{ij}_{ac} b^+ c^+ j i |0>``.
    """
    idx, ph = dmap if dmap is not None else double_map(d, amp.occ, amp.virt)
    n, no, nv = len(d), amp.n_occ, amp.n_virt
    c = amp.c
    p_occ = np.zeros((no, no, n))
    for i in range(no):
        for j in range(no):
            p_occ[i, j] = 0.25 * _scatter(idx[:, j], ph[:, j] * c[i], n)
    p_virt = np.zeros((nv, nv, n))
    for a in range(nv):
        w = c[:, :, a, :].transpose(1, 0, 2)
        for b in range(nv):
            p_virt[a, b] = 0.25 * _scatter(idx[:, :, b, :], ph[:, :, b, :] * w, n)
    return p_occ, p_virt


# ------------------------------------------------------------- lambda system

@dataclass
class LambdaSystem:
    """Linear equations for the adapted zero-order parameters.

    Rows are spin-summed symmetrized projections, columns the independent
    parameters ``(p, q)`` with ``p >= q`` inside the occupied or the virtual
    block (orbital indices of the determinant space).
    """

    a: np.ndarray
    b: np.ndarray
    rows: list
    cols: list
    occ: np.ndarray
    virt: np.ndarray
    singular_values: np.ndarray = field(init=False)

    def __post_init__(self):
        self.singular_values = np.linalg.svd(self.a, compute_uv=False)

    def n_small(self, rank_cutoff=DEFAULT_RANK_CUTOFF):
        s = self.singular_values
        if not s.size or s[0] == 0.0:
            return int(s.size)
        return int(np.sum(s <= rank_cutoff * s[0]))


def _pairs(orbs):
    return [(p, q) for ip, p in enumerate(orbs) for q in orbs[: ip + 1]]


def build_system(one, p_occ, p_virt, h, d, amp, e_ref=None):
    """Assemble the similarity equations ``<row|(Lambda - E0) - (H - E_ref)|1> = 0``.

    ``e_ref`` defaults to ``<0|H|0>``.
    """
    nso = d.nso
    occ_sp = np.unique(amp.occ // 2)
    virt_sp = np.unique(amp.virt // 2)
    loc_occ = {int(so): k for k, so in enumerate(amp.occ)}
    loc_virt = {int(so): k for k, so in enumerate(amp.virt)}

    rows, rvecs = [], []
    for (p, q) in _pairs(list(occ_sp)):
        vec = sum(p_occ[loc_occ[2 * p + s], loc_occ[2 * q + s]] + p_occ[loc_occ[2 * q + s], loc_occ[2 * p + s]]
                  for s in (0, 1))
        rows.append(("occ", int(p), int(q)))
        rvecs.append(vec)
    for (p, q) in _pairs(list(virt_sp)):
        vec = sum(p_virt[loc_virt[2 * p + s], loc_virt[2 * q + s]] + p_virt[loc_virt[2 * q + s], loc_virt[2 * p + s]]
                  for s in (0, 1))
        rows.append(("virt", int(p), int(q)))
        rvecs.append(vec)
    r = np.array(rvecs)

    gamma = np.asarray((apply_one_body_components(d, one).T @ r.T).T)  # <row|p^+ q|1>
    gamma = gamma.reshape(len(rows), nso, nso)
    overlap = r @ one
    ref_occ = d.occupations()[d.ref_index]

    cols, acols = [], []
    for kind, orbs in (("occ", occ_sp), ("virt", virt_sp)):
        for (p, q) in _pairs(list(orbs)):
            col = np.zeros(len(rows))
            for s in (0, 1):
                ps, qs = 2 * p + s, 2 * q + s
                if p == q:
                    col += gamma[:, ps, ps] - ref_occ[ps] * overlap
                else:
                    col += gamma[:, ps, qs] + gamma[:, qs, ps]
            cols.append((kind, int(p), int(q)))
            acols.append(col)
    a = np.array(acols).T
    if e_ref is None:
        e_ref = float(h[d.ref_index, d.ref_index])
    b = r @ (h @ one) - e_ref * overlap
    return LambdaSystem(a, b, rows, cols, occ_sp, virt_sp)


@dataclass
class LambdaOperator:
    """Hermitian one-body zero-order operator over the active orbitals.

    ``occ_block`` and ``virt_block`` are the spatial blocks; ``const_part``
    is the constant of the ``p^+ q`` form, which equals the core energy.
    """

    occ_block: np.ndarray
    virt_block: np.ndarray
    const_part: float
    occ: np.ndarray
    virt: np.ndarray
    norb: int
    residual: float = 0.0
    n_discarded: int = 0
    singular_values: np.ndarray = None

    def matrix(self):
        lam = np.zeros((self.norb, self.norb))
        lam[np.ix_(self.occ, self.occ)] = self.occ_block
        lam[np.ix_(self.virt, self.virt)] = self.virt_block
        return lam

    def shifted(self, c):
        """Copy with ``c`` added to every diagonal parameter."""
        return LambdaOperator(self.occ_block + c * np.eye(len(self.occ)),
                              self.virt_block + c * np.eye(len(self.virt)),
                              self.const_part, self.occ, self.virt, self.norb,
                              self.residual, self.n_discarded, self.singular_values)

    def smallest_kept_singular_value(self):
        s = self.singular_values
        return float(s[len(s) - self.n_discarded - 1]) if s is not None and len(s) > self.n_discarded else 0.0

    def discarded_singular_values(self):
        s = self.singular_values
        return [] if s is None or not self.n_discarded else [float(v) for v in s[-self.n_discarded:]]


def solve_lambda(system, fock_diag, core_energy, norb, rank_cutoff=DEFAULT_RANK_CUTOFF,
                 expected_redundancy=1, rel_tol=1e-8):
    """Minimum-norm solution of the similarity system, then gauge fixing.

    The diagonal is shifted uniformly so that the occupied trace of the
    result equals that of ``fock_diag`` (spatial orbital energies indexed by
    orbital).  Raises RankDeficiencyError when more than
    ``expected_redundancy`` singular values fall below the cutoff and
    InconsistentSystemError when the residual exceeds ``rel_tol * ||b||``.
    """
    x, residual, n_disc, s = solve_min_norm(system.a, system.b, rank_cutoff)
    if n_disc > expected_redundancy or not np.any(system.b):
        raise RankDeficiencyError(
            f"unexpected rank deficiency: {n_disc} singular values below cutoff "
            f"(expected {expected_redundancy})")
    if n_disc < expected_redundancy:
        log.warning("similarity system has %d redundant directions, expected %d", n_disc, expected_redundancy)
    bnorm = float(np.linalg.norm(system.b))
    if residual > rel_tol * bnorm:
        raise InconsistentSystemError(f"inconsistent system: residual {residual:.3e}, |b| {bnorm:.3e}")
    occ, virt = system.occ, system.virt
    pos = {}
    for k, (kind, p, q) in enumerate(system.cols):
        pos[(p, q)] = pos[(q, p)] = k
    occ_block = np.array([[x[pos[(p, q)]] for q in occ] for p in occ])
    virt_block = np.array([[x[pos[(p, q)]] for q in virt] for p in virt]).reshape(len(virt), len(virt))
    fock_diag = np.asarray(fock_diag, dtype=float)
    shift = (np.sum(fock_diag[occ]) - np.trace(occ_block)) / len(occ)
    lam = LambdaOperator(occ_block, virt_block, float(core_energy), occ, virt, norb,
                         residual, n_disc, s)
    return lam.shifted(shift)


def similarity_residuals(lam, h, one, rows_matrix, d):
    """``<row|(Lambda - E0) - (H - E_ref)|1>`` for every row vector."""
    l_mat = build_one_body_matrix(lam.matrix(), d, lam.const_part)
    e0 = l_mat[d.ref_index, d.ref_index]
    e_ref = h[d.ref_index, d.ref_index]
    return rows_matrix @ ((l_mat - e0 * np.eye(len(d))) @ one - (h - e_ref * np.eye(len(d))) @ one)


# --------------------------------------------------------------- pipeline

@dataclass
class CorrelationProblem:
    """Everything needed to propagate series for one closed-shell system.

    ``integrals`` are the active-space integrals in the canonical orbital
    basis, with frozen orbitals folded into ``h`` and the core energy.
    """

    integrals: object
    hf: object
    eps: np.ndarray
    n_closed: int
    space: DetSpace
    frozen: tuple = ()

    @cached_property
    def h(self):
        return build_h_matrix(self.integrals, self.space)

    @cached_property
    def view(self):
        return SpinOrbitalView(self.integrals)

    @property
    def e_hf(self):
        return float(self.h[self.space.ref_index, self.space.ref_index])

    @cached_property
    def e_fci(self):
        return float(eig_sym(self.h)[0][0])

    @cached_property
    def amplitudes(self):
        return mp_amplitudes(self.eps, self.n_closed, self.view)

    @cached_property
    def dmap(self):
        return double_map(self.space, self.amplitudes.occ, self.amplitudes.virt)

    @property
    def ref(self):
        return self.space.unit()

    def expected_redundancy(self):
        labels = orbital_components(self.integrals)
        occ = set(range(self.n_closed))
        count = 0
        for lab in np.unique(labels):
            orbs = set(np.flatnonzero(labels == lab))
            if orbs & occ and orbs - occ:
                count += 1
        return max(count, 1)


def prepare(s, frozen=(), max_dets=DEFAULT_MAX_DETS, **rhf_kwargs):
    """Run RHF, move to canonical orbitals, fold ``frozen`` orbitals and build the space.

    ``frozen`` lists 0-based canonical orbital indices, which must be occupied.
    """
    hf = run_rhf(s, **rhf_kwargs)
    mo = s if hf.iterations == 0 and np.array_equal(hf.coeffs, np.eye(s.norb)) else transform(s, hf.coeffs)
    frozen = tuple(sorted(set(int(f) for f in frozen)))
    if any(f >= hf.n_closed or f < 0 for f in frozen):
        raise ContractError("frozen orbitals must be doubly occupied in the reference")
    act = freeze_orbitals(mo, frozen)
    keep = [p for p in range(s.norb) if p not in frozen]
    n_closed = hf.n_closed - len(frozen)
    ndet = comb(act.norb, n_closed) ** 2
    if ndet > max_dets:
        raise SizeLimitError(f"{ndet} determinants exceed the cap of {max_dets}")
    space = DetSpace(act.norb, n_closed, n_closed)
    return CorrelationProblem(act, hf, hf.orbital_energies[keep], n_closed, space, frozen)


@dataclass
class MBPTRun:
    method: str
    series: object
    problem: CorrelationProblem
    h0: np.ndarray = field(repr=False, default=None)
    lam: LambdaOperator = None

    @property
    def deviations(self):
        e = self.problem.e_fci
        return [(n, float(v - e)) for n, v in enumerate(self.series.partial_sums) if n >= 1]


def fock_h0(problem):
    """Determinant-space matrix of the Fock zero-order operator (diagonal)."""
    n = problem.integrals.norb
    return build_one_body_matrix(np.diag(problem.eps[:n]), problem.space, problem.integrals.core_energy)


def mp_series(problem, max_order):
    h0 = fock_h0(problem)
    series = run_series(Partitioning(h0, problem.h, problem.ref), max_order)
    return MBPTRun("mp", series, problem, h0)


def fit_lambda(problem, one=None, amp=None, rank_cutoff=DEFAULT_RANK_CUTOFF, expected_redundancy=None):
    """Solve for the adapted zero-order operator given a first-order vector."""
    amp = amp or problem.amplitudes
    dmap = problem.dmap
    if one is None:
        one = first_order_vector(amp, problem.space, dmap)
    p_occ, p_virt = projection_vectors(amp, problem.space, dmap)
    system = build_system(one, p_occ, p_virt, problem.h, problem.space, amp)
    if expected_redundancy is None:
        expected_redundancy = problem.expected_redundancy()
    lam = solve_lambda(system, problem.eps, problem.integrals.core_energy, problem.integrals.norb,
                       rank_cutoff, expected_redundancy)
    return lam, system


def amplitudes_from_vector(vec, like, d, dmap=None):
    """Read doubles amplitudes back out of a determinant-space vector."""
    idx, ph = dmap if dmap is not None else double_map(d, like.occ, like.virt)
    # component on a^+ b^+ j i |0> is c^{ij}_{ab} for i<j, a<b
    sl = idx.transpose(1, 0, 2, 3)
    c = np.where(sl >= 0, vec[np.maximum(sl, 0)] * ph.transpose(1, 0, 2, 3), 0.0)
    return Amplitudes(c, like.occ, like.virt)


def papt_series(problem, max_order, sc_iterations=0, rank_cutoff=DEFAULT_RANK_CUTOFF,
                expected_redundancy=None):
    """Series with the fitted one-body zero-order operator.

    ``sc_iterations > 0`` refits the operator using the adapted first-order
    wavefunction of the previous fit, that many times.
    """
    lam, _ = fit_lambda(problem, rank_cutoff=rank_cutoff, expected_redundancy=expected_redundancy)
    for _ in range(sc_iterations):
        h0 = build_one_body_matrix(lam.matrix(), problem.space, lam.const_part)
        one = run_series(Partitioning(h0, problem.h, problem.ref), 1).corrections[1]
        amp = amplitudes_from_vector(one, problem.amplitudes, problem.space, problem.dmap)
        lam, _ = fit_lambda(problem, one=one, amp=amp, rank_cutoff=rank_cutoff,
                            expected_redundancy=expected_redundancy)
    h0 = build_one_body_matrix(lam.matrix(), problem.space, lam.const_part)
    series = run_series(Partitioning(h0, problem.h, problem.ref), max_order)
    return MBPTRun("papt", series, problem, h0, lam)
