"""Order-by-order Rayleigh-Schroedinger perturbation theory for dense operators.

The engine works at full perturbation strength.  For a partitioning
``H = H0 + (H - H0)`` with a nondegenerate reference eigenvector ``|0>`` of
``H0``, the corrections obey, for ``n >= 1``::

    (H0 - E0)|n> = -(H - H0 - E1)|n-1> + sum_{m=0}^{n-2} E_{n-m} |m>

with intermediate normalization ``<0|n> = 0`` and ``E_n = <0|H - H0|n-1>``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateZeroOrderError
from .numerics import Resolvent, check_symmetric, max_abs


@dataclass
class Partitioning:
    """A zero-order operator, the full operator, and the reference eigenvector of ``h0``."""

    h0: np.ndarray
    h: np.ndarray
    ref: np.ndarray

    def __post_init__(self):
        self.h0 = check_symmetric(self.h0, "H0")
        self.h = check_symmetric(self.h, "H")
        self.ref = np.asarray(self.ref, dtype=float)
        if self.h0.shape != self.h.shape:
            raise ContractError(f"H0 {self.h0.shape} and H {self.h.shape} differ in shape")
        if self.ref.shape != (self.h.shape[0],):
            raise ContractError("reference vector dimension does not match the operators")
        nrm = np.linalg.norm(self.ref)
        if abs(nrm - 1.0) > 1e-10:
            raise ContractError(f"reference vector must be normalized (norm {nrm:.15g})")
        e0 = self.ref @ self.h0 @ self.ref
        defect = np.linalg.norm(self.h0 @ self.ref - e0 * self.ref)
        if defect > 1e-9 * max(1.0, max_abs(self.h0)):
            raise ContractError(f"reference is not an eigenvector of H0 (defect {defect:.3e})")

    @property
    def e0(self):
        return float(self.ref @ self.h0 @ self.ref)


@dataclass
class SeriesResult:
    energies: np.ndarray
    corrections: list = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    @property
    def max_order(self):
        return len(self.energies) - 1

    @property
    def partial_sums(self):
        return np.cumsum(self.energies)

    def partial_sum(self, n):
        return float(np.sum(self.energies[: n + 1]))


def run_series(p, max_order, resolvent=None):
    """Propagate the perturbation series of ``p`` to ``max_order``.

    Parameters
    ----------
    p : Partitioning
    max_order : int
        Highest energy order computed (``>= 1``).
    resolvent : Resolvent, optional
        Precomputed inverse of ``H0 - E0`` on the complement of ``p.ref``.

    Returns
    -------
    SeriesResult
        ``energies[n]`` is E_n for n = 0..max_order; ``corrections[n]`` is
        ``|n>``; ``residuals[n]`` is the norm of the order-n recursion
        residual (zero for n = 0).
    """
    if int(max_order) != max_order or max_order < 1:
        raise ContractError("max_order must be a positive integer")
    max_order = int(max_order)
    ref = p.ref
    e0 = p.e0
    w = p.h - p.h0
    e1 = float(ref @ w @ ref)
    if resolvent is None:
        try:
            resolvent = Resolvent(p.h0 - e0 * np.eye(len(ref)), ref)
        except DegenerateZeroOrderError as exc:
            raise DegenerateZeroOrderError(str(exc), order=1) from exc

    energies = [e0, e1]
    vecs = [ref.copy()]
    # (W - E1)|m> is reused both for E_{m+1} and the next right-hand side.
    wvecs = [w @ ref - e1 * ref]
    residuals = [0.0]
    m0 = p.h0 - e0 * np.eye(len(ref))
    for n in range(1, max_order + 1):
        if n >= 2:
            energies.append(float(ref @ wvecs[n - 1]))
        rhs = -wvecs[n - 1]
        for m in range(0, n - 1):
            rhs = rhs + energies[n - m] * vecs[m]
        vec = resolvent(rhs - ref * (ref @ rhs))
        res = m0 @ vec - rhs
        residuals.append(float(np.linalg.norm(res)))
        vecs.append(vec)
        if n < max_order:
            wvecs.append(w @ vec - e1 * vec)
    return SeriesResult(np.array(energies[: max_order + 1]), vecs, np.array(residuals))


def deviation_report(s, exact):
    """``(order, S_n - exact)`` for every order 1..N of a series."""
    sums = s.partial_sums
    return [(n, float(sums[n] - exact)) for n in range(1, len(sums))]
