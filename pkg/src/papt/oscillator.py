"""Harmonic oscillator with a (damped) quartic perturbation.

Units: unit mass, unit force constant, hbar = 1.  The basis is the first
``n_basis`` oscillator eigenfunctions; the perturbation is ``x**4 *
exp(-damping * x**2)`` with strength ``lam``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .numerics import eig_sym
from .rspt import Partitioning, deviation_report, run_series


@dataclass(frozen=True)
class HOModel:
    n_basis: int = 30
    lam: float = 0.1
    damping: float = 0.125
    quad_points: int = 80

    def __post_init__(self):
        if self.n_basis < 2:
            raise ContractError("n_basis must be at least 2")
        if self.quad_points < 2 * self.n_basis + 8:
            raise ContractError(
                f"quad_points={self.quad_points} too small for n_basis={self.n_basis} "
                f"(need >= {2 * self.n_basis + 8})")
        if self.damping < 0:
            raise ContractError("damping exponent must be non-negative")


def hermite_functions(n, x):
    """Normalized oscillator eigenfunctions ``phi_0..phi_{n-1}`` at points ``x``.

    Upward recurrence on the normalized functions, Gaussian included, so the
    values stay O(1) for large ``n``.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _quadrature(m):
    x, w = np.polynomial.hermite.hermgauss(m.quad_points)
    # weights for integrands that already carry exp(-x**2) through the basis functions
    return x, np.exp(np.log(w) + x * x)


def build_h0(m):
    return np.diag(np.arange(m.n_basis) + 0.5)


def build_perturbation(m):
    """Matrix of ``x**4 exp(-damping x**2)`` in the oscillator basis (Gauss-Hermite)."""
    x, w = _quadrature(m)
    phi = hermite_functions(m.n_basis, x)
    f = x ** 4 * np.exp(-m.damping * x * x)
    v = (phi * (w * f)) @ phi.T
    return 0.5 * (v + v.T)


def build_h(m):
    return build_h0(m) + m.lam * build_perturbation(m)


def build_papt_h0(m, reference_block="full"):
    """Projected zero-order operator ``P A P + (1 - P) H (1 - P)`` with ``P = |0><0|``.

    ``reference_block="full"`` sets ``A = H`` so that ``Lambda - E0`` coincides
    with ``H - <0|H|0>`` on the whole complement; this is the variant whose
    odd orders vanish.  ``reference_block="zero_order"`` keeps ``A = H0``.
    """
    h0 = build_h0(m)
    h = build_h(m)
    lam = h.copy()
    lam[0, 1:] = 0.0
    lam[1:, 0] = 0.0
    if reference_block == "full":
        lam[0, 0] = h[0, 0]
    elif reference_block == "zero_order":
        lam[0, 0] = h0[0, 0]
    else:
        raise ContractError(f"unknown reference_block {reference_block!r}")
    return lam


@dataclass
class OscillatorRun:
    method: str
    series: object
    exact: float

    @property
    def deviations(self):
        return deviation_report(self.series, self.exact)


def exact_ground(m):
    return float(eig_sym(build_h(m))[0][0])


def run_oscillator(m, max_order, method="papt", reference_block="full"):
    """Ground-state series for the oscillator model; ``method`` is ``"rspt"`` or ``"papt"``."""
    h = build_h(m)
    if method == "rspt":
        h0 = build_h0(m)
    elif method == "papt":
        h0 = build_papt_h0(m, reference_block)
    else:
        raise ContractError(f"unknown method {method!r}")
    ref = np.zeros(m.n_basis)
    ref[0] = 1.0
    series = run_series(Partitioning(h0, h, ref), max_order)
    return OscillatorRun(method, series, float(eig_sym(h)[0][0]))
