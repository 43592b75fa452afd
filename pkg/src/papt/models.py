"""Small model integral sets in orthonormal orbital bases."""
import numpy as np

from .fcidump import IntegralSet, set_eri


def h2_minimal():
    """Two-orbital, two-electron H2-like model in its canonical MO basis.

    Values are the textbook minimal-basis H2 integrals at R = 1.4 bohr.
    """
    s = IntegralSet.empty(2, 2, core_energy=1.0 / 1.4)
    s.h[0, 0] = -1.2528
    s.h[1, 1] = -0.4756
    set_eri(s.g, 0, 0, 0, 0, 0.6746)
    set_eri(s.g, 1, 1, 1, 1, 0.6975)
    set_eri(s.g, 0, 0, 1, 1, 0.6636)
    set_eri(s.g, 0, 1, 0, 1, 0.1813)
    return s


def hubbard_chain(n_sites, n_elec, t=1.0, u=1.0, periodic=False, eps=None):
    """Hubbard chain in the site basis: hopping ``-t``, on-site repulsion ``u``."""
    s = IntegralSet.empty(n_sites, n_elec)
    for i in range(n_sites - 1):
        s.h[i, i + 1] = s.h[i + 1, i] = -t
    if periodic and n_sites > 2:
        s.h[0, -1] = s.h[-1, 0] = -t
    if eps is not None:
        s.h[np.diag_indices(n_sites)] = eps
    for i in range(n_sites):
        s.g[i, i, i, i] = u
    return s


def random_molecular(norb, nelec, seed=0, spacing=1.0, coupling=0.1, eri_scale=0.3, n_aux=None):
    """Random integrals with physical structure.

    The one-electron part has levels spaced by ``spacing`` plus random
    couplings; the two-electron part is a sum of squares
    ``(pq|rs) = sum_P B^P_pq B^P_rs`` so the pair matrix is positive
    semidefinite, as for real Coulomb integrals.
    """
    rng = np.random.default_rng(seed)
    h = np.diag(spacing * np.arange(norb) - spacing * norb)
    x = rng.normal(scale=coupling, size=(norb, norb))
    h = h + 0.5 * (x + x.T)
    n_aux = n_aux or 2 * norb
    b = rng.normal(size=(n_aux, norb, norb))
    b = 0.5 * (b + b.transpose(0, 2, 1))
    # emphasise the diagonal densities, as for localized orbitals
    b += np.eye(norb)[None] * rng.uniform(0.5, 1.5, size=(n_aux, 1, 1))
    g = np.einsum("Ppq,Prs->pqrs", b, b) * eri_scale / n_aux
    return IntegralSet(norb, nelec, 0, float(rng.uniform(0.5, 2.0)), h, g)


def stretched_h2(r, u=0.6, t0=1.2, decay=1.0):
    """Two-site, two-orbital, two-electron model of a stretched H2-like bond.

    Zero-differential-overlap integrals: on-site repulsion ``u``, inter-site
    Coulomb ``1/sqrt(r**2 + 1/u**2)``, hopping ``t0 * exp(-decay * (r - 1.4))``
    and nuclear repulsion ``1/r``. Stretching closes the HOMO-LUMO gap.
    """
    s = IntegralSet.empty(2, 2, core_energy=1.0 / r)
    t = t0 * np.exp(-decay * (r - 1.4))
    v = 1.0 / np.sqrt(r * r + 1.0 / (u * u))
    s.h[0, 0] = s.h[1, 1] = -v
    s.h[0, 1] = s.h[1, 0] = -t
    set_eri(s.g, 0, 0, 0, 0, u)
    set_eri(s.g, 1, 1, 1, 1, u)
    set_eri(s.g, 0, 0, 1, 1, v)
    return s
