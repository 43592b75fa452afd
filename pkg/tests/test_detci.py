import itertools

import numpy as np
import pytest

import second_quant as sq
from conftest import random_integrals
from papt import _kernels
from papt.detci import (Determinant, DetSpace, apply_excitation, apply_one_body_components,
                        apply_string, build_h_matrix, build_one_body_matrix, deinterleave,
                        enumerate_space, fci_ground, interleave, one_body_connectivity)
from papt.errors import ContractError
from papt.fcidump import SpinOrbitalView
from papt.models import h2_minimal, hubbard_chain, random_molecular

# every (integrals, space) pair with at most six spin orbitals
SMALL = [
    ("h2", lambda: h2_minimal(), (2, 1, 1)),
    ("h2-triplet", lambda: h2_minimal(), (2, 2, 0)),
    ("rand1", lambda: random_integrals(1, 2, seed=0), (1, 1, 1)),
    ("rand2-1e", lambda: random_integrals(2, 1, seed=1), (2, 1, 0)),
    ("rand2-3e", lambda: random_integrals(2, 3, seed=2), (2, 2, 1)),
    ("rand3-2e", lambda: random_integrals(3, 2, seed=3), (3, 1, 1)),
    ("rand3-3e", lambda: random_integrals(3, 3, seed=4), (3, 2, 1)),
    ("rand3-4e", lambda: random_integrals(3, 4, seed=5), (3, 2, 2)),
    ("rand3-5e", lambda: random_integrals(3, 5, seed=6), (3, 3, 2)),
    ("rand3-6e", lambda: random_integrals(3, 6, seed=7), (3, 3, 3)),
    ("mol3", lambda: random_molecular(3, 2, seed=8), (3, 1, 1)),
    ("hubbard3", lambda: hubbard_chain(3, 4, u=2.0, periodic=True), (3, 2, 2)),
    ("frozen", lambda: random_integrals(3, 4, seed=9), (3, 2, 2, (0,))),
]


def _space(args):
    return DetSpace(*args)


def test_counts_and_order():
    d = enumerate_space(4, 2, 2)
    assert len(d) == 36 == d.expected_size
    assert d.dets[0] == Determinant(0b0011, 0b0011)
    assert d.dets[1] == Determinant(0b0011, 0b0101)
    assert d.dets[6] == Determinant(0b0101, 0b0011)
    assert len(DetSpace(3, 2, 1)) == 9
    f = DetSpace(4, 2, 2, frozen=[0])
    assert len(f) == 9 == f.expected_size
    assert all(det.alpha & 1 and det.beta & 1 for det in f.dets)
    assert d.index[d.dets[17]] == 17


def test_space_validation():
    with pytest.raises(ContractError):
        DetSpace(2, 3, 0)
    with pytest.raises(ContractError):
        DetSpace(3, 1, 1, frozen=[3])
    with pytest.raises(ContractError):
        DetSpace(3, 0, 1, frozen=[0])
    with pytest.raises(ContractError):
        DetSpace(32, 1, 1)


def test_interleave_round_trip():
    for a, b in itertools.product(range(16), repeat=2):
        key = interleave(a, b, 4)
        assert deinterleave(key, 4) == Determinant(a, b)
    assert interleave(0b1, 0b0, 2) == 0b0001
    assert interleave(0b0, 0b1, 2) == 0b0010
    assert interleave(0b10, 0b0, 2) == 0b0100


def test_apply_string_against_oracle(rng):
    nso = 6
    for _ in range(300):
        key = int(rng.integers(0, 2 ** nso))
        nops = int(rng.integers(1, 5))
        ops = [(bool(rng.integers(2)), int(rng.integers(nso))) for _ in range(nops)]
        got = apply_string(key, ops)
        want = sq.apply([("+" if dag else "-", k) for dag, k in ops], {sq.occ_tuple(key, nso): 1.0})
        if got is None:
            assert not want
        else:
            new, phase = got
            assert want == {sq.occ_tuple(new, nso): float(phase)}


def test_apply_excitation_phases():
    d = DetSpace(3, 1, 1)
    ref = d.dets[0]
    # a^+_{2a} a_{0a}: bit 0 removed with no bits below, bit 4 added above bit 1 -> -1
    det, ph = apply_excitation(d, ref, [4], [0])
    assert det == Determinant(0b100, 0b001) and ph == -1
    det, ph = apply_excitation(d, ref, [5], [1])
    assert det == Determinant(0b001, 0b100) and ph == 1
    # a^+ b^+ j i with i = 0a, j = 0b
    det, ph = apply_excitation(d, ref, [2, 3], [1, 0])
    assert det == Determinant(0b010, 0b010) and ph == 1
    det2, ph2 = apply_excitation(d, ref, [3, 2], [1, 0])
    assert det2 == det and ph2 == -ph
    assert apply_excitation(d, ref, [0], [0]) is not None
    assert apply_excitation(d, ref, [2], [2]) is None
    with pytest.raises(ContractError):
        apply_excitation(d, ref, [6], [0])


@pytest.mark.parametrize("name,factory,args", SMALL, ids=[c[0] for c in SMALL])
def test_hamiltonian_matches_operator_strings(name, factory, args):
    s = factory()
    d = _space(args)
    assert d.nso <= 6
    brute = sq.operator_matrix(d.keys, d.nso, sq.hamiltonian_terms(s), s.core_energy)
    np.testing.assert_allclose(build_h_matrix(s, d), brute, rtol=0, atol=1e-12)


@pytest.mark.parametrize("name,factory,args", SMALL, ids=[c[0] for c in SMALL])
def test_one_body_matches_operator_strings(name, factory, args, rng):
    d = _space(args)
    x = rng.normal(size=(d.norb, d.norb))
    lam = 0.5 * (x + x.T)
    brute = sq.operator_matrix(d.keys, d.nso, sq.one_body_terms(lam), 0.75)
    np.testing.assert_allclose(build_one_body_matrix(lam, d, 0.75), brute, rtol=0, atol=1e-12)


def test_one_body_components(rng):
    d = DetSpace(3, 2, 1)
    vec = rng.normal(size=len(d))
    comp = apply_one_body_components(d, vec).toarray()
    for p, q in itertools.product(range(d.nso), repeat=2):
        if p % 2 != q % 2:
            assert not comp[:, p * d.nso + q].any()
            continue
        m = sq.operator_matrix(d.keys, d.nso, [(1.0, [("+", p), ("-", q)])])
        np.testing.assert_allclose(comp[:, p * d.nso + q], m @ vec, atol=1e-14)


def test_connectivity_layout():
    d = DetSpace(3, 1, 1)
    rows, cols, pq, ph = one_body_connectivity(d)
    m = np.zeros((len(d), len(d)))
    lam = np.arange(9.0).reshape(3, 3)
    lam = lam + lam.T
    lam_so = np.kron(lam, np.eye(2))
    m[rows, cols] = ph * lam_so.ravel()[pq]
    full = build_one_body_matrix(lam, d)
    np.testing.assert_array_equal(m, full - np.diag(np.diag(full)))


def test_h2_closed_form():
    s = h2_minimal()
    d = DetSpace(2, 1, 1)
    h = build_h_matrix(s, d)
    g = s.g
    e11 = 2 * s.h[0, 0] + g[0, 0, 0, 0] + s.core_energy
    e22 = 2 * s.h[1, 1] + g[1, 1, 1, 1] + s.core_energy
    k = g[0, 1, 0, 1]
    exact = 0.5 * (e11 + e22) - np.sqrt(0.25 * (e11 - e22) ** 2 + k * k)
    assert h[0, 0] == pytest.approx(e11, abs=1e-14)
    assert fci_ground(s, d) == pytest.approx(exact, abs=1e-12)
    assert fci_ground(s, d) == pytest.approx(-1.1373, abs=2e-4)


def test_fci_dimension_check():
    with pytest.raises(ContractError):
        build_h_matrix(h2_minimal(), DetSpace(3, 1, 1))
    with pytest.raises(ContractError):
        build_one_body_matrix(np.eye(2), DetSpace(3, 1, 1))


class TestKernelsAgree:
    @pytest.mark.parametrize("norb,na,nb,seed", [(4, 2, 2, 0), (5, 2, 3, 1), (6, 3, 3, 2)])
    def test_slater_condon(self, norb, na, nb, seed):
        s = random_molecular(norb, na + nb, seed=seed)
        d = DetSpace(norb, na, nb)
        v = SpinOrbitalView(s)
        a = _kernels.slater_condon_nb(d.keys, v.h_so(), v.tensor(), s.core_energy)
        b = _kernels.slater_condon_np(d.keys, v.h_so(), v.tensor(), s.core_energy)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
        np.testing.assert_array_equal(a, a.T)

    @pytest.mark.parametrize("norb,na,nb", [(4, 2, 2), (5, 1, 3), (6, 3, 3)])
    def test_single_table(self, norb, na, nb):
        d = DetSpace(norb, na, nb)
        order = np.argsort(d.keys)
        args = (d.keys, d.keys[order], order, d.nso)
        a = np.array(_kernels.single_table_nb(*args))
        b = np.array(_kernels.single_table_np(*args))
        sort_a = np.lexsort(a[:4])
        sort_b = np.lexsort(b[:4])
        np.testing.assert_array_equal(a[:, sort_a], b[:, sort_b])


def test_small_space_examples():
    assert len(DetSpace(2, 1, 1)) == 4
    assert len(DetSpace(3, 2, 2, frozen=[0])) == 4
    assert len(DetSpace(6, 3, 3)) == 400
    s = random_integrals(2, 4, seed=3)
    d = DetSpace(2, 2, 2)
    h = build_h_matrix(s, d)
    e = 2 * np.trace(s.h) + s.core_energy
    for p in range(2):
        for q in range(2):
            e += 2 * s.g[p, p, q, q] - s.g[p, q, q, p]
    assert h.shape == (1, 1) and h[0, 0] == pytest.approx(e, abs=1e-13)
    assert fci_ground(s, d) == h[0, 0]


def test_one_body_examples(rng):
    d = DetSpace(4, 2, 1)
    np.testing.assert_array_equal(build_one_body_matrix(np.eye(4), d), 3 * np.eye(len(d)))
    x = rng.normal(size=(3, 3))
    lam = x + x.T
    m = build_one_body_matrix(lam, DetSpace(3, 1, 1), 0.4)
    assert m[0, 0] == pytest.approx(2 * lam[0, 0] + 0.4)


def test_triple_excitations_vanish():
    s = random_integrals(4, 3, seed=8)
    d = DetSpace(4, 2, 1)
    h = build_h_matrix(s, d)
    occ = d.occupations()
    diff = np.abs(occ[:, None, :] - occ[None, :, :]).sum(axis=2)
    assert (diff == 6).any()
    assert not h[diff > 4].any()
    assert h[diff == 4].any()


def test_dimer_fci_additive():
    from papt.fcidump import block_dimer
    a = h2_minimal()
    e = fci_ground(a, DetSpace(2, 1, 1))
    assert fci_ground(block_dimer(a, a), DetSpace(4, 2, 2)) == pytest.approx(2 * e, abs=1e-10)
