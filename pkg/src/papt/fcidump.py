"""FCIDUMP integral files and spin-orbital views of the integrals.

Two-electron integrals are kept in chemists' notation ``(pq|rs)`` as a dense
``norb**4`` array with all eight permutational images filled.  Spin orbitals
are ordered spatial-major: ``2*p`` is ``p`` alpha, ``2*p + 1`` is ``p`` beta.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ContractError, FCIDumpError

log = logging.getLogger(__name__)


@dataclass
class IntegralSet:
    norb: int
    nelec: int
    ms2: int
    core_energy: float
    h: np.ndarray
    g: np.ndarray
    orbsym: list = field(default_factory=list)
    isym: int = 1

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        n = self.norb
        if self.h.shape != (n, n) or self.g.shape != (n, n, n, n):
            raise ContractError(
                f"integral shapes {self.h.shape}, {self.g.shape} inconsistent with norb={n}")
        if not self.orbsym:
            self.orbsym = [1] * n

    @classmethod
    def empty(cls, norb, nelec, ms2=0, core_energy=0.0):
        return cls(norb, nelec, ms2, core_energy, np.zeros((norb, norb)), np.zeros((norb,) * 4))

    def copy(self):
        return IntegralSet(self.norb, self.nelec, self.ms2, self.core_energy, self.h.copy(),
                           self.g.copy(), list(self.orbsym), self.isym)

    def equals(self, other):
        """Exact equality of every field."""
        return (self.norb == other.norb and self.nelec == other.nelec and self.ms2 == other.ms2
                and self.core_energy == other.core_energy and self.isym == other.isym
                and list(self.orbsym) == list(other.orbsym)
                and np.array_equal(self.h, other.h) and np.array_equal(self.g, other.g))

    def symmetry_defect(self):
        g = self.g
        return max(
            np.max(np.abs(self.h - self.h.T), initial=0.0),
            np.max(np.abs(g - g.transpose(1, 0, 2, 3)), initial=0.0),
            np.max(np.abs(g - g.transpose(0, 1, 3, 2)), initial=0.0),
            np.max(np.abs(g - g.transpose(2, 3, 0, 1)), initial=0.0),
        )

    @property
    def n_alpha(self):
        return (self.nelec + self.ms2) // 2

    @property
    def n_beta(self):
        return (self.nelec - self.ms2) // 2


def set_eri(g, p, q, r, s, value):
    """Store ``value`` at ``(pq|rs)`` and its seven symmetry images."""
    for a, b, c, d in ((p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
                       (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p)):
        g[a, b, c, d] = value


_HEADER_END = re.compile(r"(&END|/)", re.IGNORECASE)
_KEYVAL = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*([^=]*?)(?=\s*[A-Za-z][A-Za-z0-9_]*\s*=|$)", re.S)


def _parse_header(text):
    m = _HEADER_END.search(text)
    if not m or not text.lstrip().upper().startswith("&FCI"):
        raise FCIDumpError("missing &FCI ... &END namelist header", line=1)
    body = text[: m.start()].lstrip()[4:]
    rest = text[m.end():]
    nlines = text[: m.end()].count("\n") + 1
    fields = {}
    for key, val in _KEYVAL.findall(body):
        items = [v for v in re.split(r"[,\s]+", val.strip()) if v]
        fields[key.upper()] = items
    return fields, rest, nlines


def _int_field(fields, key, required=True, default=None):
    if key not in fields:
        if required:
            raise FCIDumpError(f"header is missing {key}", line=1)
        return default
    try:
        return int(fields[key][0])
    except (IndexError, ValueError):
        raise FCIDumpError(f"bad value for {key}: {fields[key]!r}", line=1) from None


def parse(text):
    """Parse FCIDUMP text into an IntegralSet."""
    fields, rest, line0 = _parse_header(text)
    norb = _int_field(fields, "NORB")
    nelec = _int_field(fields, "NELEC")
    ms2 = _int_field(fields, "MS2", required=False, default=0)
    isym = _int_field(fields, "ISYM", required=False, default=1)
    orbsym = [int(v) for v in fields.get("ORBSYM", [])] or [1] * norb
    if norb < 1:
        raise FCIDumpError(f"NORB must be positive, got {norb}", line=1)
    if len(orbsym) != norb:
        raise FCIDumpError(f"ORBSYM has {len(orbsym)} entries for NORB={norb}", line=1)
    s = IntegralSet.empty(norb, nelec, ms2)
    s.orbsym = orbsym
    s.isym = isym
    # rest starts on the line holding the terminator
    for lineno, line in enumerate(rest.split("\n"), start=line0):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FCIDumpError(f"expected 'value i j k l', got {line.strip()!r}", line=lineno)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(v) for v in parts[1:])
        except ValueError:
            raise FCIDumpError(f"malformed record {line.strip()!r}", line=lineno) from None
        if any(v < 0 or v > norb for v in (i, j, k, l)):
            raise FCIDumpError(f"orbital index out of range 1..{norb}", line=lineno)
        if i == j == k == l == 0:
            s.core_energy = value
        elif k == l == 0:
            if i == 0 or j == 0:
                # orbital-energy records ("e i 0 0 0") carry no integral data
                log.debug("skipping orbital energy record on line %d", lineno)
                continue
            s.h[i - 1, j - 1] = s.h[j - 1, i - 1] = value
        elif 0 in (i, j, k, l):
            raise FCIDumpError(f"malformed index pattern {i} {j} {k} {l}", line=lineno)
        else:
            set_eri(s.g, i - 1, j - 1, k - 1, l - 1, value)
    return s


def _fmt(v):
    return f"{v:.16e}"


def write(s):
    """FCIDUMP text for ``s``; one record per unique nonzero integral, core energy last."""
    n = s.norb
    out = [f"&FCI NORB={n},NELEC={s.nelec},MS2={s.ms2},",
           " ORBSYM=" + ",".join(str(v) for v in s.orbsym) + ",",
           f" ISYM={s.isym},",
           "&END"]
    for p in range(n):
        for q in range(p + 1):
            pq = p * (p + 1) // 2 + q
            for r in range(n):
                for t in range(r + 1):
                    if r * (r + 1) // 2 + t > pq:
                        break
                    v = s.g[p, q, r, t]
                    if v != 0.0:
                        out.append(f"{_fmt(v)} {p + 1} {q + 1} {r + 1} {t + 1}")
    for p in range(n):
        for q in range(p + 1):
            if s.h[p, q] != 0.0:
                out.append(f"{_fmt(s.h[p, q])} {p + 1} {q + 1} 0 0")
    out.append(f"{_fmt(s.core_energy)} 0 0 0 0")
    return "\n".join(out) + "\n"


def read(path):
    return parse(Path(path).read_text())


def dump(s, path):
    Path(path).write_text(write(s))


class SpinOrbitalView:
    """Antisymmetrized two-electron integrals ``<pq||rs>`` over spin orbitals."""

    def __init__(self, s):
        self.integrals = s
        self.nso = 2 * s.norb

    def antisym(self, p, q, r, s):
        g = self.integrals.g
        sp, sq, sr, ss = p & 1, q & 1, r & 1, s & 1
        val = 0.0
        if sp == sr and sq == ss:
            val += g[p >> 1, r >> 1, q >> 1, s >> 1]
        if sp == ss and sq == sr:
            val -= g[p >> 1, s >> 1, q >> 1, r >> 1]
        return float(val)

    def h_so(self):
        h = np.kron(self.integrals.h, np.eye(2))
        return h

    def tensor(self):
        """Full ``<pq||rs>`` array of shape ``(nso,) * 4``."""
        g = self.integrals.g
        spin = np.eye(2)
        # <pq|rs> = (pr|qs) delta(sp,sr) delta(sq,ss)
        phys = np.einsum("PRQS,pr,qs->PpQqRrSs", g, spin, spin)
        phys = phys.reshape((self.nso,) * 4)
        return phys - phys.transpose(0, 1, 3, 2)


def antisym(v, p, q, r, s):
    return v.antisym(p, q, r, s)


def block_dimer(a, b):
    """Noninteracting composite of two integral sets, orbitals of ``a`` first."""
    na, nb = a.norb, b.norb
    n = na + nb
    h = np.zeros((n, n))
    h[:na, :na] = a.h
    h[na:, na:] = b.h
    g = np.zeros((n,) * 4)
    g[:na, :na, :na, :na] = a.g
    g[na:, na:, na:, na:] = b.g
    return IntegralSet(n, a.nelec + b.nelec, a.ms2 + b.ms2, a.core_energy + b.core_energy,
                       h, g, list(a.orbsym) + list(b.orbsym), 1)


def freeze_orbitals(s, frozen):
    """Fold doubly occupied ``frozen`` orbitals into ``h`` and the core energy.

    Returns the IntegralSet over the remaining orbitals, in their original order.
    """
    frozen = sorted(set(int(f) for f in frozen))
    if not frozen:
        return s.copy()
    if frozen[0] < 0 or frozen[-1] >= s.norb:
        raise ContractError(f"frozen orbital out of range 0..{s.norb - 1}")
    if 2 * len(frozen) > s.nelec:
        raise ContractError("more frozen electrons than electrons")
    act = [p for p in range(s.norb) if p not in frozen]
    f = np.array(frozen)
    g = s.g
    coul = np.einsum("pqff->pq", g[:, :, f][:, :, :, f])
    exch = np.einsum("pffq->pq", g[:, f][:, :, f])
    ecore = s.core_energy + 2.0 * np.trace(s.h[np.ix_(f, f)])
    ecore += np.einsum("ffgg->", g[np.ix_(f, f, f, f)]) * 2.0 - np.einsum("fggf->", g[np.ix_(f, f, f, f)])
    heff = s.h + 2.0 * coul - exch
    a = np.array(act, dtype=int)
    return IntegralSet(len(act), s.nelec - 2 * len(frozen), s.ms2, float(ecore),
                       heff[np.ix_(a, a)], g[np.ix_(a, a, a, a)],
                       [s.orbsym[p] for p in act], s.isym)


def orbital_components(s, tol=0.0):
    """Label orbitals by connected component of the integral coupling graph.

    Orbitals ``p`` and ``q`` are linked when ``h_pq`` or any ``(pq|rs)`` or
    ``(pr|qs)``-type element connecting them is nonzero.
    """
    n = s.norb
    link = np.abs(s.h) > tol
    ag = np.abs(s.g) > tol
    link |= ag.any(axis=(2, 3))
    link |= ag.any(axis=(1, 3))
    link |= ag.any(axis=(1, 2))
    rows, cols = np.nonzero(link | link.T)
    graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    return labels
