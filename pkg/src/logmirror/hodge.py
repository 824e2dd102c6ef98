"""The reduction engine.

Every element of the truncated Hodge module is rewritten in the good basis
by exact Gaussian elimination, one weight stratum at a time.  A stratum of
weight ``w`` has as columns every atom ``(j, m, beta, e)`` of that weight with
``j >= 0`` and truncation order at most ``K``; its rows are the relations
``Row(h, i)`` for the atoms ``h`` of weight ``w - 2``.  Basis columns (those
with ``m`` one of the good-basis points) are never pivots, so the normal form
of any other column is read off its pivot row.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Sequence

from .errors import BoundExceeded, ModelError
from .monoidring import HodgeElement, MonoidRing
from .scalars import ONE, Q, ZERO, Series, SeriesRing


def compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in compositions(total - k, parts - 1):
            yield (k,) + rest


class ReductionTable:
    """Lazily built, cached normal forms for a monoid ring at truncation K.

    ``pivot_order`` selects which non-basis column becomes the pivot of a new
    row: ``"high"`` (default), ``"low"`` or ``"random:<seed>"``.  Results do
    not depend on it; the option exists so that this can be tested.

    ``method="shifted"`` (default) uses that a row of ``u^j h`` is ``u^j``
    times a row of ``h``: only atoms without u are unknowns, and columns
    carrying u are replaced by their (already known) lower-weight normal
    forms.  ``method="full"`` solves every stratum from scratch over all
    u-powers; strata are then independent and can be built in parallel.
    """

    def __init__(self, mr: MonoidRing, K: int, pivot_order: str = "high",
                 method: str = "shifted"):
        if method not in ("shifted", "full"):
            raise ValueError(f"unknown reduction method {method!r}")
        self.mr = mr
        self.K = K
        self.method = method
        self.ring: SeriesRing = mr.ring(K)
        self.mu = len(mr.basis_m)
        self.pivot_order = pivot_order
        self._basis_index = {m: i for i, m in enumerate(mr.basis_m)}
        self._strata: dict = {}
        self._points: dict = {}
        self._classes = mr.cd.enumerate(K)
        self._t_exps = [e for e in product(range(K + 1), repeat=mr.s) if sum(e) <= K]
        self._centers = [self._row_coefficients(i) for i in range(mr.n)]
        self._rng = None
        if pivot_order.startswith("random"):
            self._rng = random.Random(int(pivot_order.partition(":")[2] or 0))

    # -- enumeration --------------------------------------------------------
    def points_of_degree(self, D: int) -> list[tuple]:
        got = self._points.get(D)
        if got is None:
            fan = self.mr.fan
            pts = set()
            for cone in fan.max_cones:
                for comp in compositions(D, fan.n):
                    pts.add(tuple(sum(c * fan.rays[l][x] for c, l in zip(comp, cone))
                                  for x in range(fan.n)))
            got = sorted(pts)
            self._points[D] = got
        return got

    def atoms_of_weight(self, w: int, u_free: bool = False) -> list[tuple]:
        mr = self.mr
        out = []
        for beta in self._classes:
            ob = mr.cd.order(beta)
            wb = mr.cd.weight(beta)
            for e in self._t_exps:
                if ob + sum(e) > self.K:
                    continue
                we = wb + sum(a * b for a, b in zip(mr.t_weights, e))
                rest = w - we
                if rest < 0 or rest % 2:
                    continue
                for j in range(1 if u_free else rest // 2 + 1):
                    D = rest // 2 - j
                    for m in self.points_of_degree(D):
                        out.append((j, m, beta, e))
        return out

    # -- relations ---------------------------------------------------------
    def _row_coefficients(self, i: int):
        """Pieces of Row(., i): ray coefficients a_is and t-coefficients."""
        mr = self.mr
        zs = [(mr.ray_mono(s), Q(mr.ref.a[i][s])) for s in range(mr.fan.d) if mr.ref.a[i][s]]
        ts = []
        for k, j in enumerate(mr.t_dirs):
            c = mr.ref_coords(mr.basis_m[j])[i]
            if c:
                e = [0] * mr.s
                e[k] = 1
                ts.append((mr.basis_mono(j), tuple(e), Q(c)))
        return zs, ts

    def relation_row(self, h: tuple, i: int) -> dict:
        mr = self.mr
        j, m, beta, e = h
        zs, ts = self._centers[i]
        row: dict = {}

        def put(atom, c):
            if mr.atom_order(atom) > self.K:
                return
            v = row.get(atom, ZERO) + c
            if v:
                row[atom] = v
            else:
                row.pop(atom, None)

        for mono, c in zs:
            m2, b2 = mr.mono_mul((m, beta), mono)
            put((j, m2, b2, e), c)
        for mono, te, c in ts:
            m2, b2 = mr.mono_mul((m, beta), mono)
            put((j, m2, b2, tuple(x + y for x, y in zip(e, te))), c)
        ci = mr.ref_coords(m)[i]
        if ci:
            put((j + 1, m, beta, e), Q(ci))
        return row

    def relation_element(self, h: tuple, i: int) -> HodgeElement:
        return HodgeElement(self.mr, self.relation_row(h, i))

    # -- elimination -------------------------------------------------------
    def is_basis(self, atom: tuple) -> bool:
        return atom[1] in self._basis_index

    def _choose(self, cands: list[tuple]) -> tuple:
        if self._rng is not None:
            return self._rng.choice(sorted(cands))
        key = lambda a: (sum(self.mr.alpha(a[1])), a)
        return max(cands, key=key) if self.pivot_order == "high" else min(cands, key=key)

    def stratum(self, w: int) -> dict:
        """Normal forms {atom: {basis atom: coefficient}} of weight w."""
        got = self._strata.get(w)
        if got is None:
            got = build_stratum(self, w)
            self._strata[w] = got
        return got

    def prebuild(self, weights: Sequence[int], parallel: bool = False) -> None:
        todo = sorted(set(w for w in weights if w not in self._strata))
        if parallel and len(todo) > 1 and self.method == "full":
            with ProcessPoolExecutor() as ex:
                jobs = [(self.mr, self.K, self.pivot_order, w) for w in todo]
                for w, nf in zip(todo, ex.map(_stratum_worker, jobs)):
                    self._strata[w] = nf
        else:
            for w in todo:
                self.stratum(w)

    # -- reduction ---------------------------------------------------------
    def normal_form(self, atom: tuple) -> dict:
        """Basis expansion of a single atom, shifting the u-power to zero."""
        mr = self.mr
        if mr.atom_order(atom) > self.K:
            return {}
        j = atom[0]
        a0 = (0,) + atom[1:]
        if self.is_basis(a0):
            return {atom: ONE}
        nf = self.stratum(mr.atom_weight(a0)).get(a0)
        if nf is None:
            raise BoundExceeded(f"atom {mr.render_atom(atom)} is outside the reduction table")
        if not j:
            return nf
        return {(b[0] + j,) + b[1:]: c for b, c in nf.items()}

    def reduce_terms(self, terms: dict) -> dict:
        out: dict = {}
        for atom, c in terms.items():
            for b, v in self.normal_form(atom).items():
                x = out.get(b, ZERO) + c * v
                if x:
                    out[b] = x
                else:
                    out.pop(b, None)
        return out

    def coordinates(self, basis_terms: dict) -> list[Series]:
        ring = self.ring
        coords: list[dict] = [{} for _ in range(self.mu)]
        for (j, m, beta, e), c in basis_terms.items():
            coords[self._basis_index[m]][(j, *beta, *e)] = c
        return [Series(ring, t) for t in coords]

    def reduce(self, x: HodgeElement) -> list[Series]:
        return self.coordinates(self.reduce_terms(x.terms))

    def element(self, coords: Sequence[Series]) -> HodgeElement:
        """Inverse of reduce: the basis combination with given coordinates."""
        mr = self.mr
        r = mr.r
        terms = {}
        for i, s in enumerate(coords):
            for key, c in s.terms.items():
                terms[(key[0], mr.basis_m[i], tuple(key[1:1 + r]), tuple(key[1 + r:]))] = c
        return HodgeElement(mr, terms)


def _substitute_shifted(table: ReductionTable, row: dict) -> dict:
    out: dict = {}
    for a, c in row.items():
        if a[0] and not table.is_basis(a):
            items = table.normal_form(a).items()
        else:
            items = ((a, ONE),)
        for k, v in items:
            x = out.get(k, ZERO) + c * v
            if x:
                out[k] = x
            else:
                out.pop(k, None)
    return out


def build_stratum(table: ReductionTable, w: int) -> dict:
    mr = table.mr
    shifted = table.method == "shifted"
    cols = table.atoms_of_weight(w, u_free=shifted)
    nonbasis = [a for a in cols if not table.is_basis(a) and not a[0]]
    pivots: dict = {}           # pivot column -> row (dict)
    occurs: dict = {}           # column -> set of pivot columns whose rows contain it
    for h in table.atoms_of_weight(w - 2, u_free=shifted):
        for i in range(mr.n):
            row = table.relation_row(h, i)
            if shifted:
                row = _substitute_shifted(table, row)
            for c in [c for c in row if c in pivots]:
                f = row.get(c)
                if not f:
                    continue
                for k, v in pivots[c].items():
                    x = row.get(k, ZERO) - f * v
                    if x:
                        row[k] = x
                    else:
                        row.pop(k, None)
            if not row:
                continue
            cands = [c for c in row if not table.is_basis(c)]
            if not cands:
                raise ModelError(f"relation among basis elements in weight {w}: the module is not free")
            p = table._choose(cands)
            inv = ONE / row[p]
            row = {k: v * inv for k, v in row.items()}
            # keep stored rows fully reduced: clear p from every row holding it
            for other in occurs.pop(p, ()):
                orow = pivots[other]
                f = orow.pop(p)
                for k, v in row.items():
                    if k == p:
                        continue
                    x = orow.get(k, ZERO) - f * v
                    if x:
                        orow[k] = x
                        occurs.setdefault(k, set()).add(other)
                    else:
                        orow.pop(k, None)
                        occurs[k].discard(other)
            pivots[p] = row
            for k in row:
                if k != p:
                    occurs.setdefault(k, set()).add(p)
    nf = {}
    for a in nonbasis:
        row = pivots.get(a)
        if row is None:
            raise ModelError(f"atom {mr.render_atom(a)} of weight {w} is not reducible")
        out = {}
        for k, v in row.items():
            if k == a:
                continue
            if not table.is_basis(k):
                raise ModelError("elimination left a non-basis column unreduced")
            out[k] = -v
        nf[a] = out
    return nf


def _stratum_worker(args):
    mr, K, order, w = args
    return build_stratum(ReductionTable(mr, K, order, "full"), w)


# -- central fiber ----------------------------------------------------------

def central_ring(mr: MonoidRing) -> list[list[list[Q]]]:
    """Structure constants c[i][j][k] of phi_i * phi_j at q = t = u = 0."""
    table = ReductionTable(mr, 0)
    mu = table.mu
    out = []
    for i in range(mu):
        row = []
        for j in range(mu):
            prod = HodgeElement.of(mr, mr.basis_mono(i)) * HodgeElement.of(mr, mr.basis_mono(j))
            coords = table.reduce(prod)
            row.append([s.u_coeff(0).constant() for s in coords])
        out.append(row)
    return out


def poincare_pairing(mr: MonoidRing, ring_table=None) -> list[list[Q]]:
    ct = ring_table if ring_table is not None else central_ring(mr)
    mu = len(ct)
    top = max(range(mu), key=lambda k: mr.basis_w[k])
    norm = ct[0][top][top]
    if not norm:
        raise ModelError("top basis element does not pair with the unit")
    return [[ct[i][j][top] / norm for j in range(mu)] for i in range(mu)]
