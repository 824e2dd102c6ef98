"""Curve classes: the kernel lattice of the ray map, the Mori monoid P with
its facet description, the anticanonical weight and the truncation order."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

from .errors import InputError, ModelError
from .fan import Fan, ReferenceFrame, _normal, fm_feasible, walls
from .scalars import Q, mat_inverse

MAX_RANK = 6


class UnsupportedRank(InputError):
    """Picard rank above the facet-enumeration bound."""


def hermite_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style Hermite normal form of an integer matrix of full row rank."""
    A = [list(r) for r in rows]
    m = len(A)
    ncols = len(A[0]) if A else 0
    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c]]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(A[i][c]))
            A[r], A[p] = A[p], A[r]
            done = True
            for i in range(r + 1, m):
                if A[i][c]:
                    f = A[i][c] // A[r][c]
                    A[i] = [x - f * y for x, y in zip(A[i], A[r])]
                    if A[i][c]:
                        done = False
            if done:
                break
        if not A[r][c]:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
        for i in range(r):
            f = A[i][c] // A[r][c]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
    return A


@dataclass(frozen=True)
class CurveData:
    kernel_basis: tuple        # r vectors in Z^d
    pivots: tuple              # columns used to read off kernel coordinates
    pivot_inverse: tuple       # rational inverse of the pivot block
    wall_classes: tuple        # generators of P in kernel coordinates
    nef_inequalities: tuple    # facet normals, member iff all >= 0
    qc: tuple                  # qc(beta) = sum_k qc[k] * beta[k]
    lam: tuple                 # integral, >= 1 on every wall class

    @property
    def r(self) -> int:
        return len(self.kernel_basis)

    def coords(self, v: Sequence[int]) -> tuple:
        """Kernel coordinates of a relation vector v in Z^d."""
        sub = [v[p] for p in self.pivots]
        out = []
        for k in range(self.r):
            x = sum((sub[j] * self.pivot_inverse[j][k] for j in range(self.r)), Q(0))
            if x.denominator != 1:
                raise ModelError(f"{list(v)} is not in the kernel lattice")
            out.append(int(x))
        return tuple(out)

    def embed(self, beta: Sequence[int]) -> tuple:
        d = len(self.kernel_basis[0])
        return tuple(sum(b * kv[i] for b, kv in zip(beta, self.kernel_basis)) for i in range(d))

    def member(self, beta: Sequence[int]) -> bool:
        return all(sum(a * b for a, b in zip(nrm, beta)) >= 0 for nrm in self.nef_inequalities)

    def weight(self, beta: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.qc, beta))

    def order(self, beta: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.lam, beta))

    @property
    def semi_fano(self) -> bool:
        return all(self.weight(w) >= 0 for w in self.wall_classes)

    @property
    def fano(self) -> bool:
        return all(self.weight(w) > 0 for w in self.wall_classes)

    def enumerate(self, K: int) -> list[tuple]:
        """All p in P with lambda(p) <= K, sorted by (lambda, lex)."""
        bound = [0] * self.r
        for w in self.wall_classes:
            c = K // self.order(w)
            for k in range(self.r):
                bound[k] += c * abs(w[k])
        pts = []
        for p in product(*[range(-b, b + 1) for b in bound]):
            if self.order(p) <= K and self.member(p):
                pts.append(p)
        pts.sort(key=lambda p: (self.order(p), p))
        return pts


def _kernel_rows(fan: Fan) -> list[list[int]]:
    # a Z-basis of the kernel from any unimodular cone
    cone = fan.max_cones[0]
    M = [[fan.rays[i][r] for i in cone] for r in range(fan.n)]
    inv = mat_inverse(M)
    rows = []
    for l in range(fan.d):
        if l in cone:
            continue
        v = [0] * fan.d
        v[l] = 1
        for i, ci in enumerate(cone):
            v[ci] -= int(sum((inv[i][j] * fan.rays[l][j] for j in range(fan.n)), Q(0)))
        rows.append(v)
    return rows


def _facets(gens: list[tuple], r: int) -> list[tuple]:
    out = set()
    for sub in combinations(gens, r - 1):
        nrm = _normal(sub, r)
        if not any(nrm):
            continue
        vals = [sum(a * b for a, b in zip(nrm, g)) for g in gens]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            nrm = [-x for x in nrm]
        else:
            continue
        g = math.gcd(*nrm)
        out.add(tuple(x // g for x in nrm))
    return sorted(out)


def curve_data(fan: Fan) -> CurveData:
    r = fan.d - fan.n
    if r < 1:
        raise ModelError("a complete fan has at least n+1 rays")
    if r > MAX_RANK:
        raise UnsupportedRank(f"Picard rank {r} exceeds the supported bound {MAX_RANK}")
    rev = [list(reversed(v)) for v in _kernel_rows(fan)]
    basis = [list(reversed(v)) for v in hermite_rows(rev)]
    pivots = []
    for v in basis:
        pivots.append(max(i for i in range(fan.d) if v[i]))
    block = [[basis[k][p] for k in range(r)] for p in pivots]  # rows: pivot, cols: basis vector
    inv = mat_inverse(block)
    # coords c satisfy sum_k c_k basis[k][p] = v[p]: c = inv @ v[pivots]
    pinv = tuple(tuple(inv[k][j] for k in range(r)) for j in range(r))
    cd0 = CurveData(tuple(map(tuple, basis)), tuple(pivots), pinv, (), (), (), ())
    classes = []
    for w in walls(fan):
        c = cd0.coords(w.relation)
        if cd0.embed(c) != w.relation:
            raise ModelError("kernel coordinates do not reproduce a wall relation")
        if c not in classes:
            classes.append(c)
    classes.sort()
    nef = _facets(classes, r)
    qc = tuple(2 * sum(v) for v in basis)
    lam = fm_feasible([(c, 1) for c in classes], r)
    if lam is None:
        raise ModelError("no strictly positive functional on the Mori cone")
    den = math.lcm(*[int(x.denominator) for x in lam])
    lam = tuple(int(x * den) for x in lam)
    cd = CurveData(cd0.kernel_basis, cd0.pivots, pinv, tuple(classes), tuple(nef), qc, lam)
    for c in classes:
        if not cd.member(c) or cd.order(c) < 1:
            raise ModelError(f"wall class {c} fails the Mori cone description")
    return cd


def ray_excess(fan: Fan, cd: CurveData, ref: ReferenceFrame) -> tuple:
    """p_l with z_l = prod_i z_{ref_i}^{a_il} * z^{p_l}, in kernel coordinates."""
    out = []
    for l in range(fan.d):
        v = [0] * fan.d
        v[l] += 1
        for i, ri in enumerate(ref.rays):
            v[ri] -= ref.a[i][l]
        p = cd.coords(v)
        if not cd.member(p):
            raise ModelError(f"ray excess of ray {l + 1} is not effective")
        if 2 * sum(ref.a[i][l] for i in range(fan.n)) + cd.weight(p) != 2:
            raise ModelError(f"weight balance fails for ray {l + 1}")
        out.append(p)
    return tuple(out)
