"""Combinatorics of a smooth complete fan: validation, walls, primitive
collections, the Fulton ordering of maximal cones and the good basis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .errors import InputError, ModelError, ValidationFailure
from .scalars import Q, determinant, mat_inverse


def _int_det(rows) -> int:
    return int(determinant(rows))


def _normal(face_vectors: Sequence[Sequence[int]], n: int) -> list[int]:
    """Integer normal of the hyperplane spanned by n-1 vectors (cofactors)."""
    out = []
    for k in range(n):
        minor = [[v[c] for c in range(n) if c != k] for v in face_vectors]
        out.append((-1) ** k * (_int_det(minor) if minor else 1))
    return out


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


@dataclass(frozen=True)
class Fan:
    """Rays are stored 0-based internally; JSON input is 1-based."""

    rays: tuple
    max_cones: tuple

    @property
    def n(self) -> int:
        return len(self.rays[0])

    @property
    def d(self) -> int:
        return len(self.rays)

    @classmethod
    def from_lists(cls, rays, max_cones, one_based: bool = True) -> "Fan":
        if not isinstance(rays, list) or not rays:
            raise InputError("rays must be a nonempty list")
        try:
            rr = tuple(tuple(int(x) for x in r) for r in rays)
        except (TypeError, ValueError) as exc:
            raise InputError("rays must be integer vectors") from exc
        for r, raw in zip(rr, rays):
            if any(isinstance(x, bool) or (isinstance(x, float) and not x.is_integer())
                   for x in raw):
                raise InputError(f"ray {raw} is not an integer vector")
        n = len(rr[0])
        if n < 1 or any(len(r) != n for r in rr):
            raise InputError("rays must all have the same positive dimension")
        if any(not any(r) for r in rr):
            raise InputError("zero ray")
        if len(set(rr)) != len(rr):
            raise InputError("duplicate rays")
        if not isinstance(max_cones, list) or not max_cones:
            raise InputError("max_cones must be a nonempty list")
        off = 1 if one_based else 0
        cones = []
        for c in max_cones:
            try:
                idx = tuple(sorted(int(i) - off for i in c))
            except (TypeError, ValueError) as exc:
                raise InputError(f"bad cone {c!r}") from exc
            if len(idx) != n or len(set(idx)) != n:
                raise InputError(f"cone {c} must list {n} distinct rays")
            if any(i < 0 or i >= len(rr) for i in idx):
                raise InputError(f"cone {c} references a missing ray")
            cones.append(idx)
        if len(set(cones)) != len(cones):
            raise InputError("duplicate maximal cones")
        used = {i for c in cones for i in c}
        if len(used) != len(rr):
            missing = min(set(range(len(rr))) - used)
            raise InputError(f"ray {missing + off} lies in no maximal cone")
        return cls(rr, tuple(cones))

    def cone_matrix(self, cone) -> list:
        return [list(self.rays[i]) for i in cone]

    def faces(self) -> set:
        out = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                out.update(combinations(c, k))
        return out

    def cones_containing(self, rays) -> list[int]:
        s = set(rays)
        return [k for k, c in enumerate(self.max_cones) if s <= set(c)]

    def cone_coordinates(self, k: int, v) -> list:
        """Coordinates of v in the basis of rays of maximal cone k."""
        inv = _cone_inverse(self, k)
        return [sum((inv[i][j] * v[j] for j in range(self.n)), Q(0)) for i in range(self.n)]

    def contains(self, k: int, v) -> bool:
        return all(c >= 0 for c in self.cone_coordinates(k, v))


_INV_CACHE: dict = {}


def _cone_inverse(fan: Fan, k: int):
    key = (fan, k)
    if key not in _INV_CACHE:
        # columns are the rays: M e_i = rho_i
        M = [[fan.rays[i][r] for i in fan.max_cones[k]] for r in range(fan.n)]
        _INV_CACHE[key] = mat_inverse(M)
    return _INV_CACHE[key]


# -- validation ------------------------------------------------------------

@dataclass
class ValidationReport:
    smooth: bool
    complete: bool
    projective: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.smooth and self.complete and self.projective

    def to_json(self) -> dict:
        return {"smooth": self.smooth, "complete": self.complete,
                "projective": self.projective, "witnesses": self.witnesses}


def _check_smooth(fan: Fan):
    for r in fan.rays:
        if math.gcd(*r) != 1:
            return False, {"non_primitive_ray": list(r)}
    for c in fan.max_cones:
        det = _int_det(fan.cone_matrix(c))
        if abs(det) != 1:
            return False, {"cone": [i + 1 for i in c], "determinant": det}
    return True, None


def _uncovered_direction(fan: Fan, face, opp) -> list | None:
    base = [sum(fan.rays[i][c] for i in face) for c in range(fan.n)]
    for k in (1, 2, 4, 8, 16, 64):
        v = [k * b - o for b, o in zip(base, fan.rays[opp])]
        if not any(fan.contains(j, v) for j in range(len(fan.max_cones))):
            return v
    return None


def _check_complete(fan: Fan):
    n = fan.n
    for k, c in enumerate(fan.max_cones):
        for opp in c:
            face = tuple(i for i in c if i != opp)
            holders = fan.cones_containing(face)
            if len(holders) != 2:
                w = {"face": [i + 1 for i in face], "cones": len(holders)}
                if len(holders) == 1:
                    v = _uncovered_direction(fan, face, opp)
                    if v is not None:
                        w["uncovered_direction"] = v
                return False, w
            other = holders[0] if holders[1] == k else holders[1]
            opp2 = next(i for i in fan.max_cones[other] if i not in face)
            nrm = _normal([fan.rays[i] for i in face], n)
            if _dot(nrm, fan.rays[opp]) * _dot(nrm, fan.rays[opp2]) >= 0:
                return False, {"face": [i + 1 for i in face], "same_side": True}
    # degree one: an interior point of the first cone lies in no other cone
    c0 = fan.max_cones[0]
    p = [sum((j + 2) * fan.rays[i][r] for j, i in enumerate(c0)) for r in range(n)]
    cover = [k for k in range(len(fan.max_cones)) if fan.contains(k, p)]
    if cover != [0]:
        return False, {"overlap_point": p, "cones": [[i + 1 for i in fan.max_cones[k]] for k in cover]}
    return True, None


# -- Fourier-Motzkin -------------------------------------------------------

def fm_feasible(ineqs: Sequence[tuple[Sequence, object]], nvars: int):
    """Solve {a . x >= b} exactly by Fourier-Motzkin elimination.

    Returns a rational solution or None if infeasible.
    """
    system = [([Q(v) for v in a], Q(b)) for a, b in ineqs]
    levels = []
    for var in reversed(range(nvars)):
        levels.append(system)
        pos, neg, zero = [], [], []
        for a, b in system:
            (pos if a[var] > 0 else neg if a[var] < 0 else zero).append((a, b))
        new = list(zero)
        seen = set()
        for ap, bp in pos:
            for an, bn in neg:
                fp, fn = -an[var], ap[var]
                a = [fp * x + fn * y for x, y in zip(ap, an)]
                b = fp * bp + fn * bn
                g = max(abs(v) for v in a) if any(a) else Q(1)
                key = (tuple(v / g for v in a), b / g)
                if key not in seen:
                    seen.add(key)
                    new.append((a, b))
        system = new
    if any(b > 0 for a, b in system):  # all coefficients zero at this point
        return None
    x = [Q(0)] * nvars
    for var, sysv in zip(range(nvars), reversed(levels)):
        lo, hi = None, None
        for a, b in sysv:
            rest = sum((a[j] * x[j] for j in range(var)), Q(0))
            if a[var] > 0:
                v = (b - rest) / a[var]
                lo = v if lo is None or v > lo else lo
            elif a[var] < 0:
                v = (b - rest) / a[var]
                hi = v if hi is None or v < hi else hi
        if lo is None:
            val = Q(0) if hi is None or hi >= 0 else Q(math.floor(hi))
        else:
            val = Q(math.ceil(lo))
            if hi is not None and val > hi:
                val = lo
        x[var] = val
    return x


# -- walls and primitive collections ---------------------------------------

@dataclass(frozen=True)
class Wall:
    cones: tuple  # indices into fan.max_cones
    rays: tuple   # the n-1 shared rays
    opposite: tuple
    relation: tuple  # integer vector in Z^d


def walls(fan: Fan) -> list[Wall]:
    out = []
    cones = fan.max_cones
    for i, j in combinations(range(len(cones)), 2):
        shared = tuple(sorted(set(cones[i]) & set(cones[j])))
        if len(shared) != fan.n - 1:
            continue
        a = next(x for x in cones[i] if x not in shared)
        b = next(x for x in cones[j] if x not in shared)
        coords = fan.cone_coordinates(i, fan.rays[b])
        pos = cones[i].index(a)
        if coords[pos] != -1:
            raise ModelError(f"wall between cones {i + 1} and {j + 1} is not a smooth flop")
        rel = [0] * fan.d
        rel[a] = 1
        rel[b] = 1
        for s, c in zip(cones[i], coords):
            if s != a:
                rel[s] = -int(c)
        out.append(Wall((i, j), shared, (a, b), tuple(rel)))
    return out


def primitive_collections(fan: Fan) -> list[tuple]:
    faces = fan.faces()
    out = []
    for k in range(2, fan.n + 2):
        for s in combinations(range(fan.d), k):
            if s not in faces and all(t in faces for t in combinations(s, k - 1)):
                out.append(s)
    return out


# -- Fulton order ----------------------------------------------------------

@dataclass(frozen=True)
class FultonOrder:
    cone_order: tuple      # indices into fan.max_cones
    taus: tuple            # tau_i as sorted ray-index tuples
    basis: tuple           # same as taus; phi_i = prod_{l in tau_i} z_l

    @property
    def mu(self) -> int:
        return len(self.cone_order)

    def weights(self) -> list[int]:
        return [2 * len(t) for t in self.taus]


def betti_numbers(fan: Fan) -> list[int]:
    """Even Betti numbers from the h-vector of the fan."""
    n = fan.n
    faces = fan.faces()
    f = [sum(1 for s in faces if len(s) == k) for k in range(n + 1)]
    h = [0] * (n + 1)
    for k in range(n + 1):
        for i in range(n - k + 1):
            h[k + i] += f[k] * math.comb(n - k, i) * (-1) ** i
    return h


def _wall_neighbours(fan: Fan):
    nb = {k: {} for k in range(len(fan.max_cones))}
    for w in walls(fan):
        i, j = w.cones
        nb[i][j] = w.opposite[0]
        nb[j][i] = w.opposite[1]
    return nb


def _tau(fan, k, nb, unplaced):
    drop = {nb[k][j] for j in nb[k] if j in unplaced}
    return tuple(i for i in fan.max_cones[k] if i not in drop)


def check_tau_condition(fan: Fan, order: Sequence[int], taus) -> bool:
    pos = {k: p for p, k in enumerate(order)}
    for i, t in enumerate(taus):
        for j in fan.cones_containing(t):
            if pos[j] < i:
                return False
    return True


def fulton_order(fan: Fan, first: int | None = None) -> FultonOrder:
    """Order the maximal cones so that tau_i in sigma_j implies i <= j.

    tau_i is sigma_i intersected with all later wall-neighbours.  A depth
    first search over cones (input order) places a cone only if no already
    placed cone contains its tau; the result is then verified in full.
    """
    nb = _wall_neighbours(fan)
    m = len(fan.max_cones)
    starts = [first] if first is not None else list(range(m))
    for s in starts:
        order: list[int] = []
        taus: list[tuple] = []

        def dfs() -> bool:
            if len(order) == m:
                return True
            unplaced = set(range(m)) - set(order)
            cands = [s] if not order else sorted(unplaced)
            for k in cands:
                rest = unplaced - {k}
                t = _tau(fan, k, nb, rest)
                if any(j in order for j in fan.cones_containing(t)):
                    continue
                order.append(k)
                taus.append(t)
                if dfs():
                    return True
                order.pop()
                taus.pop()
            return False

        if dfs():
            if not check_tau_condition(fan, order, taus):
                raise ModelError("Fulton order failed verification")
            fo = FultonOrder(tuple(order), tuple(taus), tuple(taus))
            hist = [0] * (fan.n + 1)
            for t in taus:
                hist[len(t)] += 1
            if hist != betti_numbers(fan):
                raise ModelError("good basis weight histogram differs from Betti numbers")
            return fo
    raise ModelError("no Fulton order found")


# -- reference frame -------------------------------------------------------

@dataclass(frozen=True)
class ReferenceFrame:
    ref_cone: int          # index into fan.max_cones
    rays: tuple            # the reference cone's rays, in order
    a: tuple               # n x d integer matrix: rho_l = sum_i a[i][l] rho_{rays[i]}
    inv: tuple             # inverse of the reference cone's ray matrix

    def coords(self, v) -> tuple:
        """Coordinates of a lattice vector in the reference basis."""
        return tuple(sum(self.inv[i][j] * v[j] for j in range(len(v))) for i in range(len(v)))


def reference_frame(fan: Fan, ref_cone: int) -> ReferenceFrame:
    cone = fan.max_cones[ref_cone]
    M = [[fan.rays[i][r] for i in cone] for r in range(fan.n)]
    inv = mat_inverse(M)
    a = []
    for i in range(fan.n):
        row = []
        for l in range(fan.d):
            v = sum((inv[i][j] * fan.rays[l][j] for j in range(fan.n)), Q(0))
            if v.denominator != 1:
                raise ModelError("reference cone is not unimodular")
            row.append(int(v))
        a.append(tuple(row))
    inv_int = tuple(tuple(int(x) for x in row) for row in inv)
    return ReferenceFrame(ref_cone, cone, tuple(a), inv_int)


def validate(fan: Fan) -> ValidationReport:
    smooth, ws = _check_smooth(fan)
    witnesses = {}
    if not smooth:
        witnesses["smooth"] = ws
        witnesses["complete"] = {"skipped": "fan is not smooth"}
        return ValidationReport(False, False, False, witnesses)
    complete, wc = _check_complete(fan)
    if not complete:
        witnesses["complete"] = wc
        witnesses["projective"] = {"skipped": "fan is not complete"}
        return ValidationReport(True, False, False, witnesses)
    rels = [w.relation for w in walls(fan)]
    x = fm_feasible([(r, 1) for r in rels], fan.d)
    if x is None:
        witnesses["projective"] = {"infeasible": "no strictly convex support function",
                                   "walls": [list(r) for r in rels]}
        return ValidationReport(True, True, False, witnesses)
    return ValidationReport(True, True, True, witnesses)


def require_valid(fan: Fan) -> ValidationReport:
    rep = validate(fan)
    if not rep.ok:
        bad = [k for k in ("smooth", "complete", "projective") if not getattr(rep, k)]
        raise ValidationFailure(f"fan is not {', '.join(bad)}", rep)
    return rep
