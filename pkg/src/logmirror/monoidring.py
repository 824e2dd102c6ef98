"""Canonical monomials of the monoid P_phi and their arithmetic.

A monomial is stored as ``(m, beta)``: the lattice point ``m`` of N and the
excess curve class ``beta`` (kernel coordinates) of the monomial over the
convex PL function evaluated at ``m``.  An *atom* additionally carries a
u-power and the exponents of the unfolding variables:
``(j, m, beta, e)``.  A :class:`HodgeElement` is a finite rational
combination of atoms.
"""

from __future__ import annotations

import re
from typing import Iterable, Sequence

from .errors import InputError, ModelError
from .fan import Fan, FultonOrder, ReferenceFrame
from .moricone import CurveData
from .scalars import ONE, Q, ZERO, SeriesRing, qfmt, qparse


class MonoidRing:
    def __init__(self, fan: Fan, cd: CurveData, ref: ReferenceFrame, fo: FultonOrder,
                 include_t: bool = False):
        self.fan = fan
        self.cd = cd
        self.ref = ref
        self.fo = fo
        self.n = fan.n
        self.r = cd.r
        self.basis_m = tuple(self.point_of(tau) for tau in fo.taus)
        self.basis_w = tuple(2 * len(t) for t in fo.taus)
        self.t_dirs = tuple(j for j, w in enumerate(self.basis_w) if w != 2) if include_t else ()
        self.s = len(self.t_dirs)
        self.t_weights = tuple(2 - self.basis_w[j] for j in self.t_dirs)
        self._alpha: dict = {}
        names = [f"q{a + 1}" for a in range(self.r)] + [f"t{j + 1}" for j in self.t_dirs]
        self.names = names
        self.zero_e = (0,) * self.s
        self.zero_beta = (0,) * self.r
        self.zero_m = (0,) * self.n

    def ring(self, K: int) -> SeriesRing:
        return SeriesRing(self.names, list(self.cd.lam) + [1] * self.s, K,
                          list(self.cd.qc) + list(self.t_weights))

    # -- lattice bookkeeping ------------------------------------------------
    def point_of(self, exps_or_rays) -> tuple:
        """Lattice point of a ray multiset given as a tuple of ray indices."""
        m = [0] * self.n
        for l in exps_or_rays:
            for c in range(self.n):
                m[c] += self.fan.rays[l][c]
        return tuple(m)

    def vector_point(self, alpha: Sequence[int]) -> tuple:
        return tuple(sum(a * self.fan.rays[l][c] for l, a in enumerate(alpha) if a)
                     for c in range(self.n))

    def alpha(self, m: tuple) -> tuple:
        """Nonnegative ray exponents of m on a maximal cone containing it."""
        got = self._alpha.get(m)
        if got is None:
            for k, cone in enumerate(self.fan.max_cones):
                co = self.fan.cone_coordinates(k, m)
                if all(c >= 0 for c in co):
                    v = [0] * self.fan.d
                    for ray, c in zip(cone, co):
                        v[ray] = int(c)
                    got = tuple(v)
                    break
            else:
                raise ModelError(f"{m} lies in no cone; the fan is not complete")
            self._alpha[m] = got
        return got

    def ref_alpha(self, m: tuple) -> tuple:
        """Exponents of m on the reference cone (may be negative)."""
        c = self.ref.coords(m)
        v = [0] * self.fan.d
        for ray, x in zip(self.ref.rays, c):
            v[ray] = int(x)
        return tuple(v)

    def ref_excess(self, m: tuple, beta: tuple) -> tuple:
        """Excess of (m, beta) over the reference cone's linear extension of phi."""
        diff = [a - b for a, b in zip(self.alpha(m), self.ref_alpha(m))]
        k = self.cd.coords(diff)
        return tuple(x + y for x, y in zip(beta, k))

    def ref_coords(self, m: tuple) -> tuple:
        return tuple(int(x) for x in self.ref.coords(m))

    # -- monomials --------------------------------------------------------
    def canonicalize(self, z_exps: Sequence[int], beta: Sequence[int] | None = None):
        """(m, excess) for z^alpha * q^beta, or None if the excess leaves P."""
        m = self.vector_point(z_exps)
        a = self.alpha(m)
        k = self.cd.coords([x - y for x, y in zip(z_exps, a)])
        if beta is not None:
            k = tuple(x + y for x, y in zip(k, beta))
        if not self.cd.member(k):
            return None
        return (m, k)

    def mono_mul(self, x: tuple, y: tuple) -> tuple:
        (m1, b1), (m2, b2) = x, y
        m = tuple(a + b for a, b in zip(m1, m2))
        a1, a2, a = self.alpha(m1), self.alpha(m2), self.alpha(m)
        k = self.cd.coords([p + q - s for p, q, s in zip(a1, a2, a)])
        return (m, tuple(p + q + s for p, q, s in zip(b1, b2, k)))

    def ray_mono(self, l: int) -> tuple:
        e = [0] * self.fan.d
        e[l] = 1
        return self.canonicalize(e)

    def basis_mono(self, i: int) -> tuple:
        return (self.basis_m[i], self.zero_beta)

    def mono_weight(self, x: tuple) -> int:
        m, b = x
        return 2 * sum(self.alpha(m)) + self.cd.weight(b)

    def vanishes_at_q0(self, x: tuple) -> bool:
        return any(x[1])

    # -- atoms: (j, m, beta, e) -------------------------------------------
    def atom_mul(self, x: tuple, y: tuple) -> tuple:
        m, b = self.mono_mul((x[1], x[2]), (y[1], y[2]))
        return (x[0] + y[0], m, b, tuple(p + q for p, q in zip(x[3], y[3])))

    def atom_weight(self, x: tuple) -> int:
        j, m, b, e = x
        return (2 * j + 2 * sum(self.alpha(m)) + self.cd.weight(b)
                + sum(w * k for w, k in zip(self.t_weights, e)))

    def atom_order(self, x: tuple) -> int:
        return self.cd.order(x[2]) + sum(x[3])

    def atom(self, mono: tuple, j: int = 0, e: tuple | None = None) -> tuple:
        return (j, mono[0], mono[1], self.zero_e if e is None else tuple(e))

    # -- text form ----------------------------------------------------------
    def render_atom(self, x: tuple) -> str:
        j, m, b, e = x
        parts = []
        for l, a in enumerate(self.alpha(m)):
            if a:
                parts.append(f"z{l + 1}" if a == 1 else f"z{l + 1}^{a}")
        if any(b):
            parts.append("q(" + ",".join(map(str, b)) + ")")
        for jj, k in zip(self.t_dirs, e):
            if k:
                parts.append(f"t{jj + 1}" if k == 1 else f"t{jj + 1}^{k}")
        if j:
            parts.append("u" if j == 1 else f"u^{j}")
        return "*".join(parts) or "1"

    _TOKEN = re.compile(r"^(z|t)(\d+)(?:\^(-?\d+))?$|^q\((-?\d+(?:,-?\d+)*)\)$|^u(?:\^(-?\d+))?$|^1$")

    def parse_atom(self, text: str) -> tuple | None:
        z = [0] * self.fan.d
        beta = [0] * self.r
        e = [0] * self.s
        j = 0
        for tok in text.strip().split("*"):
            mt = self._TOKEN.match(tok.strip())
            if not mt:
                raise InputError(f"bad monomial token {tok!r}")
            kind, idx, pw, qs, upw = mt.groups()
            if kind == "z":
                l = int(idx) - 1
                if not 0 <= l < self.fan.d:
                    raise InputError(f"no ray {idx}")
                k = int(pw or 1)
                if k < 0:
                    raise InputError("negative z exponent")
                z[l] += k
            elif kind == "t":
                jj = int(idx) - 1
                if jj not in self.t_dirs:
                    raise InputError(f"no unfolding variable t{idx}")
                e[self.t_dirs.index(jj)] += int(pw or 1)
            elif qs is not None:
                vals = [int(v) for v in qs.split(",")]
                if len(vals) != self.r:
                    raise InputError("curve class has the wrong rank")
                beta = [a + b for a, b in zip(beta, vals)]
            elif tok.strip().startswith("u"):
                j += int(upw or 1)
        mono = self.canonicalize(z, beta)
        if mono is None:
            return None
        return (j, mono[0], mono[1], tuple(e))


class HodgeElement:
    """Finite rational combination of atoms over a fixed monoid ring."""

    __slots__ = ("mr", "terms")

    def __init__(self, mr: MonoidRing, terms: dict | None = None):
        self.mr = mr
        self.terms = {k: Q(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def of(cls, mr: MonoidRing, mono: tuple, c=1, j: int = 0, e=None) -> "HodgeElement":
        return cls(mr, {mr.atom(mono, j, e): Q(c)})

    def __add__(self, other: "HodgeElement") -> "HodgeElement":
        t = dict(self.terms)
        for k, v in other.terms.items():
            x = t.get(k, ZERO) + v
            if x:
                t[k] = x
            else:
                t.pop(k, None)
        return HodgeElement(self.mr, t)

    def __neg__(self):
        return HodgeElement(self.mr, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "HodgeElement":
        return HodgeElement(self.mr, {k: v * Q(c) for k, v in self.terms.items()})

    def __mul__(self, other: "HodgeElement") -> "HodgeElement":
        out: dict = {}
        mul = self.mr.atom_mul
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = mul(k1, k2)
                x = out.get(k, ZERO) + v1 * v2
                if x:
                    out[k] = x
                else:
                    out.pop(k, None)
        return HodgeElement(self.mr, out)

    def __eq__(self, other):
        return isinstance(other, HodgeElement) and self.terms == other.terms

    def weight(self):
        """Common weight, or the string "inhomogeneous"."""
        ws = {self.mr.atom_weight(k) for k in self.terms}
        if len(ws) > 1:
            return "inhomogeneous"
        return ws.pop() if ws else None

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms):
            c = self.terms[k]
            mono = self.mr.render_atom(k)
            if c == 1:
                parts.append(mono)
            elif mono == "1":
                parts.append(qfmt(c))
            else:
                parts.append(f"{qfmt(c)}*{mono}")
        return " + ".join(parts)

    @classmethod
    def parse(cls, mr: MonoidRing, text: str) -> "HodgeElement":
        out = cls(mr)
        if text.strip() == "0":
            return out
        for term in text.split(" + "):
            head, _, rest = term.partition("*")
            if "/" in head and re.fullmatch(r"-?\d+/\d+", head):
                c, mono = qparse(head), (rest or "1")
            else:
                c, mono = ONE, term
            a = mr.parse_atom(mono)
            if a is not None:
                out = out + HodgeElement(mr, {a: c})
        return out


def z_monomial(mr: MonoidRing, exps: Sequence[int]) -> tuple:
    mono = mr.canonicalize(exps)
    if mono is None:  # nonnegative exponents always land in P_phi
        raise ModelError("convexity violated while canonicalizing")
    return mono


def basis_labels(mr: MonoidRing) -> list[str]:
    return [mr.render_atom(mr.atom(mr.basis_mono(i))) for i in range(len(mr.basis_m))]


def element_from_rays(mr: MonoidRing, rays: Iterable[int]) -> HodgeElement:
    e = [0] * mr.fan.d
    for l in rays:
        e[l] += 1
    return HodgeElement.of(mr, z_monomial(mr, e))
