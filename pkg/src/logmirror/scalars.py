"""Exact scalar tower: rationals, truncated multivariate series, u-Laurent
coefficients, polynomials in formal log variables, and dense exact solving.

A :class:`Series` is a finite sum ``c * u^j * x^e`` with rational ``c``,
integer ``j`` and exponent vector ``e`` over the ring variables (curve-class
coordinates first, then unfolding variables).  Terms whose truncation order
exceeds ``K`` are discarded on construction, so every operation is a ring
homomorphism onto the truncated ring.  A series with only ``j == 0`` terms is
what the rest of the package calls a q-series.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

from .errors import InconsistentSystem, InputError, ModelError

try:  # GMP rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

ZERO = Q(0)
ONE = Q(1)


def qfmt(x) -> str:
    """Render a rational as the canonical ``"num/den"`` string."""
    x = Q(x)
    return f"{int(x.numerator)}/{int(x.denominator)}"


def qparse(s) -> Q:
    if isinstance(s, int) and not isinstance(s, bool):
        return Q(s)
    if not isinstance(s, str):
        raise InputError(f"expected a rational string 'num/den', got {s!r}")
    try:
        num, _, den = s.partition("/")
        return Q(int(num), int(den or 1))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {s!r}") from exc


class SeriesRing:
    """Parameters shared by all series of one computation.

    ``lam`` gives the truncation order of each variable (positive integers),
    ``weights`` the weight degree of each variable; ``u`` always has weight 2.
    """

    def __init__(self, names: Sequence[str], lam: Sequence[int], K: int,
                 weights: Sequence[int] | None = None):
        if len(names) != len(lam):
            raise ValueError("names and lam must have equal length")
        if any(l < 1 for l in lam):
            raise ValueError("truncation orders must be positive")
        self.names = tuple(names)
        self.lam = tuple(int(l) for l in lam)
        self.K = int(K)
        self.weights = tuple(weights) if weights is not None else (0,) * len(names)
        self.nvars = len(names)

    def order(self, exps) -> int:
        return sum(l * e for l, e in zip(self.lam, exps))

    def weight(self, key) -> int:
        return 2 * key[0] + sum(w * e for w, e in zip(self.weights, key[1:]))

    def with_K(self, K: int) -> "SeriesRing":
        return SeriesRing(self.names, self.lam, K, self.weights)

    def __eq__(self, other):
        return (isinstance(other, SeriesRing) and self.names == other.names
                and self.lam == other.lam and self.K == other.K
                and self.weights == other.weights)

    def __hash__(self):
        return hash((self.names, self.lam, self.K, self.weights))

    def __repr__(self):
        return f"SeriesRing({list(self.names)}, lam={list(self.lam)}, K={self.K})"

    # constructors
    def zero(self) -> "Series":
        return Series(self, {})

    def one(self) -> "Series":
        return self.const(1)

    def const(self, c) -> "Series":
        return Series(self, {(0,) + (0,) * self.nvars: Q(c)})

    def var(self, i: int, power: int = 1) -> "Series":
        e = [0] * self.nvars
        e[i] = power
        return Series(self, {(0, *e): ONE})

    def u(self, j: int = 1) -> "Series":
        return Series(self, {(j,) + (0,) * self.nvars: ONE})

    def monomial(self, c, j: int, exps) -> "Series":
        return Series(self, {(j, *exps): Q(c)})


class Series:
    """Truncated series in the ring variables with u-Laurent coefficients."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: dict | None = None):
        self.ring = ring
        K = ring.K
        lam = ring.lam
        clean = {}
        if terms:
            for key, c in terms.items():
                if c and sum(l * e for l, e in zip(lam, key[1:])) <= K:
                    clean[key] = Q(c)
        self.terms = clean

    @classmethod
    def _raw(cls, ring, terms):
        s = cls.__new__(cls)
        s.ring = ring
        s.terms = terms
        return s

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            return other
        return self.ring.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        t = dict(self.terms)
        for k, c in other.terms.items():
            v = t.get(k, ZERO) + c
            if v:
                t[k] = v
            else:
                t.pop(k, None)
        return Series._raw(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return Series._raw(self.ring, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Series):
            c = Q(other)
            if not c:
                return Series._raw(self.ring, {})
            return Series._raw(self.ring, {k: v * c for k, v in self.terms.items()})
        ring = self.ring
        K = ring.K
        order = ring.order
        right = [(k, c, order(k[1:])) for k, c in other.terms.items()]
        out: dict = {}
        for k1, c1 in self.terms.items():
            o1 = order(k1[1:])
            for k2, c2, o2 in right:
                if o1 + o2 > K:
                    continue
                key = tuple(a + b for a, b in zip(k1, k2))
                v = out.get(key, ZERO) + c1 * c2
                if v:
                    out[key] = v
                else:
                    out.pop(key, None)
        return Series._raw(ring, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.inverse()
        return self * (ONE / Q(other))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Series):
            return self.terms == other.terms
        return self.terms == self.ring.const(other).terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # -- u structure ----------------------------------------------------
    def shift_u(self, k: int) -> "Series":
        return Series._raw(self.ring, {(key[0] + k, *key[1:]): c for key, c in self.terms.items()})

    def u_degrees(self) -> list[int]:
        return sorted({k[0] for k in self.terms})

    def u_coeff(self, j: int) -> "Series":
        return Series._raw(self.ring, {(0, *k[1:]): c for k, c in self.terms.items() if k[0] == j})

    def nonneg_part(self) -> "Series":
        return Series._raw(self.ring, {k: c for k, c in self.terms.items() if k[0] >= 0})

    def neg_part(self) -> "Series":
        return Series._raw(self.ring, {k: c for k, c in self.terms.items() if k[0] < 0})

    def u_derivative(self) -> "Series":
        """``u d/du`` applied termwise."""
        return Series._raw(self.ring, {k: c * k[0] for k, c in self.terms.items() if k[0]})

    def at_u(self, value) -> "Series":
        """Substitute a rational for u; requires no negative powers if value is 0."""
        value = Q(value)
        out = self.ring.zero()
        for k, c in self.terms.items():
            if k[0] < 0 and not value:
                raise ZeroDivisionError("negative u power at u = 0")
            out = out + self.ring.monomial(c * value ** k[0], 0, k[1:])
        return out

    # -- q structure ----------------------------------------------------
    def constant(self) -> Q:
        return self.terms.get((0,) + (0,) * self.ring.nvars, ZERO)

    def q_zero(self) -> "Series":
        """Set every ring variable to zero (keeps the u-dependence)."""
        return Series._raw(self.ring, {k: c for k, c in self.terms.items() if not any(k[1:])})

    def restrict(self, zero_vars: Iterable[int]) -> "Series":
        zs = tuple(zero_vars)
        return Series._raw(self.ring, {k: c for k, c in self.terms.items()
                                       if not any(k[1 + i] for i in zs)})

    def log_derivative(self, i: int) -> "Series":
        """``x_i d/dx_i``."""
        return Series._raw(self.ring, {k: c * k[1 + i] for k, c in self.terms.items() if k[1 + i]})

    def derivative(self, i: int) -> "Series":
        out = {}
        for k, c in self.terms.items():
            e = k[1 + i]
            if e:
                nk = list(k)
                nk[1 + i] = e - 1
                out[tuple(nk)] = c * e
        return Series._raw(self.ring, out)

    def truncate(self, K: int) -> "Series":
        return Series(self.ring.with_K(K), self.terms)

    def recast(self, ring: SeriesRing) -> "Series":
        return Series(ring, self.terms)

    def weights(self) -> set[int]:
        w = self.ring.weight
        return {w(k) for k in self.terms}

    def max_order(self) -> int:
        return max((self.ring.order(k[1:]) for k in self.terms), default=-1)

    # -- analytic-type functions on nilpotent/unit q-series -------------
    def inverse(self) -> "Series":
        if any(k[0] for k in self.terms):
            raise ModelError("only u-free series can be inverted")
        c0 = self.constant()
        if not c0:
            raise ModelError("division by a non-unit series")
        x = self * (ONE / c0) - 1  # nilpotent in the truncated ring
        result = self.ring.one()
        power = self.ring.one()
        for _ in range(self.ring.K + 1):
            power = power * (-x)
            if power.is_zero():
                break
            result = result + power
        return result * (ONE / c0)

    def exp(self) -> "Series":
        if self.constant():
            raise ModelError("exp needs a series without constant term")
        result = self.ring.one()
        term = self.ring.one()
        for k in range(1, self.ring.K + 2):
            term = term * self * (ONE / k)
            if term.is_zero():
                break
            result = result + term
        return result

    def log(self) -> "Series":
        if self.constant() != 1 or any(k[0] for k in self.terms):
            raise ModelError("log needs a u-free series with constant term 1")
        x = self - 1
        result = self.ring.zero()
        power = self.ring.one()
        for k in range(1, self.ring.K + 2):
            power = power * x
            if power.is_zero():
                break
            result = result + power * (Q((-1) ** (k + 1)) / k)
        return result

    def sqrt(self) -> "Series":
        """Square root of a unit q-series with constant term 1 (binomial series)."""
        if self.constant() != 1:
            raise ModelError("sqrt needs constant term 1")
        x = self - 1
        result = self.ring.one()
        power = self.ring.one()
        coef = ONE
        for k in range(1, self.ring.K + 2):
            coef = coef * (Q(1, 2) - (k - 1)) / k
            power = power * x
            if power.is_zero():
                break
            result = result + power * coef
        return result

    def compose(self, var: int, value: "Series") -> "Series":
        """Substitute ``value`` for variable ``var`` (value must be nilpotent)."""
        if value.constant():
            raise ModelError("substituted series must have zero constant term")
        out = self.ring.zero()
        cache = {0: self.ring.one()}
        for k, c in self.terms.items():
            e = k[1 + var]
            if e not in cache:
                cache[e] = value ** e
            rest = list(k)
            rest[1 + var] = 0
            out = out + Series._raw(self.ring, {tuple(rest): c}) * cache[e]
        return out

    # -- presentation ---------------------------------------------------
    def coefficients(self, var: int = 0) -> list:
        """Coefficient list of a u-free series in a single variable."""
        n = max((k[1 + var] for k in self.terms), default=-1)
        out = [ZERO] * (n + 1)
        for k, c in self.terms.items():
            if k[0] or any(k[1 + i] for i in range(self.ring.nvars) if i != var):
                raise ValueError("series is not univariate in the requested variable")
            out[k[1 + var]] = c
        return out

    def to_json(self) -> list:
        return [[k[0], list(k[1:]), qfmt(c)] for k, c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, ring: SeriesRing, data) -> "Series":
        terms = {}
        for j, exps, c in data:
            if len(exps) != ring.nvars:
                raise InputError("exponent vector length does not match the ring")
            terms[(int(j), *map(int, exps))] = qparse(c)
        return cls(ring, terms)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kc: (self.ring.order(kc[0][1:]), kc[0])):
            factors = []
            for name, e in zip(self.ring.names, k[1:]):
                if e:
                    factors.append(name if e == 1 else f"{name}^{e}")
            if k[0]:
                factors.append("u" if k[0] == 1 else f"u^{k[0]}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Series({self.render()})"


# -- one-variable helpers --------------------------------------------------

def univariate_ring(K: int, name: str = "x") -> SeriesRing:
    return SeriesRing([name], [1], K)


def from_coefficients(ring: SeriesRing, coeffs: Sequence, var: int = 0) -> Series:
    terms = {}
    for i, c in enumerate(coeffs):
        e = [0] * ring.nvars
        e[var] = i
        terms[(0, *e)] = Q(c)
    return Series(ring, terms)


def reversion(s: Series, var: int = 0) -> Series:
    """Compositional inverse of ``s = x + O(x^2)`` in variable ``var``.

    Newton-free fixed point: ``g <- g - (s(g) - x)`` gains one order per step.
    """
    ring = s.ring
    if any(k[0] for k in s.terms) or any(
            k[1 + i] for k in s.terms for i in range(ring.nvars) if i != var):
        raise ModelError("reversion needs a u-free univariate series")
    x = ring.var(var)
    lin = s.terms.get((0, *[1 if i == var else 0 for i in range(ring.nvars)]), ZERO)
    if s.constant() or lin != 1:
        raise ModelError("reversion needs s = x + O(x^2)")
    g = x
    for _ in range(ring.K + 1):
        nxt = g - (s.compose(var, g) - x)
        if nxt == g:
            break
        g = nxt
    return g


# -- formal log variables --------------------------------------------------

class LogPoly:
    """Polynomial in symbols l_1..l_r (l_a standing for log q_a) with Series
    coefficients."""

    __slots__ = ("nlogs", "terms", "ring")

    def __init__(self, ring: SeriesRing, nlogs: int, terms: dict | None = None):
        self.ring = ring
        self.nlogs = nlogs
        self.terms = {k: v for k, v in (terms or {}).items() if not v.is_zero()}

    def __add__(self, other: "LogPoly") -> "LogPoly":
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t[k] + v if k in t else v
        return LogPoly(self.ring, self.nlogs, t)

    def scale(self, s: Series) -> "LogPoly":
        return LogPoly(self.ring, self.nlogs, {k: v * s for k, v in self.terms.items()})

    def coeff(self, exps) -> Series:
        return self.terms.get(tuple(exps), self.ring.zero())

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=-1)

    def __eq__(self, other):
        return isinstance(other, LogPoly) and self.terms == other.terms

    def to_json(self) -> list:
        return [[list(k), v.to_json()] for k, v in sorted(self.terms.items())]

    def render(self, names: Sequence[str] | None = None) -> str:
        names = names or [f"l{a + 1}" for a in range(self.nlogs)]
        parts = []
        for k, v in sorted(self.terms.items()):
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(names, k) if e)
            parts.append(f"({v.render()})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts) or "0"


# -- dense rational linear algebra ----------------------------------------

def solve_linear(A: Sequence[Sequence], b: Sequence, stratum=None) -> list:
    """Exact solution of ``A x = b`` over the rationals.

    ``A`` may be overdetermined; the system must be consistent and have a
    unique solution.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [[Q(v) for v in A[i]] + [Q(b[i])] for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = ONE / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(rows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [vi - f * vr for vi, vr in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if M[i][cols]:
            raise InconsistentSystem("linear system is inconsistent", stratum)
    if len(pivots) < cols:
        raise InconsistentSystem("linear system is underdetermined", stratum)
    return [M[i][cols] for i in range(cols)]


def mat_inverse(A: Sequence[Sequence]) -> list:
    n = len(A)
    cols = [solve_linear(A, [1 if i == j else 0 for i in range(n)]) for j in range(n)]
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def determinant(A: Sequence[Sequence]) -> Q:
    n = len(A)
    M = [[Q(v) for v in row] for row in A]
    det = ONE
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c]), None)
        if p is None:
            return ZERO
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] / M[c][c]
                M[i] = [vi - f * vc for vi, vc in zip(M[i], M[c])]
    return det


def rat_matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), ZERO) for j in range(len(B[0]))]
            for i in range(len(A))]


def identity(n: int) -> list:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def is_nilpotent(N) -> bool:
    n = len(N)
    P = identity(n)
    for _ in range(n):
        P = rat_matmul(P, N)
    return all(not v for row in P for v in row)


# -- matrices of series ----------------------------------------------------

def smat_zero(ring: SeriesRing, n: int) -> list:
    return [[ring.zero() for _ in range(n)] for _ in range(n)]


def smat_identity(ring: SeriesRing, n: int) -> list:
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def smat_mul(A, B) -> list:
    n, m, p = len(A), len(B), len(B[0])
    ring = A[0][0].ring
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = ring.zero()
            for k in range(m):
                if A[i][k].terms and B[k][j].terms:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


def smat_add(A, B) -> list:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def smat_sub(A, B) -> list:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def smat_map(f, A) -> list:
    return [[f(a) for a in row] for row in A]


def smat_is_zero(A) -> bool:
    return all(a.is_zero() for row in A for a in row)


def smat_from_rational(ring: SeriesRing, A) -> list:
    return [[ring.const(v) for v in row] for row in A]


def smat_to_json(A) -> list:
    return [[a.to_json() for a in row] for row in A]


def binomial_series(ring: SeriesRing, exponent, x: Series) -> Series:
    """(1 + x)^exponent for nilpotent x and rational exponent."""
    exponent = Q(exponent)
    result = ring.one()
    power = ring.one()
    coef = ONE
    for k in range(1, ring.K + 2):
        coef = coef * (exponent - (k - 1)) / k
        power = power * x
        if power.is_zero():
            break
        result = result + power * coef
    return result


def factorial(k: int) -> Q:
    return Q(math.factorial(k))


def exponent_vectors(nvars: int, bound: int) -> list[tuple]:
    """All nonnegative integer vectors with entry sum <= bound."""
    return [e for e in product(range(bound + 1), repeat=nvars) if sum(e) <= bound]
