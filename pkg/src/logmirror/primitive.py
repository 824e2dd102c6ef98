"""Flat frame, Birkhoff factorization, primitive form, flat unit and period
map, all in the curve-class directions with the unfolding variables at 0."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import ModelError
from .gaussmanin import Connection
from .scalars import (ONE, ZERO, LogPoly, Q, Series, SeriesRing, binomial_series, qfmt, qparse,
                      reversion, smat_add, smat_is_zero, smat_map, smat_mul, smat_sub,
                      univariate_ring)

# -- u-Laurent rational matrices ------------------------------------------


class ULMat:
    """Finite sum of u^j * X_j with X_j dense rational mu x mu matrices."""

    __slots__ = ("mu", "parts")

    def __init__(self, mu: int, parts: dict | None = None):
        self.mu = mu
        self.parts = {j: X for j, X in (parts or {}).items() if any(v for row in X for v in row)}

    @classmethod
    def identity(cls, mu):
        return cls(mu, {0: [[ONE if i == k else ZERO for k in range(mu)] for i in range(mu)]})

    @classmethod
    def constant(cls, X):
        return cls(len(X), {0: [list(r) for r in X]})

    def __add__(self, other):
        parts = {j: [list(r) for r in X] for j, X in self.parts.items()}
        for j, Y in other.parts.items():
            if j in parts:
                parts[j] = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(parts[j], Y)]
            else:
                parts[j] = [list(r) for r in Y]
        return ULMat(self.mu, parts)

    def __neg__(self):
        return ULMat(self.mu, {j: [[-v for v in r] for r in X] for j, X in self.parts.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        mu = self.mu
        parts: dict = {}
        for j, X in self.parts.items():
            for k, Y in other.parts.items():
                P = [[sum((X[i][l] * Y[l][c] for l in range(mu) if X[i][l]), ZERO)
                      for c in range(mu)] for i in range(mu)]
                if j + k in parts:
                    Z = parts[j + k]
                    parts[j + k] = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(Z, P)]
                else:
                    parts[j + k] = P
        return ULMat(mu, parts)

    def scale(self, c):
        c = Q(c)
        return ULMat(self.mu, {j: [[v * c for v in r] for r in X] for j, X in self.parts.items()})

    def shift(self, k: int):
        return ULMat(self.mu, {j + k: X for j, X in self.parts.items()})

    def neg_part(self):
        return ULMat(self.mu, {j: X for j, X in self.parts.items() if j < 0})

    def nonneg_part(self):
        return ULMat(self.mu, {j: X for j, X in self.parts.items() if j >= 0})

    def is_zero(self) -> bool:
        return not self.parts

    def __eq__(self, other):
        return isinstance(other, ULMat) and self.parts == other.parts


def _split_by_class(M, r: int) -> dict:
    """Series matrix (q-only keys) -> {beta: ULMat}."""
    mu = len(M)
    out: dict = {}
    for i, row in enumerate(M):
        for k, s in enumerate(row):
            for key, c in s.terms.items():
                if any(key[1 + r:]):
                    continue
                beta = tuple(key[1:1 + r])
                parts = out.setdefault(beta, {})
                X = parts.setdefault(key[0], [[ZERO] * mu for _ in range(mu)])
                X[i][k] += c
    return {b: ULMat(mu, p) for b, p in out.items()}


def _join_by_class(ring: SeriesRing, by_class: dict, mu: int) -> list:
    terms = [[{} for _ in range(mu)] for _ in range(mu)]
    for beta, X in by_class.items():
        for j, mat in X.parts.items():
            for i in range(mu):
                for k in range(mu):
                    if mat[i][k]:
                        terms[i][k][(j, *beta)] = mat[i][k]
    return [[Series(ring, terms[i][k]) for k in range(mu)] for i in range(mu)]


def q_ring(conn: Connection) -> SeriesRing:
    mr = conn.table.mr
    return SeriesRing([f"q{a + 1}" for a in range(mr.r)], mr.cd.lam, conn.table.K, mr.cd.qc)


def small(conn: Connection, M) -> list:
    """Restrict a matrix to t = 0 and recast it over the q-only ring."""
    ring = q_ring(conn)
    r = conn.r
    return [[Series(ring, {k[:1 + r]: c for k, c in s.terms.items() if not any(k[1 + r:])})
             for s in row] for row in M]


# -- Deligne extension -------------------------------------------------------

@dataclass
class FlatFrame:
    ring: SeriesRing
    A: list                     # mu x mu Series matrix
    by_class: dict = field(repr=False)
    classes: list = field(repr=False)


def _ad(N: ULMat, X: ULMat) -> ULMat:
    return N * X - X * N


def deligne_extend(conn: Connection) -> FlatFrame:
    """Solve u d_a A + Mhat_a A = A N_a order by order in the curve classes."""
    mr = conn.table.mr
    mu = conn.table.mu
    r = mr.r
    K = conn.table.K
    ring = q_ring(conn)
    Ms = [_split_by_class(small(conn, conn.mats[a]), r) for a in range(r)]
    Ns = [ULMat.constant(N) for N in conn.residues]
    zero = tuple([0] * r)
    for a in range(r):
        if Ms[a].get(zero, ULMat(mu)) != Ns[a]:
            raise ModelError("connection at the origin differs from its residue")
    classes = [b for b in mr.cd.enumerate(K) if any(b)]
    A: dict = {zero: ULMat.identity(mu)}
    for beta in classes:
        Rs = []
        for a in range(r):
            R = ULMat(mu)
            for gamma, Mg in Ms[a].items():
                if gamma == zero:
                    continue
                rest = tuple(x - y for x, y in zip(beta, gamma))
                if rest in A:
                    R = R + Mg * A[rest]
            Rs.append(R)
        a0 = next(a for a in range(r) if beta[a])
        c = Q(beta[a0])
        # X = -sum_k (-1)^k (uc)^(-k-1) ad_N^k(R)
        X = ULMat(mu)
        term = Rs[a0]
        k = 0
        while not term.is_zero():
            X = X + term.shift(-k - 1).scale(-(Q(-1) ** k) / c ** (k + 1))
            term = _ad(Ns[a0], term)
            k += 1
            if k > 2 * mu + 1:
                raise ModelError("ad of the residue is not nilpotent")
        for a in range(r):
            res = X.shift(1).scale(beta[a]) + _ad(Ns[a], X) + Rs[a]
            if not res.is_zero():
                raise ModelError(f"Deligne extension inconsistent at class {beta} direction {a + 1}")
        if not X.is_zero():
            A[beta] = X
    return FlatFrame(ring, _join_by_class(ring, A, mu), A, classes)


def flatness_residual(conn: Connection, frame: FlatFrame, a: int) -> list:
    """u d_a A + Mhat_a A - A N_a, computed directly on series."""
    ring = frame.ring
    M = small(conn, conn.mats[a])
    N = [[ring.const(v) for v in row] for row in conn.residues[a]]
    dA = smat_map(lambda s: s.log_derivative(a).shift_u(1), frame.A)
    return smat_sub(smat_add(dA, smat_mul(M, frame.A)), smat_mul(frame.A, N))


def flatness_check(conn: Connection, frame: FlatFrame) -> None:
    for a in range(conn.r):
        if not smat_is_zero(flatness_residual(conn, frame, a)):
            raise ModelError(f"flat frame fails flatness in direction {a + 1}")


# -- Birkhoff factorization -------------------------------------------------

@dataclass
class BirkhoffPair:
    ring: SeriesRing
    B: list
    C: list
    B_by_class: dict = field(repr=False)
    C_by_class: dict = field(repr=False)


def birkhoff(frame: FlatFrame) -> BirkhoffPair:
    """A B = C with B - Id strictly negative in u and C nonnegative."""
    Ad = frame.by_class
    mu = len(frame.A)
    r = frame.ring.nvars
    zero = tuple([0] * r)
    B = {zero: ULMat.identity(mu)}
    C = {zero: ULMat.identity(mu)}
    for beta in frame.classes:
        S = ULMat(mu)
        for gamma, Ag in Ad.items():
            if gamma == zero:
                continue
            rest = tuple(x - y for x, y in zip(beta, gamma))
            if rest in B:
                S = S + Ag * B[rest]
        Bb, Cb = -S.neg_part(), S.nonneg_part()
        if not Bb.is_zero():
            B[beta] = Bb
        if not Cb.is_zero():
            C[beta] = Cb
    ring = frame.ring
    return BirkhoffPair(ring, _join_by_class(ring, B, mu), _join_by_class(ring, C, mu), B, C)


def birkhoff_fixed_point(frame: FlatFrame) -> BirkhoffPair:
    """Second schedule: iterate B <- B - neg(A B) on whole series."""
    A = frame.A
    ring = frame.ring
    mu = len(A)
    B = [[ring.one() if i == k else ring.zero() for k in range(mu)] for i in range(mu)]
    for _ in range(ring.K + 2):
        AB = smat_mul(A, B)
        corr = smat_map(lambda s: s.neg_part(), AB)
        if smat_is_zero(corr):
            return BirkhoffPair(ring, B, AB, {}, {})
        B = smat_sub(B, corr)
    raise ModelError("Birkhoff iteration did not converge")


def primitive_form(pair: BirkhoffPair) -> list[Series]:
    """zeta = C e_1 in the good basis."""
    return [row[0] for row in pair.C]


# -- flat unit and period map ------------------------------------------------

def flat_unit(conn: Connection) -> list[LogPoly]:
    """exp(-sum_a l_a N_a / u) e_1 as a vector of polynomials in the l_a."""
    ring = q_ring(conn)
    mu = conn.table.mu
    r = conn.r
    zero = tuple([0] * r)
    v = [LogPoly(ring, r, {zero: ring.one()} if i == 0 else {}) for i in range(mu)]
    total = list(v)
    for k in range(1, mu + 1):
        nxt = [LogPoly(ring, r) for _ in range(mu)]
        for a in range(r):
            N = conn.residues[a]
            for i in range(mu):
                acc = {}
                for l in range(mu):
                    if not N[i][l]:
                        continue
                    for exps, s in v[l].terms.items():
                        e = list(exps)
                        e[a] += 1
                        key = tuple(e)
                        acc[key] = acc.get(key, ring.zero()) + s * (-N[i][l] / k)
                nxt[i] = nxt[i] + LogPoly(ring, r, {e: s.shift_u(-1) for e, s in acc.items()})
        v = nxt
        if all(not p.terms for p in v):
            break
        total = [x + y for x, y in zip(total, v)]
    return total


@dataclass
class PeriodMap:
    ring: SeriesRing
    weights: tuple              # basis weights
    linear: list                # per basis index: integer l-coefficients (N_a)_{i1}
    corrections: list           # per basis index: Series (u-free)
    zeta_de: list               # B e_1
    zeta: list                  # C e_1

    def flat_indices(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w == 2]

    def tau(self, i: int) -> Series:
        """tau_i = q^{linear_i} exp(correction_i) for degree-2 indices, else the series."""
        if self.weights[i] != 2:
            return self.corrections[i]
        ring = self.ring
        mono = ring.monomial(1, 0, self.linear[i])
        return mono * self.corrections[i].exp()

    def log_tau(self, i: int) -> LogPoly:
        r = self.ring.nvars
        terms = {tuple([0] * r): self.corrections[i]}
        for a, c in enumerate(self.linear[i]):
            if c:
                e = [0] * r
                e[a] = 1
                terms[tuple(e)] = self.ring.const(c)
        return LogPoly(self.ring, r, terms)


def period_map(conn: Connection, pair: BirkhoffPair, unit: list[LogPoly] | None = None) -> PeriodMap:
    ring = pair.ring
    mu = len(pair.B)
    r = conn.r
    Be1 = [row[0] for row in pair.B]
    if unit is None:
        unit = flat_unit(conn)
    zero = tuple([0] * r)
    linear, corr = [], []
    for i in range(mu):
        # u^0 part of u (B e_1 - unit)_i
        diff = LogPoly(ring, r, {zero: Be1[i]}) + LogPoly(ring, r, {e: -s for e, s in unit[i].terms.items()})
        comp = {e: s.shift_u(1) for e, s in diff.terms.items()}
        for e, s in comp.items():
            if any(d > 0 for d in s.u_degrees()):
                raise ModelError(f"period map component {i + 1} has positive u-powers")
        const = comp.get(zero, ring.zero()).u_coeff(0)
        lin = []
        for a in range(r):
            e = [0] * r
            e[a] = 1
            s = comp.get(tuple(e), ring.zero()).u_coeff(0)
            if any(k[1:] != zero for k in s.terms):
                raise ModelError("log-linear coefficient is not constant")
            lin.append(int(s.constant()))
        for e, s in comp.items():
            if sum(e) > 1 and not s.u_coeff(0).is_zero():
                raise ModelError("period map has higher log terms at u^0")
        linear.append(tuple(lin))
        corr.append(const)
    for i in range(mu):
        expect = [conn.residues[a][i][0] for a in range(r)]
        if list(linear[i]) != expect:
            raise ModelError("log-linear part differs from the residue column")
    return PeriodMap(ring, tuple(conn.table.mr.basis_w), linear, corr, Be1,
                     [row[0] for row in pair.C])


# -- closed-form comparison ---------------------------------------------------

def _base_series(pm: PeriodMap, base: str, solved: dict) -> Series:
    if base.startswith("tau"):
        idx = int(base[3:]) - 1
        return solved[idx] if idx in solved else pm.tau(idx)
    if base.startswith("q"):
        return pm.ring.var(int(base[1:]) - 1)
    raise ModelError(f"unknown base {base!r}")


def _univariate_tau(pm: PeriodMap, cf: dict) -> Series:
    ring = pm.ring
    a = cf["q_index"] - 1
    lam = ring.lam[a]
    Ku = ring.K // lam
    u1 = univariate_ring(Ku, "x")
    x = u1.var(0)
    E = sum((qparse(f["exponent"]) for f in cf["factors"]), ZERO)
    s = x * binomial_series(u1, E, x)
    tau = reversion(s)
    terms = {}
    for key, c in tau.terms.items():
        e = [0] * ring.nvars
        e[a] = key[1]
        terms[(0, *e)] = c
    return Series(ring, terms)


def mirror_map_check(pm: PeriodMap, closed_forms: Sequence[dict]) -> list[dict]:
    """Compare computed flat coordinates with relations q_a = tau_i prod (1 + base)^e."""
    ring = pm.ring
    solved: dict = {}
    reports = []
    for cf in closed_forms:
        i = cf["flat_index"] - 1
        if all(f["base"] == f"tau{i + 1}" for f in cf["factors"]):
            predicted = _univariate_tau(pm, cf)
            solved.setdefault(i, predicted)
        else:
            a = cf["q_index"] - 1
            predicted = ring.var(a)
            for f in cf["factors"]:
                base = _base_series(pm, f["base"], solved)
                predicted = predicted * binomial_series(ring, -qparse(f["exponent"]), base)
        computed = pm.tau(i)
        diff = computed - predicted
        mism = sorted(diff.terms)[:8]
        reports.append({
            "relation": cf.get("label") or _relation_text(cf),
            "flat_index": i + 1,
            "equal": diff.is_zero(),
            "truncation": ring.K,
            "computed": computed.to_json(),
            "expected": predicted.to_json(),
            "mismatches": [[list(k[1:]), qfmt(computed.terms.get(k, ZERO)),
                            qfmt(predicted.terms.get(k, ZERO))] for k in mism],
        })
    return reports


def _relation_text(cf: dict) -> str:
    parts = [f"tau{cf['flat_index']}"]
    for f in cf["factors"]:
        parts.append(f"(1+{f['base']})^({f['exponent']})")
    return f"q{cf['q_index']} = " + "*".join(parts)


def frame_weight_violations(conn: Connection, frame: FlatFrame) -> list:
    w = conn.table.mr.basis_w
    out = []
    for i, row in enumerate(frame.A):
        for k, s in enumerate(row):
            ws = s.weights()
            if ws and ws != {w[k] - w[i]}:
                out.append((i, k, sorted(ws)))
    return out


def pairing_shadow(conn: Connection, gram: Sequence[Sequence]) -> bool:
    """Residues are self-adjoint for the central pairing: N^T G = G N."""
    mu = len(gram)
    for N in conn.residues:
        NT_G = [[sum((N[l][i] * gram[l][k] for l in range(mu)), ZERO) for k in range(mu)] for i in range(mu)]
        G_N = [[sum((gram[i][l] * N[l][k] for l in range(mu)), ZERO) for k in range(mu)] for i in range(mu)]
        if NT_G != G_N:
            return False
    return True


