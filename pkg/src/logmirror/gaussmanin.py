"""Gauss-Manin connection on the good basis.

Matrices are stored as ``Mhat = u * M``: column ``k`` of ``Mhat_a`` holds the
basis coordinates of ``u * nabla_a(phi_k)``.  Directions ``0..r-1`` are the
logarithmic curve-class directions ``q_a d/dq_a``; directions ``r..r+s-1``
are the unfolding directions ``d/dt_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ModelError
from .hodge import ReductionTable
from .monoidring import HodgeElement
from .scalars import (Q, Series, identity, is_nilpotent, rat_matmul, smat_add, smat_is_zero,
                      smat_map, smat_mul, smat_sub)


def _columns_to_matrix(cols: Sequence[Sequence[Series]]) -> list:
    mu = len(cols)
    return [[cols[k][i] for k in range(mu)] for i in range(mu)]


def u_nabla_q_element(table: ReductionTable, a: int, x: HodgeElement) -> HodgeElement:
    """u * nabla_{q_a d/dq_a} of an element, before reduction."""
    mr = table.mr
    out: dict = {}
    # d_a F = sum_s p_s[a] z_s + sum_j t_j beta_ref(phi_j)[a] phi_j
    terms = [(mr.ray_mono(s), exc[a], mr.zero_e) for s, exc in enumerate(_ray_excess(mr)) if exc[a]]
    for idx, jb in enumerate(mr.t_dirs):
        mono = mr.basis_mono(jb)
        ba = mr.ref_excess(*mono)[a]
        if ba:
            te = tuple(1 if x == idx else 0 for x in range(mr.s))
            terms.append((mono, ba, te))
    for (j, m, beta, e), c in x.terms.items():
        for mono, pa, te in terms:
            m2, b2 = mr.mono_mul((m, beta), mono)
            k = (j, m2, b2, tuple(p + q for p, q in zip(e, te)))
            out[k] = out.get(k, Q(0)) + c * pa
        ba = mr.ref_excess(m, beta)[a]
        if ba:
            k = (j + 1, m, beta, e)
            out[k] = out.get(k, Q(0)) + c * ba
    return HodgeElement(mr, out)


def _ray_excess(mr):
    got = getattr(mr, "_ray_excess", None)
    if got is None:
        got = tuple(mr.ref_excess(*mr.ray_mono(s)) for s in range(mr.fan.d))
        mr._ray_excess = got
    return got


def nabla_q(table: ReductionTable, a: int, k: int) -> list[Series]:
    mr = table.mr
    return table.reduce(u_nabla_q_element(table, a, HodgeElement.of(mr, mr.basis_mono(k))))


def nabla_t(table: ReductionTable, j: int, k: int) -> list[Series]:
    """u * nabla_{d/dt} for the j-th unfolding variable, on phi_k."""
    mr = table.mr
    phi_j = HodgeElement.of(mr, mr.basis_mono(mr.t_dirs[j]))
    return table.reduce(phi_j * HodgeElement.of(mr, mr.basis_mono(k)))


def superpotential(table: ReductionTable) -> HodgeElement:
    mr = table.mr
    F = HodgeElement(mr)
    for s in range(mr.fan.d):
        F = F + HodgeElement.of(mr, mr.ray_mono(s))
    for idx, j in enumerate(mr.t_dirs):
        e = [0] * mr.s
        e[idx] = 1
        F = F + HodgeElement.of(mr, mr.basis_mono(j), e=tuple(e))
    return F


def nabla_u(table: ReductionTable, k: int) -> list[Series]:
    """nabla_{u d/du}(phi_k) = -(1/u) reduce(F phi_k); phi_k has no u-dependence."""
    mr = table.mr
    coords = table.reduce(superpotential(table) * HodgeElement.of(mr, mr.basis_mono(k)))
    return [-s.shift_u(-1) for s in coords]


@dataclass
class Connection:
    table: ReductionTable
    mats: list          # Mhat per direction (q first, then t)
    U: list | None      # matrix of nabla_{u d/du}
    residues: list      # N_a per q-direction (rational)

    @property
    def r(self) -> int:
        return self.table.mr.r

    @property
    def ndirs(self) -> int:
        return len(self.mats)

    def derivative(self, a: int):
        """u * (derivative along direction a) acting on a Series."""
        r = self.r
        if a < r:
            return lambda s: s.log_derivative(a).shift_u(1)
        return lambda s: s.derivative(a).shift_u(1)


def connection(table: ReductionTable, with_u: bool = True, parallel: bool = False) -> Connection:
    mr = table.mr
    mu = table.mu
    ws = {w + 2 for w in mr.basis_w}
    ws |= {mr.basis_w[j] + w for j in mr.t_dirs for w in mr.basis_w}
    table.prebuild(sorted(ws), parallel=parallel)
    mats = []
    for a in range(mr.r):
        mats.append(_columns_to_matrix([nabla_q(table, a, k) for k in range(mu)]))
    for j in range(mr.s):
        mats.append(_columns_to_matrix([nabla_t(table, j, k) for k in range(mu)]))
    U = _columns_to_matrix([nabla_u(table, k) for k in range(mu)]) if with_u else None
    res = [residue(M) for M in mats[:mr.r]]
    conn = Connection(table, mats, U, res)
    check_residues(res)
    return conn


def residue(M) -> list:
    out = []
    for row in M:
        r = []
        for s in row:
            z = s.q_zero()
            if any(k[0] for k in z.terms):
                raise ModelError("residue has u-dependence")
            r.append(z.constant())
        out.append(r)
    return out


def check_residues(res: Sequence) -> None:
    for k, N in enumerate(res):
        if not is_nilpotent(N):
            raise ModelError(f"residue {k + 1} is not nilpotent")
    for a in range(len(res)):
        for b in range(a + 1, len(res)):
            if rat_matmul(res[a], res[b]) != rat_matmul(res[b], res[a]):
                raise ModelError(f"residues {a + 1} and {b + 1} do not commute")


def _commutator(A, B):
    return smat_sub(smat_mul(A, B), smat_mul(B, A))


def _valid_part(conn: Connection, C, dirs) -> list:
    # d/dt lowers the truncation order by one, so identities involving it
    # only hold below the top order
    if all(d < conn.r for d in dirs):
        return C
    K = conn.table.K - 1
    return smat_map(lambda s: s.truncate(K).recast(s.ring), C)


def curvature(conn: Connection, a: int, b: int) -> list:
    Ma, Mb = conn.mats[a], conn.mats[b]
    da, db = conn.derivative(a), conn.derivative(b)
    C = smat_add(smat_sub(smat_map(da, Mb), smat_map(db, Ma)), _commutator(Ma, Mb))
    return _valid_part(conn, C, (a, b))


def _first_nonzero(C):
    for i, row in enumerate(C):
        for k, s in enumerate(row):
            if not s.is_zero():
                return i, k, s
    return None


def curvature_check(conn: Connection) -> None:
    for a in range(conn.ndirs):
        for b in range(a + 1, conn.ndirs):
            bad = _first_nonzero(curvature(conn, a, b))
            if bad:
                i, k, s = bad
                raise ModelError(f"curvature ({a + 1},{b + 1}) entry ({i + 1},{k + 1}) = {s.render()}")


def u_commutator(conn: Connection, a: int) -> list:
    """u [nabla_a, nabla_{u d/du}] in matrix form; zero for a flat extension."""
    Ma, U = conn.mats[a], conn.U
    da = conn.derivative(a)
    left = smat_sub(smat_map(da, U), smat_map(lambda s: s.u_derivative(), Ma))
    return _valid_part(conn, smat_add(smat_add(left, Ma), _commutator(Ma, U)), (a,))


def u_commutator_check(conn: Connection) -> None:
    for a in range(conn.ndirs):
        bad = _first_nonzero(u_commutator(conn, a))
        if bad:
            i, k, s = bad
            raise ModelError(f"[nabla_{a + 1}, nabla_u] entry ({i + 1},{k + 1}) = {s.render()}")


def expected_weight(conn: Connection, direction: int | str, i: int, k: int) -> int:
    mr = conn.table.mr
    w = mr.basis_w
    if direction == "u":
        return w[k] - w[i]
    if direction < conn.r:
        return 2 + w[k] - w[i]
    return w[mr.t_dirs[direction - conn.r]] + w[k] - w[i]


def weight_violations(conn: Connection) -> list:
    out = []
    dirs: list = list(range(conn.ndirs)) + (["u"] if conn.U is not None else [])
    for d in dirs:
        M = conn.U if d == "u" else conn.mats[d]
        for i, row in enumerate(M):
            for k, s in enumerate(row):
                ws = s.weights()
                if ws and ws != {expected_weight(conn, d, i, k)}:
                    out.append((d, i, k, sorted(ws)))
    return out


def u_power_range(conn: Connection) -> tuple[int, int]:
    degs = [d for M in conn.mats for row in M for s in row for d in s.u_degrees()]
    return (min(degs, default=0), max(degs, default=0))


def first_row_violations(conn: Connection) -> list:
    """Terms of the phi_1-row of each q-direction matrix with q_c-weight <= 2."""
    cd = conn.table.mr.cd
    r = conn.r
    out = []
    for a in range(r):
        for k, s in enumerate(conn.mats[a][0]):
            for key in s.terms:
                if cd.weight(key[1:1 + r]) <= 2:
                    out.append((a, k, key))
    return out


def multiplication_matrix(ring_table, j: int) -> list:
    """Matrix of multiplication by phi_j in the central ring (column convention)."""
    mu = len(ring_table)
    return [[ring_table[j][k][i] for k in range(mu)] for i in range(mu)]


def at_origin(M) -> list:
    return [[s.q_zero().u_coeff(0).constant() for s in row] for row in M]


def unit_matrix(mu: int):
    return identity(mu)
