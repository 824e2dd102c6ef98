"""The property suite behind the ``check`` command.

Each check returns a small dict with an ``ok`` flag and, where useful, the
evidence.  Nothing here raises on failure; the caller decides.
"""

from __future__ import annotations

from itertools import product

from .errors import LogMirrorError
from .fan import betti_numbers, check_tau_condition, reference_frame
from .gaussmanin import (connection, curvature, first_row_violations, u_commutator,
                         weight_violations)
from .hodge import ReductionTable
from .monoidring import HodgeElement, MonoidRing
from .primitive import (birkhoff_fixed_point, flatness_residual, frame_weight_violations,
                        pairing_shadow, small)
from .scalars import ZERO, determinant, smat_is_zero


def _ok(flag, **extra) -> dict:
    return {"ok": bool(flag), **extra}


def check_fulton(model) -> dict:
    fo = model.fulton
    hist = [0] * (model.fan.n + 1)
    for t in fo.taus:
        hist[len(t)] += 1
    return {
        "tau_condition": _ok(check_tau_condition(model.fan, fo.cone_order, fo.taus)),
        "betti_histogram": _ok(hist == betti_numbers(model.fan), histogram=hist,
                               betti=betti_numbers(model.fan)),
        "unit_first": _ok(fo.taus[0] == () and max(len(t) for t in fo.taus) == model.fan.n),
    }


def check_freeness(model) -> dict:
    t = model.table
    mr = model.mr
    for i in range(t.mu):
        coords = t.reduce(HodgeElement.of(mr, mr.basis_mono(i)))
        for k, s in enumerate(coords):
            if s != (t.ring.one() if k == i else t.ring.zero()):
                return {"freeness": _ok(False, index=i + 1)}
    return {"freeness": _ok(True)}


def check_central_ring(model) -> dict:
    c = model.ring_table
    mu = len(c)
    w = model.mr.basis_w
    comm = all(c[i][j] == c[j][i] for i in range(mu) for j in range(mu))
    unital = all(c[0][j][k] == (1 if j == k else 0) for j in range(mu) for k in range(mu))

    def mul(x, y):
        out = [ZERO] * mu
        for i in range(mu):
            for j in range(mu):
                if x[i] and y[j]:
                    for k in range(mu):
                        out[k] += x[i] * y[j] * c[i][j][k]
        return out

    e = [[1 if k == i else 0 for k in range(mu)] for i in range(mu)]
    assoc = all(mul(mul(e[i], e[j]), e[k]) == mul(e[i], mul(e[j], e[k]))
                for i, j, k in product(range(mu), repeat=3))
    graded = all(not c[i][j][k] or w[i] + w[j] == w[k]
                 for i, j, k in product(range(mu), repeat=3))
    G = model.pairing
    nondeg = determinant(G) != 0
    pgraded = all(not G[i][j] or w[i] + w[j] == 2 * model.fan.n
                  for i in range(mu) for j in range(mu))
    return {
        "central_ring": _ok(comm and unital and assoc and graded, commutative=comm,
                            unital=unital, associative=assoc, graded=graded),
        "pairing": _ok(nondeg and pgraded, nondegenerate=nondeg, graded=pgraded),
    }


def check_connection(model) -> dict:
    conn = model.connection
    out = {}
    bad = []
    for a in range(conn.ndirs):
        for b in range(a + 1, conn.ndirs):
            if not smat_is_zero(curvature(conn, a, b)):
                bad.append([a + 1, b + 1])
    out["curvature"] = _ok(not bad, failing_pairs=bad)
    badu = [a + 1 for a in range(conn.ndirs) if not smat_is_zero(u_commutator(conn, a))]
    out["u_commutator"] = _ok(not badu, failing_directions=badu)
    out["residues"] = _ok(True, note="nilpotent and commuting (asserted on construction)")
    wv = weight_violations(conn)
    out["connection_weights"] = _ok(not wv, violations=len(wv))
    degs = [d for a in range(conn.r) for row in small(conn, conn.mats[a]) for s in row
            for d in s.u_degrees()]
    lo, hi = min(degs, default=0), max(degs, default=0)
    # negative-weight classes let higher u-powers through, so the u^1 bound
    # is only asserted in the semi-Fano case
    bound = 1 if model.curves.semi_fano else None
    out["u_powers_at_t0"] = _ok(lo >= 0 and (bound is None or hi <= bound), range=[lo, hi],
                                upper_bound=bound)
    if model.curves.semi_fano:
        fr = first_row_violations(conn)
        out["semi_fano_first_row"] = _ok(not fr, violations=len(fr))
    G = model.pairing
    out["pairing_shadow"] = _ok(pairing_shadow(conn, G))
    return out


def _matrices_equal(c1, c2) -> bool:
    return all(a.terms == b.terms for M1, M2 in zip(c1.mats, c2.mats)
               for r1, r2 in zip(M1, M2) for a, b in zip(r1, r2))


def check_independence(model) -> dict:
    """Same connection from another pivot order, the full method, another reference cone."""
    base = model.connection
    out = {}
    alt = connection(ReductionTable(model.mr, model.K, "low", model.method), with_u=False)
    out["pivot_order_independence"] = _ok(_matrices_equal(base, alt))
    other = "full" if model.method == "shifted" else "shifted"
    alt2 = connection(ReductionTable(model.mr, model.K, "random:7", other), with_u=False)
    out["method_independence"] = _ok(_matrices_equal(base, alt2))
    results = []
    for k in range(len(model.fan.max_cones)):
        if k == model.ref.ref_cone:
            continue
        mr2 = MonoidRing(model.fan, model.curves, reference_frame(model.fan, k), model.fulton,
                         model.inp.include_t_directions)
        c2 = connection(ReductionTable(mr2, model.K), with_u=False)
        results.append(_matrices_equal(base, c2))
    out["reference_cone_independence"] = _ok(all(results), cones_checked=len(results))
    return out


def check_frame(model) -> dict:
    conn = model.connection
    fr = model.frame
    flat = all(smat_is_zero(flatness_residual(conn, fr, a)) for a in range(conn.r))
    out = {"flatness": _ok(flat)}
    wv = frame_weight_violations(conn, fr)
    out["frame_weights"] = _ok(not wv, violations=len(wv))
    bp = model.birkhoff
    alt = birkhoff_fixed_point(fr)
    out["birkhoff_schedules"] = _ok(bp.B == alt.B and bp.C == alt.C)
    split = (all(k[0] < 0 or (i == j and k == (0,) + (0,) * bp.ring.nvars)
                 for i, row in enumerate(bp.B) for j, s in enumerate(row) for k in s.terms)
             and all(k[0] >= 0 for row in bp.C for s in row for k in s.terms))
    out["birkhoff_split"] = _ok(split)
    pm = model.period_map
    if model.curves.semi_fano:
        zeta_one = all(s == (bp.ring.one() if i == 0 else bp.ring.zero())
                       for i, s in enumerate(pm.zeta))
        out["semi_fano_zeta"] = _ok(zeta_one)
        others = [i + 1 for i, w in enumerate(pm.weights) if w != 2 and not pm.corrections[i].is_zero()]
        out["semi_fano_tau_vanish"] = _ok(not others, nonzero=others)
    wts = [sorted(pm.corrections[i].weights()) for i in pm.flat_indices()]
    out["flat_coordinate_weights"] = _ok(all(w in ([], [0]) for w in wts))
    return out


def run_checks(model) -> dict:
    results = {"validation": _ok(model.report.ok)}
    if not model.report.ok:
        return results
    for fn in (check_fulton, check_freeness, check_central_ring, check_connection,
               check_independence, check_frame):
        try:
            results.update(fn(model))
        except LogMirrorError as exc:
            results[fn.__name__] = _ok(False, error=str(exc))
    return results
