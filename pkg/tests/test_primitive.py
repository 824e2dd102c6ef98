from fractions import Fraction
from math import factorial

import pytest

from logmirror.primitive import (birkhoff_fixed_point, flatness_residual, frame_weight_violations,
                                 mirror_map_check, pairing_shadow, primitive_form)
from logmirror.scalars import Q, Series, binomial_series, reversion, smat_is_zero

import oracles
from support import FANS, cached_model, load


def harmonic(d):
    return sum(Fraction(1, k) for k in range(1, d + 1))


def q_of(x):
    return Q(x.numerator, x.denominator)


@pytest.mark.parametrize("name", FANS)
def test_frame_is_flat_and_homogeneous(name):
    m = cached_model(name)
    for a in range(m.connection.r):
        assert smat_is_zero(flatness_residual(m.connection, m.frame, a))
    assert frame_weight_violations(m.connection, m.frame) == []


@pytest.mark.parametrize("name", FANS)
def test_frame_is_identity_at_origin(name):
    m = cached_model(name)
    for i, row in enumerate(m.frame.A):
        for k, s in enumerate(row):
            z = s.q_zero()
            assert z == (m.frame.ring.one() if i == k else m.frame.ring.zero())


def test_p1_frame_matches_j_function():
    m = cached_model("P1")
    A = m.frame.A
    R = m.frame.ring
    K = R.K
    j0 = Series(R, {(-2 * d, d): q_of(Fraction(1, factorial(d) ** 2)) for d in range(K + 1)})
    j1 = Series(R, {(-2 * d - 1, d): q_of(2 * harmonic(d) / factorial(d) ** 2) for d in range(1, K + 1)})
    dj = Series(R, {(1 - 2 * d, d): q_of(Fraction(-1, factorial(d) * factorial(d - 1)))
                    for d in range(1, K + 1)})
    assert A[1][1] == j0
    assert A[1][0] == j1
    assert A[0][1] == dj
    assert A[0][0] * A[1][1] - A[0][1] * A[1][0] == R.one()


@pytest.mark.parametrize("name", FANS)
def test_birkhoff_factorization(name):
    m = cached_model(name)
    bp = m.birkhoff
    alt = birkhoff_fixed_point(m.frame)
    assert bp.B == alt.B and bp.C == alt.C
    R = bp.ring
    for i, row in enumerate(bp.B):
        for k, s in enumerate(row):
            extra = s - (R.one() if i == k else R.zero())
            assert all(d < 0 for d in extra.u_degrees())
    assert all(d >= 0 for row in bp.C for s in row for d in s.u_degrees())


@pytest.mark.parametrize("name", FANS)
def test_semi_fano_primitive_form_is_unit(name):
    m = cached_model(name)
    zeta = primitive_form(m.birkhoff)
    R = m.birkhoff.ring
    assert zeta == [R.one()] + [R.zero()] * (len(zeta) - 1)


@pytest.mark.parametrize("name", FANS)
def test_semi_fano_tau_outside_degree_two(name):
    pm = cached_model(name).period_map
    for i, w in enumerate(pm.weights):
        if w != 2:
            assert pm.corrections[i].is_zero()


@pytest.mark.parametrize("name", ["P1", "P2", "P1xP1"])
def test_fano_index_two_has_trivial_mirror_map(name):
    # no class of qc-weight 2 exists, so the degree-0 correction vanishes
    pm = cached_model(name).period_map
    for i in pm.flat_indices():
        assert pm.corrections[i].is_zero()


def test_dp1_mirror_map():
    # the exceptional class has qc-weight 2: corrections are series in q2 alone
    pm = cached_model("dP1").period_map
    for i in pm.flat_indices():
        for key in pm.corrections[i].terms:
            assert key[0] == 0 and key[1] == 0


def test_f2_catalan():
    m = cached_model("F2")
    pm = m.period_map
    tau2 = pm.tau(1)
    assert [tau2.terms.get((0, 0, n), 0) for n in range(1, 11)] == [
        oracles.catalan(n) for n in range(1, 11)]
    checks = mirror_map_check(pm, load("F2")["closed_forms"])
    assert [c["equal"] for c in checks] == [True, True, False]


def test_f2_mirror_map_by_independent_reversion():
    pm = cached_model("F2").period_map
    R = pm.ring
    t = R.var(1)
    # tau2(q2) is the compositional inverse of q2 = tau2 (1 + tau2)^-2
    assert pm.tau(1) == reversion(t * binomial_series(R, -2, t), var=1)


@pytest.mark.parametrize("name", FANS)
def test_pairing_shadow(name):
    m = cached_model(name)
    assert pairing_shadow(m.connection, m.pairing)


def test_linear_part_is_residue_column():
    m = cached_model("F2")
    pm = m.period_map
    for i in range(4):
        assert list(pm.linear[i]) == [m.connection.residues[a][i][0] for a in range(2)]
