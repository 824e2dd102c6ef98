import pytest

from logmirror.checks import run_checks
from logmirror.errors import InputError
from logmirror.model import Model, ModelInput

from support import FANS, cached_model

EXTRA = {
    "P3": {"rays": [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]],
           "max_cones": [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]], "truncation": 6},
    "P1^3": {"rays": [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
             "max_cones": [[a, b, c] for a in (1, 2) for b in (3, 4) for c in (5, 6)],
             "truncation": 4},
    "F3": {"rays": [[1, 0], [0, 1], [-1, 3], [0, -1]],
           "max_cones": [[1, 2], [2, 3], [3, 4], [4, 1]], "truncation": 5},
}


@pytest.mark.parametrize("name", FANS)
def test_check_suite_on_test_fans(name):
    res = run_checks(cached_model(name))
    assert {k for k, v in res.items() if not v["ok"]} == set()
    assert res["reference_cone_independence"]["cones_checked"] == len(cached_model(name).fan.max_cones) - 1


@pytest.mark.parametrize("name", sorted(EXTRA))
def test_check_suite_on_further_fans(name):
    res = run_checks(Model(ModelInput.from_json(EXTRA[name])))
    assert {k for k, v in res.items() if not v["ok"]} == set()


def test_p3_ring():
    m = Model(ModelInput.from_json(EXTRA["P3"]))
    assert m.mr.basis_w == (0, 2, 4, 6)
    c = m.ring_table
    # Q[H]/H^4
    assert c[1][1] == [0, 0, 1, 0] and c[1][2] == [0, 0, 0, 1] and c[2][2] == [0] * 4
    assert m.curves.qc == (8,)


def test_non_semi_fano_fan():
    m = Model(ModelInput.from_json(EXTRA["F3"]))
    assert m.curves.qc == (4, -2) and not m.curves.semi_fano
    res = run_checks(m)
    assert "semi_fano_zeta" not in res and "semi_fano_first_row" not in res
    lo, hi = res["u_powers_at_t0"]["range"]
    assert lo == 0 and hi > 1
    # outside the semi-Fano regime the primitive form picks up corrections
    assert any(not s.is_zero() for s in m.period_map.zeta[1:])


def test_check_suite_with_unfolding():
    res = run_checks(cached_model("P2", include_t_directions=True, truncation=6))
    assert all(v["ok"] for v in res.values())


def test_invalid_fan_check_stops_at_validation():
    m = Model(ModelInput.from_json({"rays": [[1, 0], [0, 1], [-1, 0]], "max_cones": [[1, 2], [2, 3]]}))
    assert run_checks(m) == {"validation": {"ok": False}}


def test_reference_cone_out_of_range():
    with pytest.raises(InputError):
        Model(ModelInput.from_json({**EXTRA["F3"], "reference_cone": 9}))
