"""Input record and the lazily assembled pipeline for one fan."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .errors import InputError, ValidationFailure
from .fan import Fan, fulton_order, primitive_collections, reference_frame, validate, walls
from .gaussmanin import connection
from .hodge import ReductionTable, central_ring, poincare_pairing
from .monoidring import MonoidRing
from .moricone import curve_data, ray_excess
from .primitive import birkhoff, deligne_extend, flat_unit, period_map

FORMATS = ("json", "text")


@dataclass
class ModelInput:
    rays: list
    max_cones: list
    truncation: int = 8
    include_t_directions: bool = False
    reference_cone: int | None = None       # 1-based index into max_cones
    format: str = "json"
    closed_forms: list = field(default_factory=list)
    reference_entries: list = field(default_factory=list)
    name: str | None = None

    KEYS = ("rays", "max_cones", "truncation", "include_t_directions", "reference_cone",
            "format", "closed_forms", "reference_entries", "name")

    @classmethod
    def from_json(cls, data) -> "ModelInput":
        if not isinstance(data, dict):
            raise InputError("model input must be a JSON object")
        unknown = set(data) - set(cls.KEYS)
        if unknown:
            raise InputError(f"unknown keys {sorted(unknown)}")
        for key in ("rays", "max_cones"):
            if key not in data:
                raise InputError(f"missing {key!r}")
        K = data.get("truncation", 8)
        if isinstance(K, bool) or not isinstance(K, int) or K < 1:
            raise InputError("truncation must be an integer >= 1")
        t = data.get("include_t_directions", False)
        if not isinstance(t, bool):
            raise InputError("include_t_directions must be a boolean")
        ref = data.get("reference_cone")
        if ref is not None and (isinstance(ref, bool) or not isinstance(ref, int)):
            raise InputError("reference_cone must be an integer")
        fmt = data.get("format", "json")
        if fmt not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}")
        cfs = data.get("closed_forms", [])
        if not isinstance(cfs, list) or any(not _closed_form_ok(c) for c in cfs):
            raise InputError("closed_forms must be a list of {flat_index, q_index, factors}")
        refs = data.get("reference_entries", [])
        if not isinstance(refs, list) or any(not _reference_ok(r) for r in refs):
            raise InputError("reference_entries must be a list of {direction, column, u_nabla}")
        name = data.get("name")
        if name is not None and not isinstance(name, str):
            raise InputError("name must be a string")
        return cls(data["rays"], data["max_cones"], K, t, ref, fmt, cfs, refs, name)

    def to_json(self) -> dict:
        out = {"rays": self.rays, "max_cones": self.max_cones, "truncation": self.truncation,
               "include_t_directions": self.include_t_directions,
               "reference_cone": self.reference_cone, "format": self.format,
               "closed_forms": self.closed_forms, "reference_entries": self.reference_entries}
        if self.name is not None:
            out["name"] = self.name
        return out


def _closed_form_ok(c) -> bool:
    if not isinstance(c, dict) or not {"flat_index", "q_index", "factors"} <= set(c):
        return False
    if not all(isinstance(c[k], int) and c[k] >= 1 for k in ("flat_index", "q_index")):
        return False
    return isinstance(c["factors"], list) and all(
        isinstance(f, dict) and isinstance(f.get("base"), str) and isinstance(f.get("exponent"), str)
        for f in c["factors"])


def _reference_ok(r) -> bool:
    return (isinstance(r, dict) and isinstance(r.get("direction"), str)
            and isinstance(r.get("column"), int) and isinstance(r.get("u_nabla"), str))


class Model:
    """Everything computed from one input; each stage is built on first use."""

    def __init__(self, inp: ModelInput, parallel: bool = False, pivot_order: str = "high",
                 method: str = "shifted", ref_cone: int | None = None):
        self.inp = inp
        self.K = inp.truncation
        self.parallel = parallel
        self.pivot_order = pivot_order
        self.method = method
        self.fan = Fan.from_lists(inp.rays, inp.max_cones)
        self.report = validate(self.fan)
        chosen = ref_cone if ref_cone is not None else inp.reference_cone
        if chosen is not None and not 1 <= chosen <= len(self.fan.max_cones):
            raise InputError(f"reference cone {chosen} out of range")
        self._ref_choice = None if chosen is None else chosen - 1

    def require_valid(self) -> None:
        if not self.report.ok:
            bad = [k for k in ("smooth", "complete", "projective") if not getattr(self.report, k)]
            raise ValidationFailure(f"fan is not {', '.join(bad)}", self.report)

    @cached_property
    def walls(self):
        self.require_valid()
        return walls(self.fan)

    @cached_property
    def primitive_collections(self):
        self.require_valid()
        return primitive_collections(self.fan)

    @cached_property
    def fulton(self):
        self.require_valid()
        return fulton_order(self.fan)

    @cached_property
    def ref(self):
        k = self._ref_choice if self._ref_choice is not None else self.fulton.cone_order[0]
        return reference_frame(self.fan, k)

    @cached_property
    def curves(self):
        self.require_valid()
        return curve_data(self.fan)

    @cached_property
    def ray_excess(self):
        return ray_excess(self.fan, self.curves, self.ref)

    @cached_property
    def mr(self) -> MonoidRing:
        return MonoidRing(self.fan, self.curves, self.ref, self.fulton, self.inp.include_t_directions)

    @cached_property
    def table(self) -> ReductionTable:
        return ReductionTable(self.mr, self.K, self.pivot_order, self.method)

    @cached_property
    def ring_table(self):
        return central_ring(self.mr)

    @cached_property
    def pairing(self):
        return poincare_pairing(self.mr, self.ring_table)

    @cached_property
    def connection(self):
        return connection(self.table, parallel=self.parallel)

    @cached_property
    def frame(self):
        return deligne_extend(self.connection)

    @cached_property
    def birkhoff(self):
        return birkhoff(self.frame)

    @cached_property
    def flat_unit(self):
        return flat_unit(self.connection)

    @cached_property
    def period_map(self):
        return period_map(self.connection, self.birkhoff, self.flat_unit)
