import json
from importlib import resources

from logmirror.model import Model, ModelInput

FANS = ("P1", "P2", "F2", "P1xP1", "dP1")


def load(name: str) -> dict:
    return json.loads(resources.files("logmirror").joinpath("data", f"{name}.json").read_text())


def make_model(name: str, **overrides) -> Model:
    data = load(name)
    data.update(overrides)
    return Model(ModelInput.from_json(data))


_cache: dict = {}


def cached_model(name: str, **overrides) -> Model:
    """Models are expensive and immutable once built; share them across tests."""
    key = (name, tuple(sorted(overrides.items())))
    if key not in _cache:
        _cache[key] = make_model(name, **overrides)
    return _cache[key]
