"""Exact mirror log Landau-Ginzburg data for smooth projective toric fans.

The pipeline: :mod:`fan` (validation, good basis) -> :mod:`moricone`
(curve classes) -> :mod:`monoidring` (canonical monomials) -> :mod:`hodge`
(reduction to the good basis) -> :mod:`gaussmanin` (connection) ->
:mod:`primitive` (flat frame, Birkhoff factorization, period map).
:class:`model.Model` wires them together for one input.
"""

from .errors import (BoundExceeded, InconsistentSystem, InputError, LogMirrorError, ModelError,
                     ValidationFailure)
from .model import Model, ModelInput

__all__ = ["Model", "ModelInput", "LogMirrorError", "InputError", "ValidationFailure",
           "ModelError", "BoundExceeded", "InconsistentSystem"]
__version__ = "0.1.0"
