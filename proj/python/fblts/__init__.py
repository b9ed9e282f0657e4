"""Python access to the fblts shallow-water core."""

from ._core import (
    ConfigError,
    Mesh,
    MeshError,
    RunAbort,
    ValidationReport,
    conservation,
    hex_mesh,
    load_mesh,
    run,
    validate_mesh,
)

__all__ = [
    "ConfigError",
    "Mesh",
    "MeshError",
    "RunAbort",
    "ValidationReport",
    "conservation",
    "hex_mesh",
    "load_mesh",
    "run",
    "validate_mesh",
]
