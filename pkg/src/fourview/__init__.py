"""Parse, check, map, estimate and document 4+1 view architecture descriptions."""

from .checker import CheckOptions, Hop, Trace, check, trace
from .docgen import generate
from .loadsim import LoadReport, estimate
from .mapper import MapperConstraints, MappingResult, inside_out, outside_in
from .model import (
    ArchitectureModel,
    Diagnostic,
    FourViewError,
    resolve,
    view_presence,
)
from .parser import ParseError, format_model, parse, parse_file
from .render import to_dot

__all__ = [
    "ArchitectureModel",
    "CheckOptions",
    "Diagnostic",
    "FourViewError",
    "Hop",
    "LoadReport",
    "MapperConstraints",
    "MappingResult",
    "ParseError",
    "Trace",
    "check",
    "estimate",
    "format_model",
    "generate",
    "inside_out",
    "outside_in",
    "parse",
    "parse_file",
    "resolve",
    "to_dot",
    "trace",
    "view_presence",
]
