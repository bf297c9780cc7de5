"""Static figures from maxreg CSV artifacts."""

from .figures import (
    EmptyDataError,
    FigureSpec,
    KIND_SCHEMAS,
    RenderResult,
    SchemaError,
    read_artifact,
    render,
)

__version__ = "0.1.0"
