"""Network surfaces: a TCP device emulator speaking the wire protocol and
an HTTP API backing simulation, preprocessing, rasters, masks and metric
evaluation for the annotation UI."""

from .store import ScanStore, ScanResource
from .emulator import EmulatorServer, serve_emulator
from .api import ApiServer, serve_http

__all__ = [
    "ScanStore",
    "ScanResource",
    "EmulatorServer",
    "serve_emulator",
    "ApiServer",
    "serve_http",
]
