"""Planar path following: geometry, guidance laws, NMPC, current estimation and a
scenario simulator."""
from . import exceptions, frames, guidance, nmpc, observer, paths, pf_errors, vehicle

__version__ = "0.1.0"
__all__ = ["exceptions", "frames", "guidance", "nmpc", "observer", "paths", "pf_errors",
           "vehicle", "__version__"]
