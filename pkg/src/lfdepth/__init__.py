"""Multi-view light field depth estimation.

A 4x4 grid of grayscale views goes through census transform, bounded
multi-view cost aggregation, semi-global path smoothing and winner-takes-all
to produce metric depth maps, with a TCP streamer and a synthetic scene
generator for end-to-end testing without camera hardware.
"""
from lfdepth._backend import backend_name, compiled_available, use_backend

__version__ = "0.1.0"

__all__ = ["backend_name", "compiled_available", "use_backend", "__version__"]
