"""Statistics of sensitivity-limited, nonlinear RF energy harvesting
under Nakagami block fading."""

from . import (channel, config, datasets, density, errors, harvesters, montecarlo,
               rfid, special, stats, units)

__version__ = "0.1.0"

__all__ = [
    "channel",
    "config",
    "datasets",
    "density",
    "errors",
    "harvesters",
    "montecarlo",
    "rfid",
    "special",
    "stats",
    "units",
    "__version__",
]
