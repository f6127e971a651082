"""Height, width, and volume tails of Galton-Watson trees.

Simulators (trees and their breadth-first queue walks), the multiscale
path decomposition, concentration-function machinery, exact
small-instance oracles, and a Monte Carlo harness that verifies the tail
bounds with fitted constants and Wilson-scored verdicts.
"""

from . import conc, harness, offspring, oracle, rng, scales, treegen, walk

__version__ = "0.1.0"

__all__ = [
    "conc",
    "harness",
    "offspring",
    "oracle",
    "rng",
    "scales",
    "treegen",
    "walk",
    "__version__",
]
