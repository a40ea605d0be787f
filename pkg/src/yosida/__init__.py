"""Numerical laboratory for meromorphic functions whose rescalings
h^-alpha f(h + h^-beta z) form normal families.

Submodules: sphere (pole-aware jets), elliptic, catalog, quadrature,
locate (zeros and poles), nevanlinna (growth), rescale (normality checks),
expansion (partial fractions and products), painleve (Painleve I rays),
io (file formats), verify (acceptance suites) and cli.
"""

from .catalog import MeromorphicMap, build, load_manifest
from .sphere import JetArray, ScalingParams, SpherePoint

__version__ = "0.1.0"

__all__ = ["MeromorphicMap", "build", "load_manifest", "JetArray", "ScalingParams", "SpherePoint", "__version__"]
