"""Two-scale finite-element simulator for nonlinear dispersion in perforated media.

The package couples a macroscopic dispersion-reaction equation to a family
of drift-perturbed periodic cell problems whose solutions determine the
effective dispersion tensor.  Submodules:

mesh        cell/macro triangulations, periodic pairing, mesh exchange
fem         P1/P2 spaces, sparse assembly, periodic + mean constraints, solve
stokes      periodic Taylor-Hood flow field on the perforated cell
cell        parametric corrector problems and the effective tensor
dispersion  tensor tables over the drift parameter, interpolation, coupling
macro       implicit-Euler parabolic solver with pointwise tensor fields
scheme      outer fixed-point iteration between the two scales
verify      independent oracles and the acceptance suite
cli         scenario files and the command-line pipeline
"""

from . import cell, dispersion, fem, macro, mesh, scheme, stokes, verify  # noqa: F401
from .errors import DispersimError  # noqa: F401

__version__ = "0.1.0"
