"""Time-splitting solvers for the Dirac equation with time-dependent potentials."""

__version__ = "0.3.0"
