# vortexsheet - linear stability of the compressible vortex sheet
"""Symbol roots, normal modes, Sobolev growth tables and a time-domain oracle
for the two-dimensional compressible vortex sheet."""

__version__ = "0.1.0"
