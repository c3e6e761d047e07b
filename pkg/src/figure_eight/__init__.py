"""Solver and numerical certifier for the figure-eight three-body choreography.

Pipeline: seed a D6-symmetric Fourier loop, minimize the action to find the
eight, refine it to ~1e-12 by shooting on the fundamental domain, then certify
every geometric property of the orbit (lobe convexity above all) for the
Newtonian potential and the power-law family r^a/a.
"""

__version__ = "0.1.0"
