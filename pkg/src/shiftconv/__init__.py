"""Numerical laboratory for averaged shifted convolution sums of GL(3) x GL(2) type.

Modules
-------
arith       sieves, Kloosterman and Ramanujan sums, modular helpers
coeffs      Ramanujan tau via eta products and NTT, coefficient tables and cache
transforms  Mellin transforms and the Voronoi integral transforms
circle      moduli sets, interval-average indicator, L^2 defect, Poisson in h
voronoi     both sides of the GL(2), GL(3) and d3 Voronoi formulas
sumlab      direct shifted sums, presets, decay and cancellation experiments
cli         command-line front end
"""

__version__ = "0.1.0"
