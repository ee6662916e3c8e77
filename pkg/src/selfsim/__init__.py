"""Attractors and self-similar measures of affine contraction systems.

Subpackages cover exact quadratic/cyclotomic ring arithmetic, compact-set
iteration with Hausdorff metrics, invariant measures (atomic and density
form), multi-component systems, cut-and-project point sets with Weyl
averages, and a 3-adic component system.
"""

__version__ = "0.1.0"
