"""Pfaffian correlation functions for orthogonal/symplectic matrix ensembles.

The package computes eigenvalue correlation functions of random-matrix
ensembles whose joint densities pair a Vandermonde factor with an
antisymmetric two-point kernel, via skew-orthogonal polynomials and Pfaffians,
including multi-slice parametric (Brownian-motion) chains, the reduction to
determinantal (Eynard-Mehta) form, and Monte Carlo validation.
"""

from .linalg import AntisymMatrix, determinant, pfaffian, tridiag_eigen
from .measures import (IntegrationRule, Measure, dchebyshev, dexp, hermite,
                       jacobi, laguerre, moment, quadrature, symhahn)
from .orthopoly import OrthoPolyFamily, build_family, eval_poly
from .skewproduct import (GramMatrix, SkewKernel, deriv_kernel, dexp_kernel,
                          erf_kernel, gram, sign_kernel, skew_inner)
from .skewpoly import SkewPolySet, classical_table, construct_from_gram, invert_expansion
from .kernels import CorrelationKernel, SliceChain, assemble_even, assemble_odd
from .correlations import EnsembleSpec, PointConfiguration, correlation, density

__all__ = [
    "AntisymMatrix", "determinant", "pfaffian", "tridiag_eigen",
    "IntegrationRule", "Measure", "hermite", "laguerre", "jacobi",
    "symhahn", "dchebyshev", "dexp", "quadrature", "moment",
    "OrthoPolyFamily", "build_family", "eval_poly",
    "GramMatrix", "SkewKernel", "sign_kernel", "deriv_kernel",
    "dexp_kernel", "erf_kernel", "gram", "skew_inner",
    "SkewPolySet", "classical_table", "construct_from_gram", "invert_expansion",
    "CorrelationKernel", "SliceChain", "assemble_even", "assemble_odd",
    "EnsembleSpec", "PointConfiguration", "correlation", "density",
]
