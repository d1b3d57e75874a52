"""holofeyn: holomorphic Feynman graph integrals on C^d via Schwinger
parameters.

Subpackage map:
  graphs       decorated directed multigraphs, subgraph algebra, Laman tests
  symbolic     exact polynomial / rational function / exterior algebra
  graphpoly    Kirchhoff polynomial, weighted Laplacian, M^-1, d^-1, corners
  charts       compactified Schwinger space charts and sphere quadrature
  amplitude    kernels, Gaussian (Wick) reduction, W evaluation, MC oracle
  anomaly      boundary anomaly operators and quadratic relations
  cli          command line workbench
"""

__version__ = "0.1.0"
