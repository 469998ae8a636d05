"""Finite element toolkit for the scalar Signorini problem in 2D.

Solves the boundary-obstacle problem (Poisson equation with a unilateral
constraint u >= chi on a contact part of the boundary) with nonconforming
Crouzeix-Raviart elements, recovers the dual Raviart-Thomas flux by a
closed-form Marini-type reconstruction, and evaluates primal-dual gap error
identities that drive uniform and adaptive (Doerfler + red-green-blue) mesh
refinement studies.

Modules
-------
mesh         triangulations, boundary labels, red and red-green-blue refinement
spaces       CR / RT elements, projections, discrete gradient, quasi-interpolants
system       problem data, assembly, energies, admissibility checks
pdas         primal-dual active set (semi-smooth Newton) solver
oracle       brute-force active-set enumeration for small instances
duality      flux reconstruction, lifting, gap estimators, error measures
manufactured square-spline benchmark with known exact solution, EOC helper
adaptivity   conforming post-processing, Doerfler marking, AFEM driver
cli          command line front end (apriori / adaptive / solve / verify)
"""

__version__ = "0.1.0"
