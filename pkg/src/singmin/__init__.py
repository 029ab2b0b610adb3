"""Singular minimization constants for the p-Laplacian on 2-D domains.

Computes the limit constant mu(Omega) of the sublinear Rayleigh quotients
lambda_q(Omega)|Omega|^(p/q) by three independent routes (q-sweep
extrapolation, direct log-quotient minimization, and inversion of the
singular Dirichlet problem), together with a high-accuracy radial oracle
and a verification suite for the closed-form identities involved.
"""

__version__ = "0.1.0"

from .geometry import GridDomain, ShapeSpec, make_domain, scale_domain, schwarz_radius, cone_field
from .field_ops import ScalarField, MeanValue, p_energy, q_mean, log_mean, quotient_q, quotient_log, energy_J, sup_norm
from .plap_solver import SolverConfig, MinimizerResult, solve_torsion, minimize_lambda_q, minimize_mu, solve_singular, rescale_to_lambda, mu_from_singular
from .radial_oracle import RadialSolution, radial_lambda_q, radial_eigen_p, radial_singular
