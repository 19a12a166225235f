"""Entanglement measures restricted to finite nets of product states."""

from .coherence import c_alpha_star, c_star, c_star_iterative
from .divergences import approximation_gap, eta0, relative_entropy, sandwiched_renyi
from .errors import DomainError, InfeasibleParameters, NumericalError, ParameterError, ValidationError
from .linalg import DensityMatrix, partial_trace, partial_transpose
from .measures import MeasureResult, e_alpha_star_D, e_star_D, exponent_curve
from .membership import MembershipVerdict, decide_membership, ppt_test
from .nets import ComplexNet, RealNet, basis_net, complex_net, real_net
from .solver import SolverConfig, minimize
from .states import rho_p_lambda_delta
from .witness import WitnessOperator, extract_witness, validate_witness

__version__ = "0.1.0"
