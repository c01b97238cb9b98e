"""Optimal recovery from point samples by over-parameterized penalized least squares."""
from ._backend import kernels as _kernels
from .chebyshev import (Ball, Box, GeometricSet, Segment, inflated_radius, inflated_radius_curve, inflated_set,
                        min_enclosing_ball, slice_radius, toy_slice)
from .errors import (DegenerateCertificate, DomainError, InvalidArgument, NumericalFailure, OptrecError,
                     UnsupportedParameter)
from .losses import LossProblem, LossSpec, loss_subgradient, loss_value
from .measurements import (DataSample, NoiseVector, add_noise, apply_point_measurements, empirical_norm, mesh_gap,
                           nested_sites)
from .modelclass import FiniteModelClass, SobolevBall, dist_to_finite_class, sobolev_norm, two_constant_class
from .optimize import (Certificate, OptimizerConfig, RecoveryResult, minimize, near_optimality_certificate,
                       schedule_parameters)
from .splinespace import (FunctionOracle, PiecewiseLinear, SplineSpace, evaluate, interpolate, l2_distance,
                          lp_norm, make_merged_space, make_uniform_space, oracle_from_id, quarter_sqrt,
                          sobolev_seminorm, sup_distance)

BACKEND = _kernels.NAME

__all__ = [name for name in dir() if not name.startswith("_")]
