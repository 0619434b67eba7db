"""Hopf bifurcation analysis of a p53-mdm2 model with a uniformly distributed delay."""

from .equilibrium import Equilibrium, find_equilibrium
from .errors import ConfigError, HopfDDEError
from .model import DEMO_PARAMS, REFERENCE_PARAMS, ModelParams, State, hill, hill_derivs, linear_matrices
from .normalform import VARIANTS, EigenPair, NormalForm, eigenpair, normal_form
from .simulate import HistorySpec, Trajectory, classify_longterm, integrate, perturbed_history, tau_scan
from .stability import CharCoeffs, HopfPoint, char_coeffs, char_delta, find_hopf_points

__version__ = "0.1.0"

__all__ = [
    "CharCoeffs",
    "ConfigError",
    "DEMO_PARAMS",
    "EigenPair",
    "Equilibrium",
    "HistorySpec",
    "HopfDDEError",
    "HopfPoint",
    "ModelParams",
    "NormalForm",
    "REFERENCE_PARAMS",
    "State",
    "Trajectory",
    "VARIANTS",
    "char_coeffs",
    "char_delta",
    "classify_longterm",
    "eigenpair",
    "find_equilibrium",
    "find_hopf_points",
    "hill",
    "hill_derivs",
    "integrate",
    "linear_matrices",
    "normal_form",
    "perturbed_history",
    "tau_scan",
]
