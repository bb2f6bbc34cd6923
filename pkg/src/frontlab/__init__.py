"""Traveling fronts of bistable reaction-diffusion equations with relaxation.

Submodules: model (reaction, damping, hypotheses), profile (speed and profile
by shooting), spectrum (essential spectrum and gap), evans (Evans function and
winding counts), resolvent (discrete resolvent bounds for stationary fronts),
timestepper (direct PDE integration) and cli.
"""
from .model import ModelSpec, cubic_model, validate_hypotheses
from .profile import FrontProfile, compute_front, find_gamma_star

__all__ = ["ModelSpec", "cubic_model", "validate_hypotheses", "FrontProfile", "compute_front",
           "find_gamma_star"]
__version__ = "0.1.0"
