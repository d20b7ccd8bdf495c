"""Induction-motor models, integration and the identification fitness."""
from .model import FLUX, STATESPACE, flux_derivatives, statespace_coefficients, statespace_derivatives
from .park import park_forward, park_inverse
from .params import PARAM_MAX, PARAM_MIN, PARAM_NAMES, TRUE_VECTOR, MotorParams, MotorState, SupplyWaveform
from .rk45 import DenseSolution, IntegrationError, StepUnderflowError, integrate_rk45
from .sim import (IdentificationProblem, Reference, identification_fitness, make_reference,
                  percent_deviation, read_reference_csv, simulate_startup, write_reference_csv)
