"""Coverage planning for leaky coaxial cable (LCX) installations."""

from .cable import CableLayout, CableRow, CableSpec, RadiatorChain, discretize, interpolate_cable_params
from .environment import Barrier, CoverageMap, Environment, Obstacle, grid_cells, lateral_distance
from .errors import CalibrationError, ConfigurationError, DomainError, LcxError, ParseError
from .kernels import BACKEND
from .linkbudget import Frequency, LinkBudgetParams, invert_for_coupling_loss, received_power
from .propagation import EngineConfig, compare_engines, simulate

__version__ = "0.1.0"
