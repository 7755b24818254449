"""Customer dynamics with regular and referral customers under a marketing policy."""
from .equilibrium import (Equilibrium, equilibria_general, equilibria_wom, equilibrium_no_referral,
                          equilibrium_static, find_equilibria)
from .integrate import IntegratorConfig, Trajectory, integrate, integrate_to_steady
from .model import (DerivedConstants, ModelParams, ReducedState, State, check_condition3,
                    derive_constants, rhs_full, rhs_reduced)
from .stability import StabilityReport, classify

__version__ = "0.1.0"
