"""Generalized Orlicz-Morrey spaces: Young functions, sampled norms, Riesz-type operators and condition checkers."""

from .conditions import (ConditionReport, cianchi_conditions, integrability_near_zero, power_model,
                         spanne_exponent_check, zygmund_condition)
from .field import Ball, BallFamily, Grid, SampledFunction, load_field, make_ball_family, save_field, uniform_grid
from .norms import (bmo_norm, bmo_orlicz_functional, generalized_orlicz_morrey_norm, luxemburg_norm,
                    orlicz_morrey_lambda_norm, weak_orlicz_norm, weight_from_spec)
from .operators import (RieszConfig, commutator, fractional_maximal, hardy, hardy_best_constant, hardy_star,
                        riesz_potential, verify_hardy)
from .verdict import FAILS, HOLDS, INCONCLUSIVE, Verdict
from .young import (ConstructionError, YoungFunction, cianchi_construct, cianchi_psi_p, delta2_test, from_spec,
                    nabla2_test, sobolev_conjugate)

__version__ = "0.1.0"
