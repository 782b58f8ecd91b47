"""Finite models of group actions on compact spaces.

Build and check finite approximations (witnesses) of actions, decide chain
recurrence, compressibility, paradoxicality and invariant-measure existence
at a bounded resolution, and run the matrix rounding procedures with their
error bounds checked at run time.
"""
from .core import (DiscreteMeasure, FiniteAction, TestFunction, Witness, check_witness,
                   empirical_measure, merge_local_witnesses, ucp_defects)
from .errors import ResfinError
from .matrix import (berg_projection, cut_projection, encode_action, extract_finite_action,
                     match_permutation, orthogonalize_family, polar_unitary, round_to_projection)
from .measures import affine_lift, barycentre, fixed_point_model, measure_to_model, product_measure
from .paradox import (decide_paradoxical, equidecompose, invariant_measure_lp, verify_certificate)
from .symbolic import (algebraic_fixed_points, algebraic_model_witness, bernoulli_model,
                       smith_normal_form)
from .systems import (AlgebraicSystem, BoundaryPoint, BoundarySystem, CompactifiedZ, FiniteSample,
                      PeriodicPoint, PolytopeSystem, QuotientConfig, ShiftSystem)
from .words import FiniteQuotient
from .zsystems import (chain_recurrent_set, find_compressible_clopen, model_from_chains,
                       recurrence_scan)

__version__ = "0.1.0"
