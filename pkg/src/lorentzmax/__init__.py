"""Grid computations for the Hardy-Littlewood maximal operator on weighted
Lorentz spaces: the operator itself, rearrangements, layer-cake norms,
weight-class constants and numerical checks of the classical inequalities."""

__version__ = "0.1.0"

from .errors import DomainMismatch, EmptyFunction, InvalidArgument, LorentzMaxError
from .measure import (DIVERGENT, GridDomain, GridFunction, GridSet, PiecewiseTailWeight,
                      PowerWeight, WeightU, WeightW, is_divergent, measure_u, w_cumulative,
                      w_tail_integral)
from .maximal import CubeSpec, cube_average, level_set, maximal, maximal_fast, maximal_naive
from .rearrange import DecreasingStep, distribution, hardy, rearrangement
from .lorentz import LorentzParams, lambda_norm, lambda_norm_p, lambda_weak_norm, layers
from .classes import (CubeFamily, RaposoCertificate, a1_constant, ap_constant, bp_constant,
                      bpinf_constant, delta2_constant, raposo_exhaustive, raposo_ratio,
                      raposo_search)
from .verify import (EquivalenceReport, corollary_inclusion_check, equivalence_report,
                     lemma21_check, lemma22_check, opnorm_estimate, phi, prop24_integral,
                     riesz_sandwich)

__all__ = [name for name in dir() if not name.startswith("_")]
