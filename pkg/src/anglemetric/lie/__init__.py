"""Graded nilpotent Lie algebras, their group law, gauges and ray comparisons."""

from .algebra import (AlgebraError, ConfigError, GradedLieAlgebra, abelian, bundled, free_class2_rank3,
                      free_class3_rank2, heisenberg3, heisenberg5, load_algebra, parse_algebra)
from .bch import bch_product, conjugate_expansion, expansion_constant, power, product
from .boundary import (CaseNotCovered, bracket_constant, coset_power_check, kfold_gauge_check,
                       inequality_check, proximity_power_check, s_plus_additive_exact, s_plus_mult_estimate,
                       sandwich_check)
from .gauge import Gauge, GaugeValue, SearchExhausted, dilate, gauge, rescale_norms, validate_scales
