"""Bernoulli decompositions of real random variables, probabilistic Sperner
bounds for antichains, and anti-concentration checks built on them."""

from .errors import PacmanError
from .measure import ProbabilityMeasure, cdf, quantile, sample
from .decomposition import (
    BernoulliDecomposition,
    Variant,
    beta_plus_by_F,
    beta_plus_by_inf,
    chasing,
    colliding,
    decompose,
    find_positive_p,
    gap_report,
)
from .antichain import Antichain, BernoulliProfile, antichain_probability, max_weight_antichain
from .concentration import MarginAssumption, MonotoneGapFunction, monte_carlo_report, theorem_bound
from .lattice import SingleSiteProfile, split_potential, verify_split

__version__ = "0.1.0"
