"""Twisted elliptic-curve central values at desk scale.

Enumerate primitive Dirichlet characters of fixed order, evaluate the
twisted central L-values and their algebraic parts, accumulate the
small-norm statistics, and compare against the closed-form growth model.
"""

__version__ = "0.1.0"

from .characters import (
    CharacterCountReport,
    PrimitiveCharacter,
    count_characters,
    enumerate_characters,
    galois_orbit,
    gauss_sum,
    local_count,
)
from .curve import CoefficientTable, CurveData, coefficient_table, fixture, load_curve, real_period
from .lvalue import (
    TwistRecord,
    algebraic_part,
    alpha_and_norm,
    central_value,
    dataset_gcd_normalize,
    evaluate_orbit,
    lambda_select,
)
from .model import (
    ModelParams,
    RegionSpec,
    brauer_siegel_quotient,
    comparator,
    predicted_count,
    prob_small,
    taylor_exp_poly,
    volume_ratio,
)
from .stats import StatConfig, StatSeries, accumulate, norm_form_representable, ratio_series
from .store import ResultStore, SweepManifest
from .sweep import run_sweep, verify_store
