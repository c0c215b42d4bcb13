"""Local/global canonical heights and reduction data for elliptic curves
over Q, plus a verification harness for the explicit torsion and height
bounds the library is built around."""

from .exactnum import Factorization, Rational, UnfactoredPart, ZeroInput, factorize, valuation
from .weierstrass import (
    INFINITY,
    CurvePoint,
    ModelTransform,
    WeierstrassModel,
    add_points,
    compute_invariants,
    minimal_model,
    naive_x_height,
    scalar_mul,
)
from .localdata import (
    GlobalReductionData,
    LocalReductionData,
    global_data,
    split_multiplicative_test,
    szpiro_ratio,
    tate_local,
)
from .heights import (
    HeightConfig,
    TorusPoint,
    arch_local_height,
    b2_periodic,
    canonical_height,
    component_fraction,
    doubling_oracle,
    height_disc_sum,
    ij_decomposition,
    j_tau,
    lambda_sum,
    nonarch_local_height,
    torus_neron,
)
from .torsion import TorsionSubgroup, point_count_mod_p, torsion_subgroup
from .bounds import (
    BoundInputs,
    BoundReport,
    CONSTANTS,
    PaperConstants,
    lang_constant,
    small_height_threshold,
    tlem_bound,
    tlem_brute,
    torsion_bound,
)
from .harness import CurveRecord, RunConfig, parse_curve_file, run_suite

__version__ = "0.1.0"
