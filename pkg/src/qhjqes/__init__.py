"""Residue-ledger derivation and numerical verification of quasi-exactly
solvable potential families.

The public surface re-exports the main entry points of each layer: the
series kernel, the potential families, the chart/ledger engine, the
algebraic-sector builder, the finite-difference oracle, and the momentum
pole census.
"""

from .engine import (
    BranchCandidate,
    BranchRuleError,
    ChartSpec,
    MatchingFailure,
    NonQESError,
    QuantizationLedger,
    RiccatiData,
    fixed_pole_residues,
    infinity_branch_candidates,
    infinity_expansion,
    qes_parameterize,
    quantization_ledger,
    riccati_in_chart,
    select_physical_branch,
)
from .families import Circular, Hyperbolic, PotentialFamily, RadialSextic, Sextic
from .oracle import Grid, OracleSpectrum, discretize, low_spectrum, refine
from .qmf import (
    CensusReport,
    PoleReport,
    QmfEvaluator,
    global_pole_count,
    infinity_order_check,
    qmf,
    quantization_check,
    residue_at_zero,
    zero_census,
)
from .series import (
    CircleContour,
    LaurentSeries,
    Polynomial,
    contour_integral,
    poly_roots,
    residue,
    series_derivative,
    series_product,
)
from .spectra import (
    AlgebraicState,
    GaugeSpec,
    RecursionMatrix,
    algebraic_spectrum,
    algebraic_states,
    eigenfunction,
    gauge_from_residues,
    moving_polynomial,
    recursion_matrix,
    schrodinger_residual,
)

__version__ = "0.1.0"
