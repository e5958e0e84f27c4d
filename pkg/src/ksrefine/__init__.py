"""Refined trace statistics for curve families over small prime fields.

Exact symplectic tensor multiplicities, Weyl-measure trace densities and their
slice quadrature, weighted point-count censuses of hyperelliptic and elliptic
curves, imaginary quadratic class number tools, and a reporting CLI that lines
the two sides up against each other.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import BudgetExceededError, DomainError, IngestError, QuadratureError
from .symplectic import (
    MultiplicityTable,
    Partition,
    TrendReport,
    a_n,
    b_n,
    bn_root_trend,
    c2_n,
    multiplicity,
    multiplicity_table,
    tensor_step,
    weyl_dimension,
)
from .quadrature import (
    DensitySample,
    GaussianPolyFit,
    MomentEstimate,
    WeylIntegrand,
    density_profile,
    fit_gaussian_poly,
    moment_by_quadrature,
    nu_lim_reference,
    refined_moment_prediction,
    vlim_reference,
    weyl_density,
)
from .census import (
    ParityReport,
    PrimeField,
    TraceHistogram,
    elliptic_census,
    empirical_Sn,
    hyperelliptic_census,
    nolimit_bounds,
    parity_report,
    root_count_table,
    signed_asymmetry,
)
from .classnumbers import (
    AnomalyCertificate,
    DeuringReport,
    QuadDiscriminant,
    SearchBudget,
    WeilNumberState,
    class_number_forms,
    deuring_check,
    find_anomalous_trace,
    kronecker_H,
)
from .reports import (
    AsymmetryRow,
    ComparisonRow,
    emit_asymmetry,
    emit_comparison,
    ingest_external,
    read_histogram_csv,
    write_histogram_csv,
)
from .cli import run_cli

__all__ = [
    "__version__",
    # errors
    "DomainError",
    "QuadratureError",
    "BudgetExceededError",
    "IngestError",
    # symplectic
    "Partition",
    "MultiplicityTable",
    "TrendReport",
    "tensor_step",
    "multiplicity_table",
    "multiplicity",
    "a_n",
    "b_n",
    "c2_n",
    "weyl_dimension",
    "bn_root_trend",
    # quadrature
    "WeylIntegrand",
    "MomentEstimate",
    "DensitySample",
    "GaussianPolyFit",
    "weyl_density",
    "moment_by_quadrature",
    "density_profile",
    "fit_gaussian_poly",
    "nu_lim_reference",
    "vlim_reference",
    "refined_moment_prediction",
    # census
    "PrimeField",
    "TraceHistogram",
    "ParityReport",
    "hyperelliptic_census",
    "elliptic_census",
    "parity_report",
    "nolimit_bounds",
    "empirical_Sn",
    "signed_asymmetry",
    "root_count_table",
    # class numbers
    "QuadDiscriminant",
    "WeilNumberState",
    "SearchBudget",
    "DeuringReport",
    "AnomalyCertificate",
    "class_number_forms",
    "kronecker_H",
    "deuring_check",
    "find_anomalous_trace",
    # reports
    "ComparisonRow",
    "AsymmetryRow",
    "emit_comparison",
    "emit_asymmetry",
    "ingest_external",
    "read_histogram_csv",
    "write_histogram_csv",
    "run_cli",
]
