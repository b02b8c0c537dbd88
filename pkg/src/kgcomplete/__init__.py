"""Class size and completeness estimation for collaborative knowledge graphs.

Edits are resolved to per-class mentions, mentions are bucketed into sample
periods, and capture-recapture estimators turn the resulting
frequency-of-frequencies histograms into class size estimates.
"""
__version__ = "0.1.0"

from ._core import BACKEND
from .estimators import (
    DEFAULT_METHODS,
    Estimate,
    Method,
    chao92,
    estimate_all,
    gamma_squared,
    jack1,
    jack2,
    n1_unif,
    sample_coverage,
    sor,
)
from .metrics import EstimateSeries, phi_error, rank_by_convergence, rho_convergence
from .observations import (
    FrequencyHistogram,
    Mention,
    PeriodizedObservations,
    bucket_mentions,
    histogram_at,
    series_histograms,
)
from .ontology import (
    CompositeClassSpec,
    EditRecord,
    OntologyIndex,
    build_index,
    classes_of,
    members_of_composite,
    resolve_edits,
)
from .simulator import ScenarioSpec, make_population, naive_frequency_count, simulate

__all__ = [
    "BACKEND",
    "DEFAULT_METHODS",
    "CompositeClassSpec",
    "EditRecord",
    "Estimate",
    "EstimateSeries",
    "FrequencyHistogram",
    "Mention",
    "Method",
    "OntologyIndex",
    "PeriodizedObservations",
    "ScenarioSpec",
    "bucket_mentions",
    "build_index",
    "chao92",
    "classes_of",
    "estimate_all",
    "gamma_squared",
    "histogram_at",
    "jack1",
    "jack2",
    "make_population",
    "members_of_composite",
    "n1_unif",
    "naive_frequency_count",
    "phi_error",
    "rank_by_convergence",
    "resolve_edits",
    "rho_convergence",
    "sample_coverage",
    "series_histograms",
    "simulate",
    "sor",
]
