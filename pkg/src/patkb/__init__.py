"""Knowledge-base indicators over patent citation corpora.

Computes analyticity (science dependence, science dependence fraction,
university fraction), cumulativeness (internal dependence, internal
dependence fraction, relative internal dependence) and knowledge mobility
(inter-patent distance, reference distance) for technologies defined by CPC
prefixes, plus the binned analyses, fits, correlation matrices, grid maps
and country rankings built on them.
"""

from ._kernels import BACKEND, EARTH_RADIUS_KM
from .citegraph import (
    CitationGraph,
    ReferenceScope,
    ScopeKind,
    build_graph,
    internal_reference_count,
)
from .corpus import (
    Corpus,
    CorpusError,
    JurisdictionRule,
    Location,
    Office,
    PatentRecord,
    RecordError,
    TechnologyDef,
    cpc_group,
    default_europe_set,
    default_technology_defs,
    jurisdiction_filter,
    match_technology,
    normalize_cpc,
    parse_corpus,
    serialize_corpus,
    serialize_record,
    technology_members,
)
from .geo import (
    GeoPoint,
    GridCounts,
    IpdEstimate,
    MobilityResult,
    country_ranking,
    grid_counts,
    haversine_km,
    inter_patent_distance,
    patent_point,
    reference_distance_patent,
    reference_distance_technology,
)
from .indicators import (
    IndicatorRow,
    IndicatorTable,
    idf_patent,
    idf_technology,
    internal_dependence,
    relative_internal_dependence,
    science_dependence,
    sdf_patent,
    sdf_technology,
    technology_indicator_table,
    university_fraction,
)
from .stats import (
    BinSeries,
    CorrelationMatrix,
    FitKind,
    FitResult,
    PearsonResult,
    RegressionResult,
    bin_response,
    constant_bins,
    correlation_matrix,
    exponential_bins,
    fit,
    pearson_test,
    regress,
)
from .synth import ClusterSpec, GeneratorConfig, generate_synthetic

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
