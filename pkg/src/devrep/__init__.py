"""Contributor reputation from repository collaboration networks.

Builds a weighted developer network out of commit and review history,
scores contributors with five centrality measures aggregated into a [0, 1]
reputation rating, and relates the measures to dependency review levels
with a random-intercept mixed model.
"""

from .centrality import (
    CentralityConfig,
    CentralityTable,
    betweenness_centrality,
    centrality_table,
    closeness_centrality,
    degree_centrality,
    eigenvector_centrality,
    pagerank,
)
from .errors import (
    ConvergenceError,
    CorruptInputError,
    DevrepError,
    InputError,
    SamplingError,
    StaleArtifactError,
    ValidationError,
)
from .events import (
    Actor,
    CommitEvent,
    EventLog,
    RejectedPrEvent,
    ReviewStatus,
    classify_review_status,
    filter_actors_and_window,
    parse_event_log,
    reviewed_fraction,
    serialize_event_log,
)
from .graphstats import (
    CommunityPartition,
    StructuralSummary,
    louvain,
    modularity,
    structural_summary,
)
from .lmm import (
    AnovaTable,
    LmmFit,
    ModelFrame,
    R2Report,
    VifReport,
    anova_table,
    fit_random_intercept,
    nakagawa_r2,
    predict_curve,
    prepare_design,
    reml_criterion,
    variance_screen,
    vif_screen,
)
from .network import (
    DeveloperNetwork,
    EdgeWeights,
    build_network,
    coedition_events,
    export_graph,
    parse_edge_csv,
    parse_graphml,
    review_events,
)
from .reputation import (
    BadgePolicy,
    ReputationScore,
    SamplePlan,
    aggregate_score,
    assign_badges,
    eligible_respondents,
    minmax_normalize,
    stratified_sample,
)
from .statkit import (
    ChiSquaredResult,
    ContingencyTable,
    ReliabilityData,
    chi_squared_independence,
    krippendorff_alpha,
)
from .synth import (
    SynthNetworkSpec,
    SynthResponseSpec,
    generate_network,
    synth_responses,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
