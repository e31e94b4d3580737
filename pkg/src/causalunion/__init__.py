"""causalunion: learn invariant and variant causal structure from multiple
interventional datasets over overlapping variable sets."""

from .graph import (
    ARROW,
    CIRCLE,
    TAIL,
    GraphError,
    MixedGraph,
    from_json,
    has_inducing_path,
    latent_project_dag,
    m_connected,
    m_separated,
    manipulate,
    marginalize_mag,
    smcm_to_mag,
    to_dot,
    to_json,
)

from .fci import FciResult, run_fci
from .pipeline import (
    Dataset,
    PipelineResult,
    SummaryGraph,
    combine_results,
    run_pipeline,
)
from .simulate import (
    GeneratedStudy,
    QualityReport,
    random_dag,
    sample_study,
    score_summary,
    write_study,
)
from .stats import FisherZTester, GSquaredTester, OracleTester

__all__ = [
    "Dataset",
    "FciResult",
    "FisherZTester",
    "GSquaredTester",
    "GeneratedStudy",
    "OracleTester",
    "PipelineResult",
    "QualityReport",
    "SummaryGraph",
    "combine_results",
    "random_dag",
    "run_fci",
    "run_pipeline",
    "sample_study",
    "score_summary",
    "write_study",
    "ARROW",
    "CIRCLE",
    "TAIL",
    "GraphError",
    "MixedGraph",
    "from_json",
    "has_inducing_path",
    "latent_project_dag",
    "m_connected",
    "m_separated",
    "manipulate",
    "marginalize_mag",
    "smcm_to_mag",
    "to_dot",
    "to_json",
]

__version__ = "0.1.0"
