"""Preferential-attachment estimation for author citation histories.

Pipeline: :mod:`~citeflow.corpus` parses a dump into a :class:`Corpus`,
:mod:`~citeflow.events` turns each author into an ordered
:class:`EventStream`, :mod:`~citeflow.likelihood` scores streams under the
preferential/uniform mixture, and :mod:`~citeflow.estimator` maximizes the
score over rho.  :mod:`~citeflow.synth` samples streams with known rho,
:mod:`~citeflow.simulator` runs the h-index self-citation experiment and
:mod:`~citeflow.report` bins everything for plotting.
"""

__version__ = "0.1.0"

from .corpus import (
    Corpus,
    IngestReport,
    PaperRecord,
    corpus_from_records,
    corpus_stats,
    ingest_dump,
    ingest_event_table,
    load_cache,
    save_cache,
    write_event_table,
)
from .estimator import (
    EstimationResult,
    estimate_aggregate,
    estimate_author,
    estimate_authors,
    maximize,
)
from .events import (
    Career,
    CitationEvent,
    EventStream,
    Kind,
    build_career,
    build_streams,
    career_start_cohort,
    citations_per_paper,
    extract_events,
    filter_authors,
    self_fraction,
)
from .likelihood import (
    KindFilter,
    LogLik,
    LogLikObjective,
    YearState,
    aggregate_loglik,
    author_loglik,
    event_probability,
    loglik_curve,
)
from .report import (
    BinnedStat,
    cohort_rho,
    rho_histogram,
    rho_vs_citability,
    self_fraction_stats,
)
from .simulator import (
    SimOutcome,
    SimVector,
    h_index,
    run_hindex_experiment,
    simulate_variant_a,
    simulate_variant_b,
)
from .synth import CohortProfile, SynthProfile, cohort_corpus, generate_cohort, generate_stream

__all__ = [
    "BinnedStat",
    "Career",
    "CitationEvent",
    "CohortProfile",
    "Corpus",
    "EstimationResult",
    "EventStream",
    "IngestReport",
    "Kind",
    "KindFilter",
    "LogLik",
    "LogLikObjective",
    "PaperRecord",
    "SimOutcome",
    "SimVector",
    "SynthProfile",
    "YearState",
    "aggregate_loglik",
    "author_loglik",
    "build_career",
    "build_streams",
    "career_start_cohort",
    "citations_per_paper",
    "cohort_corpus",
    "cohort_rho",
    "corpus_from_records",
    "corpus_stats",
    "estimate_aggregate",
    "estimate_author",
    "estimate_authors",
    "event_probability",
    "extract_events",
    "filter_authors",
    "generate_cohort",
    "generate_stream",
    "h_index",
    "ingest_dump",
    "ingest_event_table",
    "load_cache",
    "loglik_curve",
    "maximize",
    "rho_histogram",
    "rho_vs_citability",
    "run_hindex_experiment",
    "save_cache",
    "self_fraction",
    "self_fraction_stats",
    "simulate_variant_a",
    "simulate_variant_b",
    "write_event_table",
]
