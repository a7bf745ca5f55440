"""Engine and evaluation harness for scoring implicit-offense reasoning chains."""

from .chain_model import (
    Attribute,
    Category,
    KirSite,
    ReasoningChain,
    ReasoningStep,
    StepTag,
    Subcategory,
    ValidationResult,
    Violation,
    kir_sites,
    tag_frequencies,
    validate_chain,
)
from .dataset_io import (
    CorpusStats,
    corpus_stats,
    filter_by_length,
    load_corpus,
    sample_attributes,
    save_corpus,
)
from .engine import (
    ChainScoreReport,
    augment_knowledge,
    direct_score,
    fold_product,
    mul_chain,
    score_chain,
    transition_scores,
)
from .backends import (
    EntailmentScores,
    HashBackend,
    LexiconBackend,
    OtdScores,
    ProcessBackend,
    TcpBackend,
    batch_score,
    parse_backend_spec,
    score_entailment,
    score_otd,
)

__version__ = "0.1.0"

__all__ = [
    "Attribute",
    "Category",
    "KirSite",
    "ReasoningChain",
    "ReasoningStep",
    "StepTag",
    "Subcategory",
    "ValidationResult",
    "Violation",
    "kir_sites",
    "tag_frequencies",
    "validate_chain",
    "CorpusStats",
    "corpus_stats",
    "filter_by_length",
    "load_corpus",
    "sample_attributes",
    "save_corpus",
    "ChainScoreReport",
    "augment_knowledge",
    "direct_score",
    "fold_product",
    "mul_chain",
    "score_chain",
    "transition_scores",
    "EntailmentScores",
    "HashBackend",
    "LexiconBackend",
    "OtdScores",
    "ProcessBackend",
    "TcpBackend",
    "batch_score",
    "parse_backend_spec",
    "score_entailment",
    "score_otd",
    "__version__",
]
