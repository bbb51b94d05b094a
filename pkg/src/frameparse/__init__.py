"""Knowledge-graph-guided incremental frame-semantic parser."""

from .data import (Corpus, CorpusError, load_corpus, serialize_corpus,
                   validate_instance)
from .decoder import ParseResult, decode_structure
from .evaluation import (MetricReport, arg_prf, evaluate_corpus,
                         frame_accuracy, full_structure_prf,
                         make_fewshot_split, match_arguments)
from .knowledge import KnowledgeGraphEncoder, NodeEmbeddingTable
from .model import FrameSemanticParser, ModelConfig
from .ontology import (FKG_RELATIONS, FrameKnowledgeGraph, FrameOntology,
                       OntologyError, build_fkg, candidate_frames,
                       candidate_roles, load_ontology)
from .sentence import SentenceEncoder, SentenceInstance, Vocabulary
from .synthetic import SyntheticSpec, build_synthetic, generate_synthetic
from .training import (Checkpoint, CheckpointError, TrainConfig,
                       TrainingError, compute_loss, gradient_check,
                       load_checkpoint, model_from_checkpoint,
                       save_checkpoint, train, training_step)

__version__ = "0.1.0"

__all__ = [
    "Corpus", "CorpusError", "load_corpus", "serialize_corpus",
    "validate_instance", "ParseResult", "decode_structure", "MetricReport",
    "arg_prf", "evaluate_corpus", "frame_accuracy", "full_structure_prf",
    "make_fewshot_split", "match_arguments", "KnowledgeGraphEncoder",
    "NodeEmbeddingTable", "FrameSemanticParser", "ModelConfig",
    "FKG_RELATIONS", "FrameKnowledgeGraph", "FrameOntology", "OntologyError",
    "build_fkg", "candidate_frames", "candidate_roles", "load_ontology",
    "SentenceEncoder", "SentenceInstance", "Vocabulary", "SyntheticSpec",
    "build_synthetic", "generate_synthetic", "Checkpoint", "CheckpointError",
    "TrainConfig", "TrainingError", "compute_loss", "gradient_check",
    "load_checkpoint", "model_from_checkpoint", "save_checkpoint", "train",
    "training_step",
]
