"""Complete, necessary and sufficient reasons for decision graph classifiers."""

from .core_logic import Formula, Literal, NnfGraph, Variable, Vocabulary
from .decision_graph import (DecisionGraph, Leaf, Test, Threshold, ThresholdTree, class_formula,
                             classify, complete_reason, discretize, map_instance, random_graph,
                             targeted_complete_reason, validate)
from .errors import (DgExplainError, EnumerationOverflow, EnumerationTimeout, InvalidTarget,
                     ModelFormatError, UnsupportedStructure, VocabularyError)
from .reasons import ReasonSet, congruent, iml, nr, prune, remove_subsumed, snr, sr, ssr, verify_contrastive

__version__ = "0.1.0"

__all__ = [
    "DecisionGraph", "DgExplainError", "EnumerationOverflow", "EnumerationTimeout", "Formula",
    "InvalidTarget", "Leaf", "Literal", "ModelFormatError", "NnfGraph", "ReasonSet", "Test",
    "Threshold", "ThresholdTree", "UnsupportedStructure", "Variable", "Vocabulary",
    "VocabularyError", "class_formula", "classify", "complete_reason", "congruent", "discretize",
    "iml", "map_instance", "nr", "prune", "random_graph", "remove_subsumed", "snr", "sr", "ssr",
    "targeted_complete_reason", "validate", "verify_contrastive",
]
