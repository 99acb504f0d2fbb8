"""Argument structure construction tagging and per-text usage indices."""

from .indices import INDEX_NAMES, IndexConfig, IndexVector, compute_all, mattr
from .ingest import ConlluError, Document, Sentence, Token, parse_conllu, parse_conllu_file
from .norms import (
    ContingencyCells,
    NormTable,
    NormTableError,
    build_norms,
    contingency,
    load_norms,
    save_norms,
)
from .tagger import ASC_TYPES, AscToken, tag_document, tag_sentence

__version__ = "0.1.0"

__all__ = [
    "ASC_TYPES",
    "AscToken",
    "ConlluError",
    "ContingencyCells",
    "Document",
    "INDEX_NAMES",
    "IndexConfig",
    "IndexVector",
    "NormTable",
    "NormTableError",
    "Sentence",
    "Token",
    "build_norms",
    "compute_all",
    "contingency",
    "load_norms",
    "mattr",
    "parse_conllu",
    "parse_conllu_file",
    "save_norms",
    "tag_document",
    "tag_sentence",
    "__version__",
]
