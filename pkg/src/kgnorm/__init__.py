"""Identifier cliques, normalization, name lookup and knowledge-graph merging."""

__version__ = "0.1.0"

from .model import Clique, ConflationPolicy, ConflationSet, Curie, parse_curie  # noqa: E402

__all__ = ["Clique", "ConflationPolicy", "ConflationSet", "Curie", "__version__", "parse_curie"]
