"""Parse, normalize, harmonize and merge source graphs."""

from .build import ArtifactStore, BuildResult, build_from_graphspec, emit_metadata
from .merge import merge_graphs, propagate_properties, restrict_to_existing
from .normalize import NormalizationOptions, OnUnresolvable, PredicateTable, harmonize_predicates, normalize_graph
from .parsers import parse_source, register_parser
from .records import EdgeMergeKey, EdgeRecord, NodeRecord
from .spec import GraphSpec, MergeStrategy, load_graphspec

__all__ = [
    "ArtifactStore",
    "BuildResult",
    "EdgeMergeKey",
    "EdgeRecord",
    "GraphSpec",
    "MergeStrategy",
    "NodeRecord",
    "NormalizationOptions",
    "OnUnresolvable",
    "PredicateTable",
    "build_from_graphspec",
    "emit_metadata",
    "harmonize_predicates",
    "load_graphspec",
    "merge_graphs",
    "normalize_graph",
    "parse_source",
    "propagate_properties",
    "register_parser",
    "restrict_to_existing",
]
