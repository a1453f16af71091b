"""Normal spanning arborescences in digraphs.

Finite machinery (assistants, normality certificates, sensitive orders,
depth-first equivalence, the Jung-type construction) together with lazily
presented infinite digraph families on which end-faithfulness and horizon
reflection are checked at finite truncation depth.
"""

from .digraph import (
    Digraph,
    DirectedPath,
    SCCPartition,
    DigraphError,
    LoopEdge,
    DuplicateEdge,
    UnknownVertex,
    load_digraph,
    digraph_to_json,
    digraph_to_json_dict,
    digraph_to_dot,
    strong_components,
    find_path,
)
from .arborescence import (
    Arborescence,
    NormalAssistant,
    LinearExtension,
    CycleCertificate,
    NormalityResult,
    Violation,
    LevelReport,
    NotAnArborescence,
    NotNormalError,
    VertexNotInTree,
    tree_query,
    normal_assistant,
    check_normal,
    is_normal,
    normalize_cycle,
    sensitive_order_build,
    check_sensitive,
    is_sensitive,
    dfs_build,
    is_dfs_tree,
    separation_check,
    level_partition,
    load_arborescence,
    arborescence_to_json,
    arborescence_to_json_dict,
    tree_to_dot,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
