"""Segmentation challenge evaluation: metrics, ranking, stability."""

try:
    from segrank._core import (  # noqa: F401
        EngineError,
        boxplot_stats,
        dice,
        evaluate_case,
        kendall_tau,
        load_volume,
        nsd,
        rank_from_scores,
        rank_table,
        wilcoxon,
        write_volume,
    )
except ImportError:
    # In-tree layout: the extension sits next to this package on sys.path.
    from _core import (  # noqa: F401
        EngineError,
        boxplot_stats,
        dice,
        evaluate_case,
        kendall_tau,
        load_volume,
        nsd,
        rank_from_scores,
        rank_table,
        wilcoxon,
        write_volume,
    )

__all__ = [
    "EngineError",
    "boxplot_stats",
    "dice",
    "evaluate_case",
    "kendall_tau",
    "load_volume",
    "nsd",
    "rank_from_scores",
    "rank_table",
    "wilcoxon",
    "write_volume",
]
