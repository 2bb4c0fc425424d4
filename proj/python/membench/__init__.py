"""Python bindings for the membench benchmark harness."""

from ._core import (
    MembenchError,
    classify_difficulty,
    extract_reply,
    format_percent,
    irr_percentage,
    load_suite,
    max_rounds,
    max_tokens,
    render_prompt,
    report,
    reprocess,
    run,
    score_confusion,
    suite_stats,
)

__all__ = [
    "MembenchError",
    "classify_difficulty",
    "extract_reply",
    "format_percent",
    "irr_percentage",
    "load_suite",
    "max_rounds",
    "max_tokens",
    "render_prompt",
    "report",
    "reprocess",
    "run",
    "score_confusion",
    "suite_stats",
]
