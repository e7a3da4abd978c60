"""Python bindings for the ttmr text-to-music retrieval core."""

from ttmr._ttmr import (
    binary_auc,
    default_caption,
    info_nce,
    log_mel,
    lr_at_step,
    ndcg_at_k,
    render_metadata_text,
    render_similarity_text,
    run_pipeline,
    search_topk,
)

__all__ = [
    "binary_auc",
    "default_caption",
    "info_nce",
    "log_mel",
    "lr_at_step",
    "ndcg_at_k",
    "render_metadata_text",
    "render_similarity_text",
    "run_pipeline",
    "search_topk",
]
