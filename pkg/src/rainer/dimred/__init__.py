"""PCA and t-SNE."""

from .pca import (
    PcaModel,
    PcaScores,
    jacobi_eigh,
    pca_fit,
    pca_loadings_report,
    pca_transform,
    scree_table,
)
from .tsne import (
    TsneConfig,
    TsneEmbedding,
    conditional_affinities,
    joint_affinities,
    kl_divergence,
    student_t_affinities,
    tsne_affinities,
    tsne_embed,
    tsne_objective,
)

__all__ = [
    "PcaModel", "PcaScores", "jacobi_eigh", "pca_fit", "pca_loadings_report",
    "pca_transform", "scree_table", "TsneConfig", "TsneEmbedding",
    "conditional_affinities", "joint_affinities", "kl_divergence",
    "student_t_affinities", "tsne_affinities", "tsne_embed", "tsne_objective",
]
