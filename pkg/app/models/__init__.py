"""
Model components of the multi-modal recommender.
"""
from .graph_models import (
    InteractionGraph, GeneratedGraph, StackedOperator, build_normalized,
    propagate_user_from_item, propagate_item_from_user, propagate_layers, stacked_layer, sum_pooled,
)
from .diffusion_models import (
    NoiseSchedule, DenoiserModel, DiffusionBatch, build_schedule, q_sample, q_sample_chain,
    posterior_mean_var, p_mean, snr_weight, timestep_embedding, denoise_predict, make_diffusion_batch,
    elbo_loss, msi_loss, diffusion_loss, diffusion_train_step, infer_interactions, select_topk, rebuild_topk_graph,
    generate_modality_graph,
)
from .modality_models import (
    ModalityFeatures, FeatureAligner, ModalityViewEmbeddings, align_features,
    modality_view_base, modality_view_base_backward, modality_view_highorder, modality_view_highorder_backward,
)
from .fusion_models import (
    ModalityWeights, FusedEmbeddings, modal_representation, modal_representation_backward,
    fuse_modalities, fuse_modalities_backward, final_embeddings, final_embeddings_backward,
    predict_scores, pair_scores, iter_score_blocks,
)
from .ssl_models import ContrastiveConfig, infonce, cl_loss
from .recommender import MultiModalRecommender

__all__ = [
    'InteractionGraph', 'GeneratedGraph', 'StackedOperator', 'build_normalized',
    'propagate_user_from_item', 'propagate_item_from_user', 'propagate_layers', 'stacked_layer', 'sum_pooled',
    'NoiseSchedule', 'DenoiserModel', 'DiffusionBatch', 'build_schedule', 'q_sample', 'q_sample_chain',
    'posterior_mean_var', 'p_mean', 'snr_weight', 'timestep_embedding', 'denoise_predict',
    'make_diffusion_batch', 'elbo_loss', 'msi_loss', 'diffusion_loss', 'diffusion_train_step', 'infer_interactions',
    'select_topk', 'rebuild_topk_graph', 'generate_modality_graph',
    'ModalityFeatures', 'FeatureAligner', 'ModalityViewEmbeddings', 'align_features',
    'modality_view_base', 'modality_view_base_backward', 'modality_view_highorder',
    'modality_view_highorder_backward',
    'ModalityWeights', 'FusedEmbeddings', 'modal_representation', 'modal_representation_backward',
    'fuse_modalities', 'fuse_modalities_backward', 'final_embeddings', 'final_embeddings_backward',
    'predict_scores', 'pair_scores', 'iter_score_blocks',
    'ContrastiveConfig', 'infonce', 'cl_loss',
    'MultiModalRecommender',
]
