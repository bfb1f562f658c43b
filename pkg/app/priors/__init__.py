"""Priors structurels : filtres PCA orthonormés pour initialiser L3-L6"""
from app.priors.assemble import assemble_priors, select_filters
from app.priors.pca import (
    PatchMatrix,
    PriorFilterSet,
    detect_checkerboard,
    learn_pca_filters,
    load_priors,
    orthonormality_error,
    reconstruction_error,
    sample_patches,
    save_priors,
)

__all__ = [
    "assemble_priors",
    "select_filters",
    "PatchMatrix",
    "PriorFilterSet",
    "detect_checkerboard",
    "learn_pca_filters",
    "load_priors",
    "orthonormality_error",
    "reconstruction_error",
    "sample_patches",
    "save_priors",
]
