from app.svm.kernel import gaussian_kernel, gram_matrix
from app.svm.multiclass import (
    LABEL_ORDER,
    SvmModel,
    confusion_matrix,
    fit_standardizer,
    load_svm,
    predict,
    save_svm,
    train_multiclass,
)
from app.svm.selection import CrossValidationReport, GridScore, cross_validate
from app.svm.smo import BinarySvm, decision_values, dual_objective, kkt_violations, train_binary

__all__ = [
    "BinarySvm",
    "CrossValidationReport",
    "GridScore",
    "LABEL_ORDER",
    "SvmModel",
    "confusion_matrix",
    "cross_validate",
    "decision_values",
    "dual_objective",
    "fit_standardizer",
    "gaussian_kernel",
    "gram_matrix",
    "kkt_violations",
    "load_svm",
    "predict",
    "save_svm",
    "train_binary",
    "train_multiclass",
]
