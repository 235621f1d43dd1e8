from classify.crossval import CvPlan, CvResult, cross_validate, kfold_select, make_folds
from classify.experiment import STRATEGIES, ComparisonResult, RegimeSettings, regime_settings, render_table, run_pooling_comparison
from classify.features import (
    POOL_METHODS,
    FilterBank,
    default_filter_bank,
    extract_features,
    pool_tensor,
    profile_features,
    tensor_profile,
)
from classify.svm import SvmModel, accuracy, svm_predict, svm_train

__all__ = [
    "POOL_METHODS",
    "STRATEGIES",
    "ComparisonResult",
    "RegimeSettings",
    "CvPlan",
    "CvResult",
    "FilterBank",
    "SvmModel",
    "accuracy",
    "cross_validate",
    "default_filter_bank",
    "extract_features",
    "kfold_select",
    "make_folds",
    "pool_tensor",
    "profile_features",
    "regime_settings",
    "render_table",
    "run_pooling_comparison",
    "svm_predict",
    "svm_train",
    "tensor_profile",
]
