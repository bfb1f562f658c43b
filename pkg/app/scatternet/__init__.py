"""Front-end ScatterNet : DTCWT et diffusion à log paramétrique"""
from app.scatternet.filters import DtcwtFilterBank, build_filter_bank
from app.scatternet.transform import (
    ComplexSubband,
    DtcwtPyramid,
    GrayImage,
    ScatterFeatures,
    calibrate_log_offsets,
    complex_modulus,
    dtcwt_forward,
    dtcwt_inverse,
    export_features,
    first_layer_envelopes,
    joint_invariance,
    load_features,
    local_average,
    parametric_log,
    resample_image,
    save_log_offsets,
    scatter,
    second_layer,
    second_layer_envelopes,
)

__all__ = [
    "DtcwtFilterBank",
    "build_filter_bank",
    "ComplexSubband",
    "DtcwtPyramid",
    "GrayImage",
    "ScatterFeatures",
    "calibrate_log_offsets",
    "complex_modulus",
    "dtcwt_forward",
    "dtcwt_inverse",
    "export_features",
    "first_layer_envelopes",
    "joint_invariance",
    "load_features",
    "local_average",
    "parametric_log",
    "resample_image",
    "save_log_offsets",
    "scatter",
    "second_layer",
    "second_layer_envelopes",
]
