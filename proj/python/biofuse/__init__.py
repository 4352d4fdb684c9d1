# SPDX-License-Identifier: Apache-2.0
"""Bimodal biometric feature extraction and fusion.

Thin re-export of the compiled extension; see the functions' docstrings for
the array conventions (images are 2-D uint8/uint16, vectors 1-D float64).
"""

from ._biofuse import (  # noqa: F401
    ConfigError,
    DataError,
    IoError,
    PcaModel,
    TemplateStore,
    __version__,
    equal_error_rate,
    equalize,
    extract_features,
    fit_pca,
    fit_whitening,
    fuse,
    gabor_kernel,
    mahalanobis_distance,
    roc_sweep,
    tanh_normalize,
    whiten,
)
