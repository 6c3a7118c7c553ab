"""Face super-resolution with an identity-preserving triplet loss.

Images are (3, H, W) float64 arrays with values in [0, 1].
"""

from ._ftlgan import (
    ConfigError,
    DataError,
    DegenerateInput,
    Error,
    Extractor,
    Generator,
    InvalidArgument,
    LoadError,
    auc,
    build_resolution_sets,
    combined_loss,
    contrastive_loss,
    distance,
    dprime,
    main,
    make_synthetic_corpus,
    mse_loss,
    normalize,
    read_png,
    resample_methods,
    resize,
    roc,
    synthetic_degrade,
    triplet_loss,
    upsample,
    write_png,
)

__version__ = "0.1.0"
