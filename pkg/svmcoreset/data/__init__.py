# ========================================================= #
from .dataset import (
    LabeledPoint,
    Hyperplane,
    WeightedDataset,
    as_vector,
    embed_bias,
    standardize,
    fit_scaler,
    split_by_label,
    signed_vector,
)
from .io import LABEL_TOKENS, load_csv, export_csv, write_metadata, iter_csv_chunks, running_moments, running_scaler

# ========================================================= #
