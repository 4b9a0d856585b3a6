# ========================================================= #
import logging
from typing import Iterator, Optional, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from ..base import write_json
from .dataset import WeightedDataset, embed_bias

# ========================================================= #


# "0" and "-1" map to the negative class, "1" and "+1" to the positive one. Anything else is rejected
LABEL_TOKENS = {"-1": -1, "0": -1, "1": 1, "+1": 1}


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def _resolve_column(column: Union[int, str, None], columns: list, what: str) -> Optional[int]:
    if column is None:
        return None

    if isinstance(column, str) and not column.lstrip("+-").isdigit():
        if column not in columns:
            raise ValueError(f"Unknown {what} column name: ({column}). Available columns: {columns}")

        return columns.index(column)

    idx = int(column)

    if not -len(columns) <= idx < len(columns):
        raise ValueError(f"{what} column index {idx} is out of range for {len(columns)} columns")

    return idx % len(columns)


def _parse_frame(
    frame: pd.DataFrame,
    label_column,
    label_mapping: dict,
    weight_column,
    first_row: int,
) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray], list]:
    """
    Turns a frame of raw strings into (features, labels, weights). ``first_row`` is the 1-based data row number of the
    first frame row, used in error messages.
    """
    columns = [str(c) for c in frame.columns]
    label_idx = _resolve_column(label_column, columns, "label")
    weight_idx = _resolve_column(weight_column, columns, "weight")

    if weight_idx is not None and weight_idx == label_idx:
        raise ValueError("The label and the weight column must differ")

    values = frame.to_numpy(dtype=object)
    missing = pd.isna(frame).to_numpy() | (values == "")

    if missing.any():
        row, col = np.argwhere(missing)[0]
        raise ValueError(f"Row {first_row + row}, column {columns[col]}: missing value")

    feature_cols = [i for i in range(len(columns)) if i not in (label_idx, weight_idx)]

    if not feature_cols:
        raise ValueError("The file has no feature columns")

    def numeric(col_idx: int) -> np.ndarray:
        raw = values[:, col_idx]
        try:
            return raw.astype(np.float64)
        except ValueError:
            for row, token in enumerate(raw):
                try:
                    float(token)
                except ValueError:
                    raise ValueError(
                        f"Row {first_row + row}, column {columns[col_idx]}: cannot parse ({token}) as a number"
                    )
            raise

    features = np.column_stack([numeric(i) for i in feature_cols])
    bad = np.argwhere(~np.isfinite(features))

    if bad.size:
        row, col = bad[0]
        raise ValueError(f"Row {first_row + row}, column {columns[feature_cols[col]]}: non finite value")

    labels = np.empty(len(frame), dtype=np.int64)

    for row, token in enumerate(values[:, label_idx]):
        try:
            labels[row] = label_mapping[str(token).strip()]
        except KeyError:
            raise ValueError(
                f"Row {first_row + row}, column {columns[label_idx]}: unknown label token ({token}). "
                f"Accepted tokens: {sorted(label_mapping)}"
            )

    weights = None

    if weight_idx is not None:
        weights = numeric(weight_idx)

        if np.any(~np.isfinite(weights)) or np.any(weights < 0):
            row = int(np.flatnonzero(~(np.isfinite(weights) & (weights >= 0)))[0])
            raise ValueError(f"Row {first_row + row}, column {columns[weight_idx]}: weights must be finite and >= 0")

    return features, labels, weights, [columns[i] for i in feature_cols]


def _read_options(header: bool) -> dict:
    return dict(
        header=0 if header else None,
        sep=",",
        decimal=".",
        dtype=str,
        keep_default_na=False,
        skipinitialspace=True,
    )


# ========================================================= #


def load_csv(
    path,
    label_column: Union[int, str] = -1,
    label_mapping: Optional[dict] = None,
    header: bool = False,
    weight_column: Union[int, str, None] = None,
    standardized: bool = True,
) -> WeightedDataset:
    """
    Loads a labeled CSV file into a :class:`WeightedDataset`.

    :param path: the file to read
    :param label_column: index (negative allowed) or header name of the label column. Defaults to the last column
    :param label_mapping: token to label mapping. Defaults to ``0/-1 -> -1`` and ``1/+1 -> +1``
    :param header: whether the first line is a header row
    :param weight_column: optional index or name of a weight column. Weights default to 1
    :param standardized: standardize features (population std) before embedding the bias. Defaults to True
    :return: the data set. Its ``metadata`` records ``d``, ``n``, standardization constants and the label mapping
    """
    mapping = dict(LABEL_TOKENS if label_mapping is None else label_mapping)

    try:
        frame = pd.read_csv(path, **_read_options(header))
    except pd.errors.ParserError as e:
        raise ValueError(f"Malformed CSV file {path}: {e}")
    except pd.errors.EmptyDataError:
        raise ValueError(f"CSV file {path} is empty")

    features, labels, weights, feature_names = _parse_frame(frame, label_column, mapping, weight_column, 1)

    meta = {
        "source": str(path),
        "n": int(features.shape[0]),
        "d": int(features.shape[1]),
        "features": feature_names,
        "label_mapping": mapping,
        "weighted": weights is not None,
    }

    if standardized and features.shape[0] < 2:
        get_logger().warning("Standardization needs at least 2 rows, leaving features as they are")
        standardized = False

    ds = WeightedDataset.from_raw(features, labels, weights, standardized=standardized, metadata=meta)
    get_logger().info(f"Loaded {ds} from {path}")

    return ds


def export_csv(ds: WeightedDataset, path, header: bool = False, with_weights: Optional[bool] = None) -> None:
    """
    Writes the data set in the format read by :func:`load_csv`: raw features (bias removed), the label, and the
    weight column when weights are not all 1 (or when asked to). Floats are written with full round trip precision.

    :param ds: the data set
    :param path: target file
    :param header: write a header row
    :param with_weights: force the weight column on or off. By default it is written only for non unit weights
    """
    if with_weights is None:
        with_weights = bool(np.any(ds.u != 1.0))

    frame = pd.DataFrame(ds.X[:, :-1], columns=[f"x{i}" for i in range(ds.d)])
    frame["y"] = ds.y

    if with_weights:
        frame["u"] = ds.u

    frame.to_csv(path, index=False, header=header)


def write_metadata(ds: WeightedDataset, path) -> None:
    meta = dict(ds.metadata)
    meta.update({"n": ds.n, "d": ds.d, "U": ds.U})
    write_json(path, meta)


# ========================================================= #


def iter_csv_chunks(
    path,
    chunk_rows: int,
    label_column: Union[int, str] = -1,
    label_mapping: Optional[dict] = None,
    header: bool = False,
    weight_column: Union[int, str, None] = None,
    moments: Union[StandardScaler, Tuple[np.ndarray, np.ndarray], None] = None,
) -> Iterator[WeightedDataset]:
    """
    Reads the file in bounded chunks of ``chunk_rows`` rows. Point ids are stream positions.

    :param moments: a fitted scaler (see :func:`running_scaler`) or ``(mean, std)`` used to standardize every chunk
    :return: a generator of :class:`WeightedDataset` chunks
    """
    if chunk_rows < 1:
        raise ValueError(f"chunk_rows must be >= 1, got {chunk_rows}")

    mapping = dict(LABEL_TOKENS if label_mapping is None else label_mapping)
    offset = 0

    try:
        reader = pd.read_csv(path, chunksize=chunk_rows, **_read_options(header))

        for frame in reader:
            features, labels, weights, _ = _parse_frame(frame, label_column, mapping, weight_column, offset + 1)

            if moments is not None:
                features = standardize_like(features, moments)

            n = features.shape[0]
            yield WeightedDataset(embed_bias(features), labels, weights, ids=np.arange(offset, offset + n))
            offset += n

    except pd.errors.ParserError as e:
        raise ValueError(f"Malformed CSV file {path}: {e}")
    except pd.errors.EmptyDataError:
        raise ValueError(f"CSV file {path} is empty")


def running_scaler(
    path,
    chunk_rows: int = 65536,
    label_column: Union[int, str] = -1,
    header: bool = False,
    weight_column: Union[int, str, None] = None,
) -> StandardScaler:
    """
    One bounded memory pass fitting a :class:`~sklearn.preprocessing.StandardScaler` chunk by chunk with
    ``partial_fit``. The result matches a one shot fit on the whole file.
    """
    scaler = StandardScaler()

    for chunk in iter_csv_chunks(path, chunk_rows, label_column, None, header, weight_column):
        scaler.partial_fit(chunk.X[:, :-1])

    count = int(getattr(scaler, "n_samples_seen_", 0))

    if count < 2:
        raise ValueError(f"Standardization needs at least 2 rows, {path} has {count}")

    return scaler


def running_moments(
    path,
    chunk_rows: int = 65536,
    label_column: Union[int, str] = -1,
    header: bool = False,
    weight_column: Union[int, str, None] = None,
) -> Tuple[int, np.ndarray, np.ndarray]:
    """
    Per feature population mean and std of the file, see :func:`running_scaler`.

    :return: tuple ``(n, mean, std)``
    """
    scaler = running_scaler(path, chunk_rows, label_column, header, weight_column)

    return int(scaler.n_samples_seen_), scaler.mean_, np.sqrt(scaler.var_)


def standardize_like(raw, moments: Union[StandardScaler, Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    raw = np.asarray(raw, dtype=np.float64)

    if isinstance(moments, StandardScaler):
        return moments.transform(raw)

    mean, std = moments
    return (raw - mean) / np.where(std > 0, std, 1.0)


# ========================================================= #

if __name__ == "__main__":  # Tests
    print("Don't You Dare Running Lib Files Directly")
