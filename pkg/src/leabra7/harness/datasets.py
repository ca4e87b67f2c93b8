"""Builtin pattern sets and IRIS loading/encoding."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.stats import rankdata

IRIS_FEATURES = ("sepal_length", "sepal_width", "petal_length", "petal_width")


class DatasetError(ValueError):
    pass


@dataclass
class Dataset:
    """Input patterns ``X`` with target patterns ``Y``, row-aligned.

    ``train`` and ``test`` are row index arrays; by default every row is a
    training row.
    """
    X: np.ndarray
    Y: np.ndarray
    feature_names: Optional[List[str]] = None
    train: np.ndarray = field(default=None)
    test: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if len(self.X) != len(self.Y):
            raise DatasetError("X has {0} rows but Y has {1}".format(
                len(self.X), len(self.Y)))
        if self.train is None:
            self.train = np.arange(len(self.X))
        if self.test is None:
            self.test = np.arange(0)

    def __len__(self) -> int:
        return len(self.X)

    def split(self, test_frac: float, seed: Optional[int] = None) -> "Dataset":
        """Random train/test partition holding out ``test_frac`` of rows."""
        if not 0 <= test_frac < 1:
            raise DatasetError("test_frac must lie in [0, 1)")
        n_test = int(np.ceil(test_frac * len(self)))
        order = np.random.default_rng(seed).permutation(len(self))
        return Dataset(self.X, self.Y, self.feature_names,
                       train=np.sort(order[n_test:]),
                       test=np.sort(order[:n_test]))

    @property
    def X_train(self) -> np.ndarray:
        return self.X[self.train]

    @property
    def Y_train(self) -> np.ndarray:
        return self.Y[self.train]

    @property
    def X_test(self) -> np.ndarray:
        return self.X[self.test]

    @property
    def Y_test(self) -> np.ndarray:
        return self.Y[self.test]


def builtin_patterns(task: str) -> Dataset:
    """The four-pattern training sets.

    ``pat_assoc`` is linearly separable; ``err_hidden`` is not, since every
    input unit is on equally often for both output classes.
    """
    if task == "pat_assoc":
        # fourth row: [0, 1, 0, 1] would duplicate row three
        X = [[1, 1, 1, 0], [0, 1, 1, 1], [0, 1, 0, 1], [0, 1, 0, 0]]
        Y = [[1, 0], [1, 0], [0, 1], [0, 1]]
    elif task == "err_hidden":
        X = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]]
        Y = [[1, 0], [1, 0], [0, 1], [0, 1]]
    else:
        raise DatasetError("unknown pattern task {0!r}".format(task))
    return Dataset(np.array(X), np.array(Y))


def load_iris_table(
        path: Union[str, Path, None] = None) -> Tuple[np.ndarray, List[str]]:
    """Reads the 150-row IRIS table.

    The CSV must have the four measurement columns followed by a species
    label column. Defaults to the bundled copy of Fisher's data.

    Returns:
      A ``(features, labels)`` pair: a float array of shape (n, 4) and the
      list of species names.
    """
    if path is None:
        text = resources.files("leabra7.harness").joinpath(
            "data/iris.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DatasetError("empty IRIS table")
    header, body = rows[0], [r for r in rows[1:] if r]
    if len(header) != 5:
        raise DatasetError("IRIS table needs 5 columns, header has {0}".format(
            len(header)))
    try:
        features = np.array([[float(v) for v in r[:4]] for r in body])
    except ValueError as err:
        raise DatasetError("malformed IRIS table: {0}".format(err)) from None
    if any(len(r) != 5 for r in body):
        raise DatasetError("malformed IRIS table: ragged rows")
    return features, [r[4] for r in body]


def empirical_quantiles(column: np.ndarray) -> np.ndarray:
    """Rank-based quantiles in [0, 1]; tied values share their mean rank."""
    column = np.asarray(column, dtype=float)
    if len(column) < 2:
        return np.zeros(len(column))
    return (rankdata(column, method="average") - 1) / (len(column) - 1)


def bin_indices(quantiles: np.ndarray, bins: int) -> np.ndarray:
    """Bin of each quantile among ``bins`` equally spaced boundaries on [0, 1].

    The boundaries delimit ``bins - 1`` intervals, numbered from 0; the last
    interval is closed on the right so a quantile of exactly 1 stays in it.
    """
    edges = np.linspace(0.0, 1.0, bins)
    return np.minimum(np.digitize(quantiles, edges), bins - 1) - 1


def one_hot(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One column per distinct observed value, in sorted order.

    Returns:
      The (n, n_distinct) 0/1 matrix and the distinct values.
    """
    categories, codes = np.unique(values, return_inverse=True)
    out = np.zeros((len(values), len(categories)))
    out[np.arange(len(values)), codes] = 1
    return out, categories


def preprocess_iris(features: np.ndarray,
                    labels: List[str],
                    bins: int = 10,
                    seed: Optional[int] = None) -> Dataset:
    """Quantile-transforms, bins and one-hot encodes the IRIS features.

    Each feature becomes one column per bin that some sample falls into, and
    each species one output column. Rows are shuffled with ``seed``.
    """
    if bins < 2:
        raise DatasetError("bins must be >= 2, got {0}".format(bins))
    features = np.asarray(features, dtype=float)
    if features.ndim != 2 or len(features) != len(labels):
        raise DatasetError("features and labels do not line up")
    blocks, names = [], []
    for j in range(features.shape[1]):
        codes = bin_indices(empirical_quantiles(features[:, j]), bins)
        block, cats = one_hot(codes)
        blocks.append(block)
        base = IRIS_FEATURES[j] if j < len(IRIS_FEATURES) else str(j)
        names.extend("{0}_bin{1}".format(base, c) for c in cats)
    X = np.hstack(blocks)
    Y, _ = one_hot(np.asarray(labels))
    order = np.random.default_rng(seed).permutation(len(X))
    return Dataset(X[order], Y[order], names)
