"""Regression dataset container."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ShapeError

__all__ = ["Dataset"]


@dataclass
class Dataset:
    """Training inputs/responses plus optional test-side arrays.

    Synthetic generators also carry the noiseless truth (f_train / f_test)
    and noisy test responses; user CSV data usually fills only X and y,
    optionally X_test.
    """

    X: np.ndarray
    y: np.ndarray
    X_test: np.ndarray | None = None
    y_test: np.ndarray | None = None
    f_train: np.ndarray | None = None
    f_test: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.X_test is not None:
            self.X_test = np.atleast_2d(np.asarray(self.X_test, dtype=float))
        for name in ("y_test", "f_train", "f_test"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.asarray(v, dtype=float).ravel())

    @property
    def n_train(self) -> int:
        return self.X.shape[0]

    @property
    def n_test(self) -> int:
        return 0 if self.X_test is None else self.X_test.shape[0]

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    def joint_inputs(self, X_extra: np.ndarray | None = None) -> np.ndarray:
        """Training inputs stacked over the given (or stored) test inputs."""
        extra = self.X_test if X_extra is None else np.atleast_2d(np.asarray(X_extra, float))
        if extra is None or extra.shape[0] == 0:
            return self.X
        if extra.shape[1] != self.input_dim:
            raise ShapeError(
                f"test inputs have dimension {extra.shape[1]}, training has {self.input_dim}"
            )
        return np.vstack([self.X, extra])

    def validate(self) -> "Dataset":
        if self.X.ndim != 2:
            raise ShapeError(f"X must be 2-d, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise ShapeError(
                f"y length {self.y.shape[0]} does not match {self.X.shape[0]} input rows"
            )
        if self.n_train < 2:
            raise DataError(f"need at least 2 training rows, got {self.n_train}")
        if not np.all(np.isfinite(self.X)) or not np.all(np.isfinite(self.y)):
            raise DataError("training data contains non-finite values")
        if self.X_test is not None:
            if self.X_test.shape[1] != self.input_dim:
                raise ShapeError(
                    f"X_test dimension {self.X_test.shape[1]} != train dimension {self.input_dim}"
                )
            if not np.all(np.isfinite(self.X_test)):
                raise DataError("test inputs contain non-finite values")
        return self
