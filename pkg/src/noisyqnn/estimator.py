"""scikit-learn compatible wrapper around the noisy QNN regressor."""

from __future__ import annotations

from types import SimpleNamespace

from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .channels import NoiseSpec
from .qnn import BatchedCircuit, build_ansatz
from .training import TrainConfig, train

__all__ = ["QNNRegressor"]


class QNNRegressor(RegressorMixin, BaseEstimator):
    """Two-feature QNN regressor whose circuit noise acts as a regularizer.

    Inputs are expected already scaled to ``[-pi, pi]`` and targets to
    ``[-1, 1]`` (e.g. with ``MinMaxScaler`` in a pipeline).

    Parameters
    ----------
    n_layers : int
        Number of encoding + trainable layers.
    channel : {"ad", "pd", "dp"} or None
        Noise channel inserted after every gate.
    gamma : float
        Channel strength in ``[0, 1]``.
    noise_after_encoding : bool
        Whether encoding gates are also followed by noise.
    epochs, batch_size, learning_rate : training settings.
    random_state : int
        Seed for parameter initialization and batch shuffling.
    epoch_metric : {"post_epoch", "running"}
        How the per-epoch training loss in ``history_`` is measured.
    """

    def __init__(
        self,
        n_layers=5,
        channel=None,
        gamma=0.0,
        noise_after_encoding=True,
        epochs=20,
        batch_size=20,
        learning_rate=0.03,
        random_state=0,
        epoch_metric="post_epoch",
    ):
        self.n_layers = n_layers
        self.channel = channel
        self.gamma = gamma
        self.noise_after_encoding = noise_after_encoding
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.random_state = random_state
        self.epoch_metric = epoch_metric

    def _model(self, gamma=None):
        noise = NoiseSpec(self.channel, self.gamma if gamma is None else gamma)
        return build_ansatz(self.n_layers, noise, noise_after_encoding=self.noise_after_encoding)

    def fit(self, X, y, X_val=None, y_val=None):
        """Train on ``(X, y)``; ``(X_val, y_val)`` only feeds the per-epoch validation curve."""
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] != 2:
            raise ValueError(f"QNNRegressor expects 2 features, got {X.shape[1]}")
        if X_val is None:
            X_val, y_val = X, y
        else:
            X_val, y_val = check_X_y(X_val, y_val, y_numeric=True)
        data = SimpleNamespace(x_train=X, y_train=y, x_val=X_val, y_val=y_val)
        config = TrainConfig(
            epochs=self.epochs,
            batch_size=min(self.batch_size, len(y)),
            learning_rate=self.learning_rate,
            seed=self.random_state,
            epoch_metric=self.epoch_metric,
        )
        self.history_ = train(self._model(), data, config)
        self.params_ = self.history_.final_params
        self.n_features_in_ = 2
        return self

    def predict(self, X, gamma=None):
        """Predictions in ``[-1, 1]``; ``gamma`` overrides the noise strength for feed-forward evaluation."""
        check_is_fitted(self, "params_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return BatchedCircuit(self._model(gamma)).predict(X, self.params_)
