"""Model and sampler configuration."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

__all__ = ["ModelConfig"]


@dataclass
class ModelConfig:
    """Hyperparameters of the model and its sampler.

    alpha is the stability index in (0, 2]; alpha = 2 pins every scale to 1
    and the kernel becomes deterministic.  delta picks the activation
    (0 step, 1 ReLU).  n_layers counts layers including the output layer, so
    the shallowest supported network (one hidden layer) is n_layers = 2.
    """

    alpha: float = 1.0
    delta: int = 1
    n_layers: int = 2
    iterations: int = 3000
    burn_in: int = 300
    thin: int = 1
    seed: int = 0
    sigma2_init: float = 1.0
    sigma2_proposal_step: float = 0.1
    # Layer-1 scales are proposed as one block by default; coordinate-wise
    # updates can mix better when the input dimension is large.
    first_layer_joint: bool = True
    store_kernel_draws: bool = False
    record_proposals: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise ConfigError(f"alpha must lie in (0, 2], got {self.alpha!r}")
        if self.delta not in (0, 1):
            raise ConfigError(f"delta must be 0 or 1, got {self.delta!r}")
        if int(self.n_layers) != self.n_layers or self.n_layers < 2:
            raise ConfigError(f"n_layers must be an integer >= 2, got {self.n_layers!r}")
        if self.iterations < 1:
            raise ConfigError(f"iterations must be positive, got {self.iterations!r}")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError(
                f"burn_in must satisfy 0 <= burn_in < iterations, got "
                f"{self.burn_in!r} with iterations={self.iterations!r}"
            )
        if self.thin < 1:
            raise ConfigError(f"thin must be a positive integer, got {self.thin!r}")
        if not self.sigma2_init > 0:
            raise ConfigError(f"sigma2_init must be positive, got {self.sigma2_init!r}")
        if self.sigma2_proposal_step < 0:
            raise ConfigError(
                f"sigma2_proposal_step must be nonnegative, got {self.sigma2_proposal_step!r}"
            )

    @property
    def alpha0(self) -> float:
        """Index of the positive-stable scale law (half the stability index)."""
        return self.alpha / 2.0

    @property
    def deterministic_scales(self) -> bool:
        return self.alpha == 2.0
