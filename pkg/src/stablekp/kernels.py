"""Stochastic layer-kernel recursion.

Given per-layer positive scales, the layer-1 kernel is the scale-weighted
Gram matrix of the inputs and each later layer follows the arc-cosine
recursion for threshold-power activations (step: delta=0, ReLU: delta=1):

    Sigma(l)[k,h] = pi^-1 * (v1^2 v2^2)^(delta/2) * J_delta(theta),
    v1^2 = 1 + s * Sigma(l-1)[k,k],   v2^2 = 1 + s * Sigma(l-1)[h,h],
    theta = arccos( (1 + s * Sigma(l-1)[k,h]) / (v1 v2) ).

The layer-2 step always uses s = 1: the first-layer scales are already folded
into the Gram matrix.  The effective output covariance is the last hidden
scale times the final layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ModelConfig
from .errors import ConfigError, KernelOverflowError, ShapeError

__all__ = [
    "ScaleState",
    "KernelStack",
    "first_layer_kernel",
    "j_delta",
    "next_layer_kernel",
    "build_stack",
    "rebuild_stack",
]


@dataclass
class ScaleState:
    """Positive scales of one chain state.

    ``first_layer`` holds one scale per input coordinate (the diagonal of the
    layer-1 weighting); ``hidden`` holds the scalar scales of layers 2..L.
    """

    first_layer: np.ndarray
    hidden: np.ndarray

    def __post_init__(self) -> None:
        self.first_layer = np.atleast_1d(np.asarray(self.first_layer, dtype=float))
        self.hidden = np.atleast_1d(np.asarray(self.hidden, dtype=float))
        for name, arr in (("first_layer", self.first_layer), ("hidden", self.hidden)):
            if arr.ndim != 1:
                raise ShapeError(f"{name} scales must be a 1-d vector, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)) or not np.all(arr > 0):
                raise ConfigError(f"{name} scales must be strictly positive and finite")

    @property
    def n_layers(self) -> int:
        return len(self.hidden) + 1

    def copy(self) -> "ScaleState":
        return ScaleState(self.first_layer.copy(), self.hidden.copy())

    def as_flat(self) -> np.ndarray:
        """Concatenated (first_layer, hidden) vector, trace-file order."""
        return np.concatenate([self.first_layer, self.hidden])


@dataclass
class KernelStack:
    """Per-layer kernels Sigma(1)..Sigma(L) plus the effective output
    covariance s(L) * Sigma(L), all sized to the input set they were built on."""

    layers: list[np.ndarray]
    effective_output: np.ndarray
    alpha: float
    delta: int
    n_layers: int = field(default=0)

    def __post_init__(self) -> None:
        if self.n_layers == 0:
            self.n_layers = len(self.layers)


def first_layer_kernel(X: np.ndarray, first_layer_scales: np.ndarray) -> np.ndarray:
    """Scale-weighted Gram matrix X diag(scales) X^T, symmetrized exactly."""
    X = np.asarray(X, dtype=float)
    s = np.atleast_1d(np.asarray(first_layer_scales, dtype=float))
    if X.ndim != 2:
        raise ShapeError(f"input matrix must be 2-d, got shape {X.shape}")
    if s.shape != (X.shape[1],):
        raise ShapeError(
            f"scale vector length {s.shape} does not match input dimension {X.shape[1]}"
        )
    if not np.all(np.isfinite(s)) or not np.all(s > 0):
        raise ConfigError("first-layer scales must be strictly positive and finite")
    K = (X * s) @ X.T
    return (K + K.T) / 2.0


# Above this size the recursion evaluates the strict upper triangle only and
# mirrors it; per entry the arithmetic is identical, so results are bitwise
# equal to the dense evaluation.
_TRIU_THRESHOLD = 32
_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    got = _TRIU_CACHE.get(n)
    if got is None:
        got = _TRIU_CACHE[n] = np.triu_indices(n, k=1)
    return got


def j_delta(delta: int, theta):
    """Angular factor of the arc-cosine recursion for delta in {0, 1}."""
    theta = np.asarray(theta, dtype=float)
    if delta == 0:
        return np.pi - theta
    if delta == 1:
        return np.sin(theta) + (np.pi - theta) * np.cos(theta)
    raise ConfigError(
        f"unsupported activation exponent delta={delta}; only the step (0) and "
        "ReLU (1) cases are implemented"
    )


def next_layer_kernel(
    prev: np.ndarray, scale: float, delta: int, layer: int | None = None
) -> np.ndarray:
    """One step of the recursion: Sigma(l-1), s(l-1) -> Sigma(l).

    The correlation is clamped into [-1, 1] before arccos (the exact value
    lies there by Cauchy-Schwarz; floating error can poke past it).  The
    diagonal is written from its closed form, so the delta=1 identity
    Sigma(l)[k,k] = 1 + s * Sigma(l-1)[k,k] holds exactly.
    """
    prev = np.asarray(prev, dtype=float)
    if prev.ndim != 2 or prev.shape[0] != prev.shape[1]:
        raise ShapeError(f"previous kernel must be square, got shape {prev.shape}")
    if not np.isfinite(scale) or scale <= 0:
        raise ConfigError(f"layer scale must be strictly positive and finite, got {scale!r}")
    if delta not in (0, 1):
        j_delta(delta, 0.0)  # raises the unsupported-activation error
    where = f"layer {layer}" if layer is not None else "kernel recursion"
    n = prev.shape[0]
    if n > _TRIU_THRESHOLD:
        rows, cols = _triu_indices(n)
        g = 1.0 + scale * prev[rows, cols]
        d = 1.0 + scale * np.diag(prev)
    else:
        g = 1.0 + scale * prev
        d = np.diag(g).copy()
        rows = cols = None
    # Non-finite entries in prev survive the affine map, so one scan catches
    # both a bad input matrix and overflow from an astronomically large scale.
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(d))):
        raise KernelOverflowError(f"non-finite kernel entries at {where}", layer=layer)
    v = np.sqrt(d)
    vv = v[rows] * v[cols] if rows is not None else np.outer(v, v)
    np.divide(g, vv, out=g)
    np.clip(g, -1.0, 1.0, out=g)  # rho; exact value is in [-1, 1] already
    theta = np.arccos(g)
    if delta == 1:
        # J_1 via cos(theta) = rho, sin(theta) = sqrt(1 - rho^2)
        np.subtract(np.pi, theta, out=theta)
        np.multiply(theta, g, out=theta)
        np.multiply(g, g, out=g)
        np.subtract(1.0, g, out=g)
        np.sqrt(g, out=g)
        theta += g
        theta *= 1.0 / np.pi
        theta *= vv
        diag_fill = d
    else:
        np.subtract(np.pi, theta, out=theta)
        theta *= 1.0 / np.pi
        diag_fill = 1.0
    if rows is None:
        out = theta
        np.fill_diagonal(out, diag_fill)
        return out
    out = np.empty_like(prev)
    out[rows, cols] = theta
    out[cols, rows] = theta
    out[np.arange(n), np.arange(n)] = diag_fill
    return out


def _building_scales(state: ScaleState, n_layers: int) -> list[float]:
    """Scales feeding the recursion steps that produce layers 2..L.

    Layer 2 is built with scale 1 (first-layer scales live inside Sigma(1));
    layer l >= 3 is built with the hidden scale s(l-1).  The last hidden
    scale s(L) never enters the recursion, only the effective output.
    """
    return [1.0] + [float(s) for s in state.hidden[: n_layers - 2]]


def build_stack(X_joint: np.ndarray, state: ScaleState, config: ModelConfig) -> KernelStack:
    """Full stack Sigma(1)..Sigma(L) and effective output over one input set."""
    L = config.n_layers
    if state.n_layers != L:
        raise ShapeError(
            f"scale state describes {state.n_layers} layers, config wants {L}"
        )
    layers = [first_layer_kernel(X_joint, state.first_layer)]
    for l, s in zip(range(2, L + 1), _building_scales(state, L)):
        layers.append(next_layer_kernel(layers[-1], s, config.delta, layer=l))
    return KernelStack(
        layers=layers,
        effective_output=float(state.hidden[-1]) * layers[-1],
        alpha=config.alpha,
        delta=config.delta,
        n_layers=L,
    )


def rebuild_stack(
    stack: KernelStack,
    X_joint: np.ndarray,
    state: ScaleState,
    config: ModelConfig,
    changed_layer: int,
) -> KernelStack:
    """Rebuild after the scale of ``changed_layer`` changed, reusing every
    layer the change cannot reach: a new s(l) invalidates layers l+1..L, and
    a new s(L) only rescales the effective output."""
    L = config.n_layers
    if not 1 <= changed_layer <= L:
        raise ConfigError(f"changed_layer must lie in 1..{L}, got {changed_layer}")
    if changed_layer == 1:
        return build_stack(X_joint, state, config)
    layers = [lay for lay in stack.layers[:changed_layer]]
    scales = _building_scales(state, L)
    for l in range(changed_layer + 1, L + 1):
        layers.append(next_layer_kernel(layers[-1], scales[l - 2], config.delta, layer=l))
    return KernelStack(
        layers=layers,
        effective_output=float(state.hidden[-1]) * layers[-1],
        alpha=config.alpha,
        delta=config.delta,
        n_layers=L,
    )
