"""Posterior sampler for the conditionally Gaussian heavy-tailed kernel model.

One sweep updates, in order: the layer-1 scale block, each intermediate
hidden scale, the output-layer scale, then the error variance.  Scale
updates are independence Metropolis-Hastings moves proposing from the
positive-stable prior, so the acceptance ratio reduces to a likelihood
ratio on the training block.  The error variance takes a random-walk step
on log(sigma^2) under a half-Cauchy prior on sigma.

Predictive moments come off the effective covariance over the joint inputs
[X, X*]; the acceptance ratio only ever reads the training block.  Because
the recursion is consistent under marginalization, proposals are priced on
the training-block stack alone and the joint stack is rebuilt only when a
kept iteration needs a predictive draw under changed scales.  Attaching
test inputs therefore cannot change the scale trajectory (proposal and
predictive noise also use separate sub-streams of the seed).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .config import ModelConfig
from .data import Dataset
from .errors import ConfigError, NumericError
from .kernels import KernelStack, ScaleState, build_stack, rebuild_stack
from .linalg import factorize, gaussian_loglik, predictive_moments, sample_mvn
from .stable import positive_stable

__all__ = [
    "ChainState",
    "ChainTrace",
    "ChainSampler",
    "run_chain",
    "offline_predict",
    "accept_log_ratio",
]

log = logging.getLogger(__name__)

_INIT_RETRIES = 100
_AUDIT_EVERY = 100


def accept_log_ratio(delta_loglik: float, log_u: float) -> bool:
    """Metropolis rule for min(1, exp(delta_loglik)) given log of a uniform."""
    return log_u < delta_loglik


@dataclass
class ChainState:
    """One accepted state: scales, error variance, its log-likelihood, and
    the kernel stack the likelihood was priced on (training inputs)."""

    scales: ScaleState
    sigma2: float
    loglik: float
    stack: KernelStack


@dataclass
class ChainTrace:
    """Kept (post burn-in, thinned) states of one chain."""

    config: ModelConfig
    kept_iterations: np.ndarray
    scales: list[ScaleState]
    sigma2: np.ndarray
    loglik: np.ndarray
    predictive_draws: np.ndarray | None
    kernel_draws: np.ndarray | None
    accept_rates: dict[str, float] = field(default_factory=dict)
    proposal_log: list[tuple] | None = None

    @property
    def n_kept(self) -> int:
        return len(self.scales)

    def scale_matrix(self) -> np.ndarray:
        """Kept scale states stacked row-wise: s1_1..s1_I, s2..sL."""
        return np.vstack([s.as_flat() for s in self.scales])


class ChainSampler:
    """Single-owner sampler; run one of these per (data, config, seed).

    ``flat_likelihood`` replaces the Gaussian likelihood with a constant,
    turning the chain into a prior sampler along the exact MH code path
    (diagnostic use only).
    """

    def __init__(self, data: Dataset, config: ModelConfig, flat_likelihood: bool = False):
        self.data = data.validate()
        self.config = config
        self.flat_likelihood = flat_likelihood
        self.n = data.n_train
        self.m = data.n_test
        self.X_joint = data.joint_inputs() if self.m > 0 else None
        param_ss, predict_ss = np.random.SeedSequence(config.seed).spawn(2)
        self.param_stream = np.random.default_rng(param_ss)
        self.predict_stream = np.random.default_rng(predict_ss)
        self.accept_counts: dict[str, list[int]] = {}
        self.proposal_log: list[tuple] | None = [] if config.record_proposals else None
        self.rejected_numeric = 0
        # Joint-stack cache for predictive draws, keyed by scale-state identity.
        self._joint_stack: KernelStack | None = None
        self._joint_scales: ScaleState | None = None

    # -- pieces ------------------------------------------------------------

    def _prior_scales(self, count: int) -> np.ndarray:
        if self.config.deterministic_scales:
            return np.ones(count)
        return positive_stable(self.config.alpha0, count, self.param_stream)

    def _loglik(self, stack: KernelStack, sigma2: float) -> float:
        if self.flat_likelihood:
            return 0.0
        lam = np.array(stack.effective_output[: self.n, : self.n])
        lam[np.diag_indices(self.n)] += sigma2
        return gaussian_loglik(self.data.y, factorize(lam))

    def _count(self, name: str, accepted: bool) -> None:
        cnt = self.accept_counts.setdefault(name, [0, 0])
        cnt[0] += int(accepted)
        cnt[1] += 1

    # -- updates -----------------------------------------------------------

    def init_chain(self) -> ChainState:
        """Draw starting scales from the prior and price the initial state."""
        last_err: NumericError | None = None
        for _ in range(_INIT_RETRIES):
            scales = ScaleState(
                first_layer=self._prior_scales(self.data.input_dim),
                hidden=self._prior_scales(self.config.n_layers - 1),
            )
            try:
                stack = build_stack(self.data.X, scales, self.config)
                loglik = self._loglik(stack, self.config.sigma2_init)
            except NumericError as err:
                last_err = err
                continue
            return ChainState(scales=scales, sigma2=self.config.sigma2_init,
                              loglik=loglik, stack=stack)
        raise NumericError(
            f"could not initialize a chain after {_INIT_RETRIES} prior draws: {last_err}"
        )

    def update_scale(
        self, state: ChainState, layer_index: int, coordinate: int | None = None
    ) -> tuple[ChainState, bool]:
        """Independence-MH move on one layer's scale (layer 1: the whole
        block, or a single coordinate when requested).  Numeric failures in
        the proposed rebuild reject rather than abort."""
        cfg = self.config
        if not 1 <= layer_index <= cfg.n_layers:
            raise ConfigError(f"layer_index must lie in 1..{cfg.n_layers}, got {layer_index}")
        if cfg.deterministic_scales:
            return state, True

        new_scales = state.scales.copy()
        if layer_index == 1:
            if coordinate is None:
                new_scales.first_layer = self._prior_scales(self.data.input_dim)
            else:
                new_scales.first_layer[coordinate] = self._prior_scales(1)[0]
        else:
            new_scales.hidden[layer_index - 2] = self._prior_scales(1)[0]

        try:
            new_stack = rebuild_stack(state.stack, self.data.X, new_scales, cfg, layer_index)
            new_loglik = self._loglik(new_stack, state.sigma2)
        except NumericError as err:
            self.rejected_numeric += 1
            log.debug("auto-reject at layer %d: %s", layer_index, err)
            self._count(f"scale_l{layer_index}", False)
            return state, False

        delta = new_loglik - state.loglik
        log_u = np.log(self.param_stream.uniform())
        accepted = accept_log_ratio(delta, log_u)
        if self.proposal_log is not None:
            self.proposal_log.append(("scale", layer_index, delta, log_u, accepted))
        self._count(f"scale_l{layer_index}", accepted)
        if accepted:
            return ChainState(new_scales, state.sigma2, new_loglik, new_stack), True
        return state, False

    def update_sigma2(self, state: ChainState) -> tuple[ChainState, bool]:
        """Random-walk MH on log(sigma^2) with half-Cauchy(1) prior on sigma."""
        step = self.config.sigma2_proposal_step
        if step == 0.0:
            self._count("sigma2", True)
            return state, True
        t_cur = np.log(state.sigma2)
        t_new = t_cur + step * self.param_stream.standard_normal()
        sigma2_new = float(np.exp(t_new))
        try:
            loglik_new = self._loglik(state.stack, sigma2_new)
        except NumericError:
            self.rejected_numeric += 1
            self._count("sigma2", False)
            return state, False
        delta = (loglik_new + _log_prior_log_sigma2(t_new)) - (
            state.loglik + _log_prior_log_sigma2(t_cur)
        )
        log_u = np.log(self.param_stream.uniform())
        accepted = accept_log_ratio(delta, log_u)
        if self.proposal_log is not None:
            self.proposal_log.append(("sigma2", 0, delta, log_u, accepted))
        self._count("sigma2", accepted)
        if accepted:
            return ChainState(state.scales, sigma2_new, loglik_new, state.stack), True
        return state, False

    def _sweep(self, state: ChainState) -> ChainState:
        cfg = self.config
        if not cfg.deterministic_scales:
            if cfg.first_layer_joint:
                state, _ = self.update_scale(state, 1)
            else:
                for i in range(self.data.input_dim):
                    state, _ = self.update_scale(state, 1, coordinate=i)
            for l in range(2, cfg.n_layers):
                state, _ = self.update_scale(state, l)
            state, _ = self.update_scale(state, cfg.n_layers)
        state, _ = self.update_sigma2(state)
        return state

    def _audit(self, state: ChainState) -> None:
        fresh = self._loglik(state.stack, state.sigma2)
        if abs(fresh - state.loglik) > 1e-6 * (1.0 + abs(fresh)):
            raise NumericError(
                f"chain bookkeeping drifted: stored loglik {state.loglik!r} vs "
                f"recomputed {fresh!r}"
            )

    # -- main loop ----------------------------------------------------------

    def run(self) -> ChainTrace:
        cfg = self.config
        state = self.init_chain()
        kept_iters: list[int] = []
        kept_scales: list[ScaleState] = []
        kept_sigma2: list[float] = []
        kept_loglik: list[float] = []
        kept_pred: list[np.ndarray] = []
        kept_kernels: list[np.ndarray] = []

        for t in range(1, cfg.iterations + 1):
            state = self._sweep(state)
            if t % _AUDIT_EVERY == 0:
                self._audit(state)
            if t <= cfg.burn_in or (t - cfg.burn_in - 1) % cfg.thin != 0:
                continue
            kept_iters.append(t)
            kept_scales.append(state.scales.copy())
            kept_sigma2.append(state.sigma2)
            kept_loglik.append(state.loglik)
            if self.m > 0:
                if self._joint_scales is not state.scales:
                    self._joint_stack = build_stack(self.X_joint, state.scales, cfg)
                    self._joint_scales = state.scales
                lam = self._joint_stack.effective_output.copy()
                lam[np.diag_indices(self.n + self.m)] += state.sigma2
                moments = predictive_moments(lam, self.data.y)
                kept_pred.append(sample_mvn(moments, self.predict_stream))
            if cfg.store_kernel_draws:
                kept_kernels.append(state.stack.effective_output.copy())

        rates = {
            name: (cnt[0] / cnt[1] if cnt[1] else float("nan"))
            for name, cnt in self.accept_counts.items()
        }
        if self.rejected_numeric:
            log.info("%d proposals auto-rejected on numeric failure", self.rejected_numeric)
            rates["numeric_rejections"] = float(self.rejected_numeric)
        return ChainTrace(
            config=cfg,
            kept_iterations=np.asarray(kept_iters, dtype=int),
            scales=kept_scales,
            sigma2=np.asarray(kept_sigma2),
            loglik=np.asarray(kept_loglik),
            predictive_draws=np.vstack(kept_pred) if kept_pred else None,
            kernel_draws=np.stack(kept_kernels) if kept_kernels else None,
            accept_rates=rates,
            proposal_log=self.proposal_log,
        )


def _log_prior_log_sigma2(t: float) -> float:
    """Half-Cauchy(scale 1) prior on sigma, as a density in t = log(sigma^2),
    up to an additive constant: t/2 - log(1 + exp(t))."""
    return 0.5 * t - np.logaddexp(0.0, t)


def run_chain(data: Dataset, config: ModelConfig, flat_likelihood: bool = False) -> ChainTrace:
    """Run one full chain and return its kept trace."""
    return ChainSampler(data, config, flat_likelihood=flat_likelihood).run()


def offline_predict(
    trace: ChainTrace,
    X_new: np.ndarray,
    data: Dataset,
    config: ModelConfig | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Predictive draws at new inputs using only the stored scales.

    For each kept state the joint stack over [X, X_new] is rebuilt with that
    state's scales and error variance; one response vector is then drawn from
    the conditional Gaussian.  Returns an (n_kept, m_new) array.
    """
    cfg = trace.config if config is None else config
    data.validate()
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.size == 0:
        return np.zeros((trace.n_kept, 0))
    X_joint = data.joint_inputs(X_new)
    n = data.n_train
    m_new = X_new.shape[0]
    stream = np.random.default_rng(seed)
    draws = np.empty((trace.n_kept, m_new))
    for i, (scales, sigma2) in enumerate(zip(trace.scales, trace.sigma2)):
        stack = build_stack(X_joint, scales, cfg)
        lam = stack.effective_output.copy()
        lam[np.diag_indices(n + m_new)] += sigma2
        moments = predictive_moments(lam, data.y)
        draws[i] = sample_mvn(moments, stream)
    return draws
