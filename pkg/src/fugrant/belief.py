"""Exact Bayesian tracking of the joint On/Off state of all event processes.

The tracker keeps a normalized posterior over the 2^N joint states plus an
accumulated log normalizer, so `weights * exp(log_scale)` recovers the
unnormalized joint probability of the current state and the whole evidence
history. Per-slot evidence is tri-state per device: observed active,
observed silent, or unobserved. Unobserved devices contribute no emission
factor at all (they are marginalized out exactly), which is how the tracker
copes with seeing only the devices it scheduled.

The prediction step applies each process's 2x2 kernel along its own axis of
the weight tensor (O(N * 2^N)); the full 2^N x 2^N transition matrix is
never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    ScenarioConfig,
    activation_probs,
    predict_activation_probs,
    state_bits,
    stationary_on_probs,
)

# Per-device evidence values (int8 observation vectors).
OBSERVED_SILENT = 0
OBSERVED_ACTIVE = 1
UNOBSERVED = -1

MAX_PROCESSES = 24  # 2^24 weights is the largest belief we are willing to hold

# Per-state probability tables are only cached while 2^N * K stays small
# enough to be a clear win; past this the filter falls back to per-device
# vectors and stays within O(2^N) transient memory.
_TABLE_MAX_ENTRIES = 1 << 23


class CapacityError(ValueError):
    """The joint state space is too large for exact tracking."""


class EvidenceContradictionError(RuntimeError):
    """The observation has probability zero under every state."""


@dataclass
class BeliefState:
    """Normalized posterior over joint process states.

    weights[s] is P(state = s | evidence so far); log_scale accumulates the
    log of every discarded normalizer, so the unnormalized forward variable
    is weights * exp(log_scale).
    """

    weights: np.ndarray
    log_scale: float = 0.0

    @property
    def n_processes(self) -> int:
        return int(self.weights.size).bit_length() - 1


def unnormalized_joint(belief: BeliefState) -> np.ndarray:
    """Joint probability of each state and the full evidence history."""
    return belief.weights * math.exp(belief.log_scale)


def entropy(belief: BeliefState) -> float:
    """Shannon entropy (nats) of the posterior."""
    w = belief.weights[belief.weights > 0.0]
    return float(-(w * np.log(w)).sum())


def init_belief(config: ScenarioConfig) -> BeliefState:
    """Stationary prior: the product of per-process stationary marginals."""
    if config.n_processes > MAX_PROCESSES:
        raise CapacityError(
            f"n_processes = {config.n_processes} exceeds the exact-tracking "
            f"limit of {MAX_PROCESSES}"
        )
    pi = stationary_on_probs(config)
    w = np.ones(1)
    for p in pi:
        w = np.concatenate((w * (1.0 - p), w * p))
    return BeliefState(w / w.sum(), 0.0)


def _kernels(config: ScenarioConfig) -> np.ndarray:
    """Per-process transition kernels, shape (N, 2, 2), K[n][new, old]."""

    def build() -> np.ndarray:
        k = np.empty((config.n_processes, 2, 2))
        k[:, 0, 0] = 1.0 - config.eps1
        k[:, 1, 0] = config.eps1
        k[:, 0, 1] = config.eps0
        k[:, 1, 1] = 1.0 - config.eps0
        return k

    return config.cached("belief.kernels", build)


def _predict(weights: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """One-slot prior propagation, one process axis at a time.

    Each pass multiplies the top bit's 2x2 kernel into the weights viewed
    as (2, 2^(N-1)), then transposes and flattens, which rotates the bit
    order by one place. Top bit on pass j is process N-1-j, and after N
    passes the rotation returns to the original order, so every process
    gets its kernel exactly once. N contiguous matmuls cost O(N * 2^N)
    versus 4^N for a dense joint kernel.
    """
    n = config.n_processes
    kernels = _kernels(config)
    w = weights.reshape(2, -1)
    for j in range(n):
        w = (kernels[n - 1 - j] @ w).T.reshape(2, -1)
    return w.reshape(-1)


def _state_product_table(off_factors: np.ndarray, on_factors: np.ndarray) -> np.ndarray:
    """Per-state products over processes; bit n of the row index picks
    off_factors[n] or on_factors[n]. Both inputs have shape (N, K)."""
    table = np.ones((1, off_factors.shape[1]))
    for off, on in zip(off_factors, on_factors):
        table = np.concatenate((table * off, table * on))
    return table


def _activation_table(config: ScenarioConfig) -> np.ndarray | None:
    """(2^N, K) table of P(device active | state), or None if too large."""
    if config.n_states * config.n_devices > _TABLE_MAX_ENTRIES:
        return None
    ones = np.ones_like(config.q)
    return config.cached(
        "belief.activation_table",
        lambda: 1.0 - _state_product_table(ones, 1.0 - config.q),
    )


def _prediction_table(config: ScenarioConfig) -> np.ndarray | None:
    """(2^N, K) table of P(device active next slot | state), or None."""
    if config.n_states * config.n_devices > _TABLE_MAX_ENTRIES:
        return None
    return config.cached(
        "belief.prediction_table",
        lambda: 1.0 - _state_product_table(
            1.0 - config.eps1[:, None] * config.q,
            1.0 - (1.0 - config.eps0[:, None]) * config.q,
        ),
    )


def _silent_prob_vector(config: ScenarioConfig, k: int) -> np.ndarray:
    """P(device k silent | state) for every state, without the full table."""
    v = np.ones(1)
    for f in 1.0 - config.q[:, k]:
        v = np.concatenate((v, v * f))
    return v


def emission_likelihood(state_index: int, obs: np.ndarray, config: ScenarioConfig) -> float:
    """Probability of the observed evidence given one joint state.

    Observed-active devices contribute their activation probability,
    observed-silent ones the complement, unobserved ones a factor of 1.
    """
    p = activation_probs(state_bits(state_index, config.n_processes), config)
    active = obs == OBSERVED_ACTIVE
    silent = obs == OBSERVED_SILENT
    return float(np.prod(p[active]) * np.prod(1.0 - p[silent]))


def _emission_vector(obs: np.ndarray, config: ScenarioConfig) -> np.ndarray | None:
    """Emission likelihood for every state at once; None when no evidence."""
    active = np.flatnonzero(obs == OBSERVED_ACTIVE)
    silent = np.flatnonzero(obs == OBSERVED_SILENT)
    if active.size == 0 and silent.size == 0:
        return None
    table = _activation_table(config)
    if table is not None:
        e = np.ones(config.n_states)
        if active.size:
            e *= table[:, active].prod(axis=1)
        if silent.size:
            e *= (1.0 - table[:, silent]).prod(axis=1)
        return e
    e = np.ones(config.n_states)
    for k in silent:
        e *= _silent_prob_vector(config, k)
    for k in active:
        e *= 1.0 - _silent_prob_vector(config, k)
    return e


def forward_update(
    belief: BeliefState, obs: np.ndarray, config: ScenarioConfig
) -> BeliefState:
    """One filtering step: propagate one slot, then fold in the evidence.

    The normalizer of the corrected posterior is absorbed into log_scale, so
    long horizons never underflow. A fully-unobserved slot is returned as the
    bare prediction, bit for bit.

    Raises EvidenceContradictionError when the evidence has zero probability
    under every state, which cannot happen for observations generated by the
    model itself; callers typically reset to `init_belief`.
    """
    if obs.shape != (config.n_devices,):
        raise ValueError(f"observation must have shape ({config.n_devices},), got {obs.shape}")
    w = _predict(belief.weights, config)
    e = _emission_vector(obs, config)
    if e is None:
        return BeliefState(w, belief.log_scale)
    w = w * e
    total = float(w.sum())
    if total <= 0.0:
        raise EvidenceContradictionError(
            "observed evidence is impossible under the scenario's activation model"
        )
    return BeliefState(w / total, belief.log_scale + math.log(total))


def most_likely_state(belief: BeliefState) -> np.ndarray:
    """Posterior-mode state; ties go to the lowest state index."""
    idx = int(np.argmax(belief.weights))
    return state_bits(idx, belief.n_processes)


def most_likely_pattern(state: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    """Most likely next-slot activity vector given a state.

    The joint likelihood of a pattern factorizes over devices given the
    state, so thresholding each device's predicted probability at 0.5 is the
    exact argmax; a device at exactly 0.5 resolves to silent.
    """
    return (predict_activation_probs(state, config) > 0.5).astype(np.uint8)


def device_forecast(
    belief: BeliefState, config: ScenarioConfig, mode: str = "map_state"
) -> np.ndarray:
    """Per-device next-slot activity probabilities under the current belief.

    "map_state" evaluates the one-step predictor at the posterior-mode state
    (the default scheduling rule); "marginal" averages the predictor over the
    whole posterior instead of committing to one state.
    """
    if mode == "map_state":
        return predict_activation_probs(most_likely_state(belief), config)
    if mode == "marginal":
        table = _prediction_table(config)
        if table is not None:
            return belief.weights @ table
        off = 1.0 - config.eps1[:, None] * config.q
        on = 1.0 - (1.0 - config.eps0[:, None]) * config.q
        out = np.empty(config.n_devices)
        for k in range(config.n_devices):
            v = np.ones(1)
            for fo, fn in zip(off[:, k], on[:, k]):
                v = np.concatenate((v * fo, v * fn))
            out[k] = 1.0 - belief.weights @ v
        return out
    raise ValueError(f"unknown forecast mode {mode!r}; expected 'map_state' or 'marginal'")
