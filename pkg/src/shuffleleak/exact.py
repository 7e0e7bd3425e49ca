"""Ground-truth leakage values at small scale.

Two kinds of machinery live here: exhaustive enumeration over histogram or
permutation space (feasible for small n and alphabets, guarded by a state
ceiling), and finite-n closed forms built from binomial expectations that
stay exact at any n. Histograms are enumerated instead of sequences
wherever the statistic is ordering-invariant, which pushes feasibility
from n of about 8 to n of about 60 on 4-symbol alphabets; permutation
enumeration is reserved for position quantities with fixed inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product
from math import comb, factorial, lgamma
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .errors import (
    AbsoluteContinuityError,
    InvalidInputError,
    InvalidParameterError,
    ResourceLimitError,
)
from .mechanisms import Randomizer
from .probability import Categorical, align


@dataclass(frozen=True)
class ExactLimits:
    """Ceiling on enumerated states; exceeding it raises, never truncates."""

    max_states: int = 10_000_000


DEFAULT_LIMITS = ExactLimits()


def _check_states(states: int, limits: ExactLimits) -> None:
    if states > limits.max_states:
        raise ResourceLimitError(
            f"enumeration needs {states} states, ceiling is {limits.max_states}"
        )


def _compositions(total: int, bins: int):
    """Yield all count vectors of length ``bins`` summing to ``total``."""
    if bins == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, bins - 1):
            yield (first,) + rest


def _log_multinomial(counts: Sequence[int], logp: np.ndarray) -> float:
    n = sum(counts)
    out = lgamma(n + 1)
    for c, lp in zip(counts, logp):
        if c:
            out += c * lp - lgamma(c + 1)
    return out


def states_shuffle_only(p: Categorical, q: Categorical, n: int) -> int:
    """Enumeration size of the histogram oracle for the two-distribution channel."""
    s = len(q.support())
    return comb(n - 1 + s - 1, s - 1) * max(1, len(p.support()))


def states_input_mi(n: int, n_outputs: int) -> int:
    """Cell count of the dense histogram recursion for input-leakage oracles."""
    if n_outputs <= 1:
        return 1
    return (n + 1) ** (n_outputs - 1)


def states_position_dp(n: int, n_outputs: int) -> int:
    """Work estimate of the permutation oracle for position leakage."""
    return (n_outputs**n) * n * factorial(max(n - 1, 1))


def position_mi_exact(
    p: Categorical, q: Categorical, n: int, limits: ExactLimits = DEFAULT_LIMITS
) -> float:
    """Exact position leakage of the two-distribution shuffle channel.

    Averages the divergence of the position posterior from uniform over
    every channel outcome. Outcomes are enumerated as (target value,
    multiset of the n - 1 cover draws); the divergence depends on the
    outcome only through its count vector. A target value impossible
    under the cover distribution pins the posterior to a single position
    and contributes log n.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    labels, pv, qv = align(p, q)
    sup_q = np.nonzero(qv > 0)[0]
    s = len(sup_q)
    _check_states(states_shuffle_only(p, q, n), limits)
    logq = np.log(qv[sup_q])
    w = (pv[sup_q] / qv[sup_q]).tolist()
    logn = math.log(n)
    q_pos = {int(j): i for i, j in enumerate(sup_q)}
    terms = []
    for a in np.nonzero(pv > 0)[0]:
        pa = float(pv[a])
        ai = q_pos.get(int(a))
        for m in _compositions(n - 1, s):
            pm = math.exp(_log_multinomial(m, logq))
            if pm == 0.0:
                continue
            if ai is None:
                g = logn
            else:
                counts = list(m)
                counts[ai] += 1
                stot = math.fsum(c * wj for c, wj in zip(counts, w))
                g = math.fsum(
                    c * (wj / stot) * math.log(n * wj / stot)
                    for c, wj in zip(counts, w)
                    if c and wj > 0
                )
            terms.append(pa * pm * g)
    return math.fsum(terms)


def message_mi_exact(
    p: Categorical, q: Categorical, n: int, limits: ExactLimits = DEFAULT_LIMITS
) -> float:
    """Exact message leakage of the two-distribution shuffle channel.

    Builds the joint law of (count vector, target value) by enumeration
    and sums the pointwise mutual information. Works whether or not the
    target distribution is absolutely continuous w.r.t. the cover.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    labels, pv, qv = align(p, q)
    sup_q = np.nonzero(qv > 0)[0]
    sup_p = np.nonzero(pv > 0)[0]
    s = len(sup_q)
    _check_states(states_shuffle_only(p, q, n), limits)
    logq = np.log(qv[sup_q])
    active = np.nonzero((pv > 0) | (qv > 0))[0]
    slot = {int(j): i for i, j in enumerate(active)}
    joint: dict[tuple, dict[int, float]] = {}
    for a in sup_p:
        pa = float(pv[a])
        for m in _compositions(n - 1, s):
            pr = pa * math.exp(_log_multinomial(m, logq))
            if pr == 0.0:
                continue
            key = [0] * len(active)
            for j, c in zip(sup_q, m):
                key[slot[int(j)]] = c
            key[slot[int(a)]] += 1
            amap = joint.setdefault(tuple(key), {})
            amap[int(a)] = amap.get(int(a), 0.0) + pr
    terms = []
    for amap in joint.values():
        pc = math.fsum(amap.values())
        for a, j in amap.items():
            terms.append(j * math.log(j / (pc * pv[a])))
    return math.fsum(terms)


def _binom_xlogx(n: int, prob: float) -> float:
    """E[(X/n) log(X/n)] for X ~ Bin(n, prob), with 0 log 0 = 0."""
    x = np.arange(1, n + 1)
    pmf = binom.pmf(x, n, prob)
    ratio = x / n
    return float(np.dot(pmf, ratio * np.log(ratio)))


def matched_message_mi(p: Categorical, n: int) -> float:
    """Exact message leakage when the covers share the target's distribution.

    Closed form via binomial expectations,
    sum_i E[(X/n) log(X/n)] - p_i log p_i with X ~ Bin(n, p_i),
    valid at every finite n (no asymptotics, no enumeration ceiling).
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    terms = []
    for pi in p.probs:
        pi = float(pi)
        if pi == 0.0:
            continue
        terms.append(_binom_xlogx(n, pi) - pi * math.log(pi))
    return math.fsum(terms)


def message_minus_position_mi(p: Categorical, q: Categorical, n: int) -> float:
    """Exact gap between message leakage and position leakage.

    Equals sum_i (p_i/q_i) E[(X/n) log(X/n)] - p_i log p_i with
    X ~ Bin(n, q_i). Adding the exact position leakage recovers the exact
    message leakage (chain-rule decomposition of the channel). Requires
    the target distribution absolutely continuous w.r.t. the cover.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    labels, pv, qv = align(p, q)
    if np.any((pv > 0) & (qv == 0)):
        raise AbsoluteContinuityError("target has mass outside the cover support")
    terms = []
    for pi, qi in zip(pv, qv):
        pi, qi = float(pi), float(qi)
        if pi == 0.0:
            continue
        terms.append((pi / qi) * _binom_xlogx(n, qi) - pi * math.log(pi))
    return math.fsum(terms)


def _hist_law_dense(other_rows: np.ndarray, limits: ExactLimits) -> np.ndarray:
    """Law of the count vector of independent draws, one per row.

    Counts of output symbol 0 are implicit (total minus the rest), so the
    returned array is indexed by the counts of symbols 1..k-1.
    """
    t, k = other_rows.shape
    if k == 1:
        return np.ones(())
    _check_states((t + 2) ** (k - 1), limits)
    law = np.zeros((t + 1,) * (k - 1))
    law[(0,) * (k - 1)] = 1.0
    for row in other_rows:
        new = row[0] * law
        for j in range(1, k):
            axis = j - 1
            src = [slice(None)] * (k - 1)
            dst = [slice(None)] * (k - 1)
            src[axis] = slice(0, -1)
            dst[axis] = slice(1, None)
            new[tuple(dst)] += row[j] * law[tuple(src)]
        law = new
    return law


def _input_mi_hist(
    prior_vec: np.ndarray,
    signal_rows: np.ndarray,
    other_rows: np.ndarray,
    limits: ExactLimits,
) -> float:
    """Mutual information between the signal index and the pooled histogram.

    One draw comes from signal_rows[x] (x distributed per prior_vec); the
    remaining draws come from other_rows, independently. The histogram of
    all draws is observed.
    """
    nx, k = signal_rows.shape
    if k == 1:
        return 0.0
    law = _hist_law_dense(other_rows, limits)
    t = other_rows.shape[0]
    padded = np.zeros((t + 2,) * (k - 1))
    padded[tuple(slice(0, t + 1) for _ in range(k - 1))] = law
    cells = padded.size
    lx = np.zeros((nx, cells))
    for x in range(nx):
        acc = signal_rows[x, 0] * padded
        for j in range(1, k):
            axis = j - 1
            src = [slice(None)] * (k - 1)
            dst = [slice(None)] * (k - 1)
            src[axis] = slice(0, -1)
            dst[axis] = slice(1, None)
            acc[tuple(dst)] += signal_rows[x, j] * padded[tuple(src)]
        lx[x] = acc.ravel()
    pc = prior_vec @ lx
    total = 0.0
    for x in range(nx):
        px = float(prior_vec[x])
        if px == 0.0:
            continue
        m = lx[x] > 0
        total += px * float(np.sum(lx[x][m] * np.log(lx[x][m] / pc[m])))
    return total


def _prior_vector(prior: Categorical, input_labels: tuple) -> np.ndarray:
    known = set(input_labels)
    for lab in prior.support():
        if lab not in known:
            raise InvalidInputError(f"prior symbol {lab!r} not a randomizer input")
    return np.array([prior.prob(x) for x in input_labels])


def input_mi_fixed_others(
    r: Randomizer,
    prior: Categorical,
    x_rest: Sequence,
    limits: ExactLimits = DEFAULT_LIMITS,
) -> float:
    """Exact input leakage with the other users' inputs held fixed.

    The target's input follows ``prior`` and is pushed through ``r``; each
    remaining user i contributes one draw from the row of ``x_rest[i]``.
    """
    prior_vec = _prior_vector(prior, r.input_labels)
    rows = (
        np.array([r.row(x) for x in x_rest])
        if len(x_rest)
        else np.zeros((0, len(r.output_labels)))
    )
    return _input_mi_hist(prior_vec, r.kernel, rows, limits)


def input_mi_iid_others(
    r: Randomizer,
    prior: Categorical,
    n: int,
    limits: ExactLimits = DEFAULT_LIMITS,
) -> float:
    """Exact input leakage when every user's input is i.i.d. from ``prior``.

    The non-target outputs are then i.i.d. from the output marginal
    prior @ kernel; this is the quantity the Monte Carlo input estimator
    converges to.
    """
    if n < 1:
        raise InvalidParameterError("n must be at least 1")
    prior_vec = _prior_vector(prior, r.input_labels)
    marginal = prior_vec @ r.kernel
    rows = np.tile(marginal, (n - 1, 1))
    return _input_mi_hist(prior_vec, r.kernel, rows, limits)


def input_mi_shuffle_only(
    p1: Categorical,
    others: Sequence[Categorical],
    limits: ExactLimits = DEFAULT_LIMITS,
) -> float:
    """Exact input leakage when messages are sent unrandomized.

    The target's message follows ``p1``; user i's message follows
    ``others[i]``, all independent, and the shuffled pool is observed.
    """
    labels = list(p1.labels)
    seen = set(labels)
    for d in others:
        for lab in d.labels:
            if lab not in seen:
                seen.add(lab)
                labels.append(lab)
    signal = np.zeros((len(p1.labels), len(labels)))
    for i, lab in enumerate(p1.labels):
        signal[i, labels.index(lab)] = 1.0
    rows = np.array([[d.prob(lab) for lab in labels] for d in others]) if others else np.zeros((0, len(labels)))
    prior_vec = np.asarray(p1.probs)
    return _input_mi_hist(prior_vec, signal, rows, limits)


def _position_likelihood_matrix(
    r: Randomizer, x_inputs: Sequence, limits: ExactLimits
) -> tuple[list[tuple], np.ndarray]:
    n = len(x_inputs)
    k = len(r.output_labels)
    _check_states(states_position_dp(n, k), limits)
    rows = np.array([r.row(x) for x in x_inputs])
    z_idx = np.array(list(product(range(k), repeat=n)), dtype=np.intp).reshape(-1, n)
    nz = z_idx.shape[0]
    like = np.zeros((n, nz))
    for k_pos in range(n):
        other_pos = [j for j in range(n) if j != k_pos]
        acc = np.zeros(nz)
        for perm in permutations(range(1, n)):
            prod = rows[0][z_idx[:, k_pos]].copy()
            for u, pos in zip(perm, other_pos):
                prod *= rows[u][z_idx[:, pos]]
            acc += prod
        like[k_pos] = acc / factorial(n - 1)
    z_tuples = [tuple(r.output_labels[j] for j in row) for row in z_idx]
    return z_tuples, like


def position_likelihoods(
    r: Randomizer, x_inputs: Sequence, limits: ExactLimits = DEFAULT_LIMITS
) -> tuple[list[tuple], np.ndarray]:
    """Conditional law of the released sequence given the target's position.

    Returns (sequences, matrix) where matrix[i, j] is the probability of
    sequences[j] given that the target's message landed at position i + 1,
    with all users' inputs fixed to ``x_inputs``.
    """
    if len(x_inputs) < 1:
        raise InvalidParameterError("need at least one input")
    return _position_likelihood_matrix(r, x_inputs, limits)


def position_mi_fixed_inputs(
    r: Randomizer, x_inputs: Sequence, limits: ExactLimits = DEFAULT_LIMITS
) -> float:
    """Exact position leakage with all users' inputs fixed.

    Enumerates the conditional law of the released sequence given each
    position by summing over assignments of the other users to the other
    slots (factorial work; small n only).
    """
    if len(x_inputs) < 1:
        raise InvalidParameterError("need at least one input")
    _, like = _position_likelihood_matrix(r, x_inputs, limits)
    n = like.shape[0]
    pz = like.mean(axis=0)
    mask = like > 0
    safe_pz = np.where(pz > 0, pz, 1.0)
    terms = np.where(mask, like * np.log(np.where(mask, like / safe_pz, 1.0)), 0.0)
    return float(terms.sum() / n)
