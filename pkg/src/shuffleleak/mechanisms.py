"""Local randomizers and blanket decompositions.

A :class:`Randomizer` is a row-stochastic kernel: row x is the output
distribution of the mechanism applied to input x. The blanket
decomposition peels off the largest input-independent common component of
a family of distributions (or of a randomizer's rows); the residual mass
is routed through a placeholder symbol ``BOT`` and restored by
:func:`postprocess_blanket`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .probability import PROB_SUM_TOL, Categorical


class _Bottom:
    """Placeholder symbol for the non-common residual of a decomposition."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"


BOT = _Bottom()


@dataclass(frozen=True, eq=False)
class Randomizer:
    """Row-stochastic kernel from an input alphabet to an output alphabet.

    Parameters
    ----------
    input_labels, output_labels : sequences of hashable
        Ordered alphabets.
    kernel : 2-d array
        ``kernel[i, j]`` is the probability of output ``output_labels[j]``
        on input ``input_labels[i]``. Entries are nonnegative and each row
        sums to 1 within tolerance (renormalized once).
    """

    input_labels: tuple = ()
    output_labels: tuple = ()
    kernel: np.ndarray = field(default_factory=lambda: np.eye(1))

    def __init__(self, input_labels, output_labels, kernel):
        input_labels = tuple(input_labels)
        output_labels = tuple(output_labels)
        kernel = np.asarray(kernel, dtype=np.float64)
        if kernel.shape != (len(input_labels), len(output_labels)):
            raise InvalidParameterError("kernel shape must match alphabets")
        if len(set(input_labels)) != len(input_labels):
            raise InvalidParameterError("input labels must be distinct")
        if len(set(output_labels)) != len(output_labels):
            raise InvalidParameterError("output labels must be distinct")
        if np.any(kernel < 0):
            raise InvalidParameterError("kernel entries must be nonnegative")
        sums = kernel.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PROB_SUM_TOL):
            raise InvalidParameterError("kernel rows must sum to 1")
        kernel = kernel / sums[:, None]
        kernel.flags.writeable = False
        object.__setattr__(self, "input_labels", input_labels)
        object.__setattr__(self, "output_labels", output_labels)
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(
            self, "_in_index", {lab: i for i, lab in enumerate(input_labels)}
        )

    def row(self, x: Hashable) -> np.ndarray:
        i = self._in_index.get(x)
        if i is None:
            raise InvalidInputError(f"unknown input symbol {x!r}")
        return self.kernel[i]

    def row_dist(self, x: Hashable) -> Categorical:
        return Categorical(self.output_labels, self.row(x))


def make_krr(k: int, eps0: float) -> Randomizer:
    """k-ary randomized response on the alphabet 1..k.

    Keeps the input with probability (e^eps0 - 1) / (e^eps0 + k - 1) and
    otherwise outputs a uniform symbol, so the kernel has diagonal
    e^eps0 / (e^eps0 + k - 1) and off-diagonal 1 / (e^eps0 + k - 1).
    Only finite eps0 > 0 is supported.
    """
    if k < 2:
        raise InvalidParameterError("k must be at least 2")
    if not (eps0 > 0) or math.isinf(eps0):
        raise InvalidParameterError("eps0 must be positive and finite")
    e = math.exp(eps0)
    denom = e + k - 1
    kernel = np.full((k, k), 1.0 / denom)
    np.fill_diagonal(kernel, e / denom)
    labels = tuple(range(1, k + 1))
    return Randomizer(labels, labels, kernel)


def ldp_epsilon(r: Randomizer) -> float:
    """Local DP parameter of a randomizer (pure, delta = 0).

    Largest log-likelihood ratio log(R_x(y) / R_x'(y)) over outputs y and
    input pairs; ``math.inf`` when some output is possible under one input
    and impossible under another.
    """
    eps = 0.0
    for j in range(len(r.output_labels)):
        col = r.kernel[:, j]
        hi = float(col.max())
        if hi == 0.0:
            continue
        lo = float(col.min())
        if lo == 0.0:
            return math.inf
        eps = max(eps, math.log(hi / lo))
    return eps


@dataclass(frozen=True)
class BlanketDecomposition:
    """Common-component decomposition of a family of distributions.

    ``gamma`` is the total coordinatewise-infimum mass. Each source i
    satisfies source_i = gamma * blanket + (1 - gamma) * leftovers[i].
    ``generalized_blanket`` places the un-normalized infimum on the
    original alphabet and mass 1 - gamma on ``BOT``. ``blanket`` is None
    when gamma = 0 and ``leftovers`` is empty when gamma = 1.
    """

    gamma: float
    blanket: Categorical | None
    generalized_blanket: Categorical
    leftovers: Mapping[Hashable, Categorical]


def _decompose(sources: Sequence[Categorical], keys: Sequence[Hashable]) -> BlanketDecomposition:
    labels = []
    seen = set()
    for s in sources:
        for lab in s.labels:
            if lab not in seen:
                seen.add(lab)
                labels.append(lab)
    labels = tuple(labels)
    rows = np.array([[s.prob(l) for l in labels] for s in sources])
    inf_row = rows.min(axis=0)
    gamma = float(inf_row.sum())
    gen_labels = labels + (BOT,)

    if gamma == 0.0:
        generalized = Categorical(gen_labels, np.append(inf_row, 1.0))
        leftovers = {k: Categorical(labels, rows[i]) for i, k in enumerate(keys)}
        return BlanketDecomposition(0.0, None, generalized, leftovers)

    if gamma >= 1.0 - 1e-12:
        blanket = Categorical(labels, inf_row)
        generalized = Categorical(gen_labels, np.append(blanket.probs, 0.0))
        return BlanketDecomposition(1.0, blanket, generalized, {})

    blanket = Categorical(labels, inf_row / gamma)
    generalized = Categorical(gen_labels, np.append(inf_row, 1.0 - gamma))
    leftovers = {}
    for i, k in enumerate(keys):
        res = np.maximum(rows[i] - inf_row, 0.0)
        leftovers[k] = Categorical(labels, res / res.sum())
    return BlanketDecomposition(gamma, blanket, generalized, leftovers)


def blanket_of_family(sources: Sequence[Categorical]) -> BlanketDecomposition:
    """Blanket decomposition of a family of distributions.

    gamma = sum_y inf_i P_i(y); leftovers are keyed by the position of
    each source in ``sources``.
    """
    if len(sources) == 0:
        raise InvalidParameterError("need at least one source")
    return _decompose(sources, range(len(sources)))


def blanket_of_randomizer(r: Randomizer) -> BlanketDecomposition:
    """Blanket decomposition of a randomizer's rows, keyed by input label."""
    sources = [r.row_dist(x) for x in r.input_labels]
    return _decompose(sources, r.input_labels)


def postprocess_blanket(
    z_reduced: Sequence,
    leftovers: Sequence[Categorical],
    rng: np.random.Generator,
) -> list:
    """Replace ``BOT`` placeholders with draws from distinct users' leftovers.

    ``z_reduced`` has n entries; ``leftovers`` holds the n - 1 leftover
    distributions of the non-target users, in order. Placeholders are
    processed left to right; each consumes a uniformly chosen not-yet-used
    user and one sample from that user's leftover. Non-placeholder entries
    pass through unchanged.
    """
    n = len(z_reduced)
    if len(leftovers) != n - 1:
        raise InvalidInputError("expected one leftover per non-target user")
    bot_positions = [i for i, v in enumerate(z_reduced) if v is BOT]
    if len(bot_positions) > len(leftovers):
        raise InvalidInputError("more placeholders than available users")
    out = list(z_reduced)
    unused = list(range(len(leftovers)))
    for pos in bot_positions:
        j = unused.pop(int(rng.integers(len(unused))))
        out[pos] = leftovers[j].sample(rng)
    return out
