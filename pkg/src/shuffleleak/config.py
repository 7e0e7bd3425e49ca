"""Experiment configuration: JSON literals, parsing, and validation.

A config is a single JSON document. Distribution literals:
``{"type": "uniform", "m": 4}``, ``{"type": "zipf", "m": 4, "alpha": 0.7}``,
``{"type": "explicit", "labels": [...], "probs": [...]}``. Mechanism
literals: ``{"type": "krr", "k": 4, "eps0": 1.0}`` or
``{"type": "explicit", "kernel": [[...], ...]}`` with optional label lists.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidParameterError
from .exact import (
    DEFAULT_LIMITS,
    ExactLimits,
    states_input_mi,
    states_position_dp,
    states_shuffle_only,
)
from .mechanisms import Randomizer, make_krr
from .probability import Categorical, make_uniform, make_zipf

MODES = ("shuffle_only", "shuffle_dp")
QUANTITIES = ("IK", "IY1", "IX1")
BASE_METHODS = ("exact", "mc", "asym", "bounds")


@dataclass(frozen=True)
class Diagnostic:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "shuffle_only"
    quantity: str = "IY1"
    p: Categorical | None = None
    q: Categorical | None = None  # None means the covers share p
    mechanism: Randomizer | None = None
    prior: Categorical | None = None  # None means uniform over mechanism inputs
    x_inputs: tuple | None = None  # None means cycle through mechanism inputs
    n_grid: tuple = ()
    samples: int = 100_000
    seed: int = 0
    method: str = "all"
    label: str = ""

    def with_overrides(self, samples=None, seed=None) -> "ExperimentConfig":
        cfg = self
        if samples is not None:
            cfg = replace(cfg, samples=samples)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        return cfg


def parse_distribution(lit, path: str, diags: list[Diagnostic]) -> Categorical | None:
    if not isinstance(lit, dict) or "type" not in lit:
        diags.append(Diagnostic(path, "expected an object with a 'type' field"))
        return None
    kind = lit["type"]
    try:
        if kind == "uniform":
            return make_uniform(int(lit["m"]))
        if kind == "zipf":
            return make_zipf(int(lit["m"]), float(lit["alpha"]))
        if kind == "explicit":
            labels = lit.get("labels")
            probs = lit["probs"]
            if labels is None:
                labels = list(range(1, len(probs) + 1))
            return Categorical(tuple(_freeze(lab) for lab in labels), probs)
    except (KeyError, TypeError, ValueError, InvalidParameterError) as exc:
        diags.append(Diagnostic(path, f"invalid {kind} literal: {exc}"))
        return None
    diags.append(Diagnostic(path, f"unknown distribution type {kind!r}"))
    return None


def parse_mechanism(lit, path: str, diags: list[Diagnostic]) -> Randomizer | None:
    if not isinstance(lit, dict) or "type" not in lit:
        diags.append(Diagnostic(path, "expected an object with a 'type' field"))
        return None
    kind = lit["type"]
    try:
        if kind == "krr":
            return make_krr(int(lit["k"]), float(lit["eps0"]))
        if kind == "explicit":
            kernel = lit["kernel"]
            n_in = len(kernel)
            n_out = len(kernel[0]) if n_in else 0
            ins = lit.get("input_labels", list(range(1, n_in + 1)))
            outs = lit.get("output_labels", list(range(1, n_out + 1)))
            return Randomizer(
                tuple(_freeze(x) for x in ins),
                tuple(_freeze(x) for x in outs),
                kernel,
            )
    except (KeyError, TypeError, ValueError, IndexError, InvalidParameterError) as exc:
        diags.append(Diagnostic(path, f"invalid {kind} literal: {exc}"))
        return None
    diags.append(Diagnostic(path, f"unknown mechanism type {kind!r}"))
    return None


def _freeze(value):
    return tuple(value) if isinstance(value, list) else value


def methods_of(cfg: ExperimentConfig) -> tuple[str, ...]:
    """Expand the method selector into base method names."""
    if cfg.method == "all":
        return BASE_METHODS
    return tuple(cfg.method.split("+"))


def parse_config(doc) -> tuple[ExperimentConfig | None, list[Diagnostic]]:
    """Build a config from a parsed JSON document, collecting diagnostics.

    Returns (config, diagnostics); the config is None when the document is
    too malformed to interpret. A parseable config may still carry
    diagnostics; it is runnable only when the list is empty.
    """
    diags: list[Diagnostic] = []
    if not isinstance(doc, dict):
        return None, [Diagnostic("$", "config must be a JSON object")]

    mode = doc.get("mode", "shuffle_only")
    if mode not in MODES:
        diags.append(Diagnostic("mode", f"must be one of {MODES}"))
    quantity = doc.get("quantity", "IY1")
    if quantity not in QUANTITIES:
        diags.append(Diagnostic("quantity", f"must be one of {QUANTITIES}"))

    p = q = mechanism = prior = None
    if "P" in doc or "p" in doc:
        p = parse_distribution(doc.get("P", doc.get("p")), "P", diags)
    if "Q" in doc or "q" in doc:
        q = parse_distribution(doc.get("Q", doc.get("q")), "Q", diags)
    if "mechanism" in doc:
        mechanism = parse_mechanism(doc["mechanism"], "mechanism", diags)
    if "prior" in doc:
        prior = parse_distribution(doc["prior"], "prior", diags)

    n_grid = doc.get("n_grid", [])
    if (
        not isinstance(n_grid, list)
        or not n_grid
        or any(not isinstance(n, int) or n < 1 for n in n_grid)
    ):
        diags.append(Diagnostic("n_grid", "must be a nonempty list of positive integers"))
        n_grid = [n for n in n_grid if isinstance(n, int) and n >= 1] if isinstance(n_grid, list) else []

    samples = doc.get("samples", 100_000)
    if not isinstance(samples, int) or samples < 1:
        diags.append(Diagnostic("samples", "must be a positive integer"))
        samples = max(1, samples if isinstance(samples, int) else 1)

    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        diags.append(Diagnostic("seed", "must be an integer"))
        seed = 0

    method = doc.get("method", "all")
    if method != "all" and any(m not in BASE_METHODS for m in str(method).split("+")):
        diags.append(
            Diagnostic("method", "must be 'all' or a '+'-joined subset of "
                       f"{BASE_METHODS}")
        )
        method = "all"

    x_inputs = doc.get("x_inputs")
    if x_inputs is not None:
        if not isinstance(x_inputs, list) or not x_inputs:
            diags.append(Diagnostic("x_inputs", "must be a nonempty list"))
            x_inputs = None
        else:
            x_inputs = tuple(_freeze(x) for x in x_inputs)

    cfg = ExperimentConfig(
        mode=mode if mode in MODES else "shuffle_only",
        quantity=quantity if quantity in QUANTITIES else "IY1",
        p=p,
        q=q,
        mechanism=mechanism,
        prior=prior,
        x_inputs=x_inputs,
        n_grid=tuple(n_grid),
        samples=samples,
        seed=seed,
        method=method,
        label=str(doc.get("label", "")),
    )
    diags.extend(validate_config(cfg))
    return cfg, diags


def validate_config(
    cfg: ExperimentConfig, limits: ExactLimits = DEFAULT_LIMITS
) -> list[Diagnostic]:
    """Semantic checks: mode requirements, method support, exact feasibility."""
    diags: list[Diagnostic] = []
    methods = methods_of(cfg)
    explicit = cfg.method != "all"

    if cfg.mode == "shuffle_only":
        if cfg.p is None:
            diags.append(Diagnostic("P", "shuffle_only requires a target distribution"))
        if cfg.quantity == "IX1":
            diags.append(
                Diagnostic("quantity", "unrandomized messages equal inputs; use IY1")
            )
        if explicit and "bounds" in methods:
            diags.append(Diagnostic("method", "no bound methods in shuffle_only mode"))
    else:
        if cfg.mechanism is None:
            diags.append(Diagnostic("mechanism", "shuffle_dp requires a mechanism"))
        if cfg.quantity == "IY1" and explicit and set(methods) - {"bounds", "asym"}:
            diags.append(
                Diagnostic("method", "shuffle_dp IY1 supports only bound methods")
            )
        if cfg.quantity == "IK" and explicit and "mc" in methods:
            diags.append(Diagnostic("method", "no mc estimator for shuffle_dp IK"))
        if cfg.prior is not None and cfg.mechanism is not None:
            known = set(cfg.mechanism.input_labels)
            if any(lab not in known for lab in cfg.prior.support()):
                diags.append(Diagnostic("prior", "prior support must be mechanism inputs"))
        if cfg.x_inputs is not None:
            if cfg.mechanism is not None:
                known = set(cfg.mechanism.input_labels)
                if any(x not in known for x in cfg.x_inputs):
                    diags.append(Diagnostic("x_inputs", "unknown mechanism input symbol"))
            bad = [n for n in cfg.n_grid if n != len(cfg.x_inputs)]
            if bad:
                diags.append(
                    Diagnostic("x_inputs", "explicit x_inputs requires n_grid entries "
                               f"equal to its length {len(cfg.x_inputs)}")
                )

    if explicit and "exact" in methods:
        for n in cfg.n_grid:
            states = _exact_states(cfg, n)
            if states is not None and states > limits.max_states:
                diags.append(
                    Diagnostic(
                        "n_grid",
                        f"resource-limit: exact method at n={n} needs {states} states "
                        f"(ceiling {limits.max_states})",
                    )
                )
    return diags


def _exact_states(cfg: ExperimentConfig, n: int) -> int | None:
    if cfg.mode == "shuffle_only":
        if cfg.p is None:
            return None
        q = cfg.q if cfg.q is not None else cfg.p
        if cfg.quantity == "IY1" and _matched(cfg):
            return 0  # closed form, no enumeration
        return states_shuffle_only(cfg.p, q, n)
    if cfg.mechanism is None:
        return None
    k = len(cfg.mechanism.output_labels)
    if cfg.quantity == "IX1":
        return states_input_mi(n, k)
    if cfg.quantity == "IK":
        return states_position_dp(n, k)
    return None


def _matched(cfg: ExperimentConfig) -> bool:
    return cfg.q is None or (cfg.p is not None and cfg.p.same_mass(cfg.q))
