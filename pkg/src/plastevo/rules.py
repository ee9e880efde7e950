"""Discrete synaptic plasticity rules and their weight-update semantics.

A rule is a learning rate ``eta`` plus eight ternary outcomes, one per
combination of reinforcement signal m in {-1, +1} and the binary
activation pair (pre, post). After each reinforced action the outcome for
every synapse is looked up from the activations recorded on the forward
pass and applied as ``w += eta * outcome``; the incoming weight row of
every post-synaptic neuron (bias included) is then L2-normalized, which
bounds growth and makes incoming weights compete.

Outcome layout: index = (0 if m == -1 else 4) + 2*pre + post, i.e. the
first four entries are the m = -1 column (pre,post) = 00,01,10,11 and the
last four the m = +1 column. The discrete part of the search space is
3^8 = 6561 tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import ActivationRecord, Network

__all__ = [
    "PlasticityRule",
    "outcome_index",
    "lookup",
    "apply_update",
    "hebbian_update_inplace",
    "normalize_rows_inplace",
    "parse_rule",
    "format_rule",
    "random_rule",
    "NAMED_RULES",
]

_VALID_OUTCOMES = (-1, 0, 1)


@dataclass(frozen=True)
class PlasticityRule:
    """Learning rate plus the eight ternary outcomes, m=-1 block first."""

    eta: float
    outcomes: tuple[int, int, int, int, int, int, int, int]

    def __post_init__(self):
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must be in [0, 1), got {self.eta}")
        if len(self.outcomes) != 8:
            raise ValueError("a rule has exactly 8 outcomes")
        if any(o not in _VALID_OUTCOMES for o in self.outcomes):
            raise ValueError(f"outcomes must be -1, 0 or +1, got {self.outcomes}")
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))


def outcome_index(m: int, a_pre: int, a_post: int) -> int:
    """Position of the (m, pre, post) outcome in the 8-entry table."""
    if m not in (-1, 1):
        raise ValueError(f"m must be -1 or +1, got {m}")
    if a_pre not in (0, 1) or a_post not in (0, 1):
        raise ValueError("activations must be 0 or 1")
    return (0 if m == -1 else 4) + 2 * a_pre + a_post


def lookup(rule: PlasticityRule, m: int, a_pre: int, a_post: int) -> int:
    return rule.outcomes[outcome_index(m, a_pre, a_post)]


def normalize_rows_inplace(matrix: np.ndarray) -> int:
    """L2-normalize each row (bias column included); returns degenerate count.

    A row whose sum of squares is exactly zero cannot be normalized; it is
    left untouched and counted as one degenerate event.
    """
    n_deg = 0
    rows, cols = matrix.shape
    for i in range(rows):
        s = 0.0
        for j in range(cols):
            s += matrix[i, j] * matrix[i, j]
        if s == 0.0:
            n_deg += 1
            continue
        norm = math.sqrt(s)
        for j in range(cols):
            matrix[i, j] = matrix[i, j] / norm
    return n_deg


def hebbian_update_inplace(
    w_hidden: np.ndarray,
    w_out: np.ndarray,
    eta: float,
    outcomes: tuple[int, ...],
    input_bits: tuple[int, ...],
    hidden_bits: tuple[int, ...],
    output_bits: tuple[int, ...],
    m: int,
) -> int:
    """Apply one reinforced update to both layers, then normalize all rows.

    Every synapse updates, including bias weights (the bias acts as an
    always-active pre-synaptic input). Returns the number of degenerate
    (all-zero, skipped) rows encountered during normalization.
    """
    base = 0 if m == -1 else 4
    n_in = len(input_bits)
    n_hidden = len(hidden_bits)
    for i in range(n_hidden):
        post = hidden_bits[i]
        for j in range(n_in):
            w_hidden[i, j] += eta * outcomes[base + 2 * input_bits[j] + post]
        w_hidden[i, n_in] += eta * outcomes[base + 2 + post]
    for k in range(len(output_bits)):
        post = output_bits[k]
        for i in range(n_hidden):
            w_out[k, i] += eta * outcomes[base + 2 * hidden_bits[i] + post]
        w_out[k, n_hidden] += eta * outcomes[base + 2 + post]
    n_deg = normalize_rows_inplace(w_hidden)
    n_deg += normalize_rows_inplace(w_out)
    return n_deg


def apply_update(
    net: Network, acts: ActivationRecord, m: int, rule: PlasticityRule
) -> tuple[Network, int]:
    """Reinforced weight update as a pure function of (net, acts, m, rule).

    With m = 0 the network is returned untouched (no update, no
    normalization); otherwise a fresh network is returned along with the
    number of degenerate rows skipped during normalization.
    """
    if m == 0:
        return net, 0
    if m not in (-1, 1):
        raise ValueError(f"m must be -1, 0 or +1, got {m}")
    out = net.copy()
    n_deg = hebbian_update_inplace(
        out.w_hidden,
        out.w_out,
        rule.eta,
        rule.outcomes,
        acts.input_bits,
        acts.hidden_bits,
        acts.output_bits,
        m,
    )
    return out, n_deg


def format_rule(rule: PlasticityRule) -> str:
    """Render as ``eta=<decimal>;m-1=<00>,<01>,<10>,<11>;m+1=<00>,<01>,<10>,<11>``."""
    neg = ",".join(str(o) for o in rule.outcomes[:4])
    pos = ",".join(str(o) for o in rule.outcomes[4:])
    return f"eta={rule.eta!r};m-1={neg};m+1={pos}"


def parse_rule(text: str) -> PlasticityRule:
    """Inverse of format_rule; raises ValueError on any malformed field."""
    parts = text.strip().split(";")
    if len(parts) != 3:
        raise ValueError(f"expected 3 ';'-separated fields, got {len(parts)}: {text!r}")
    keys = ("eta", "m-1", "m+1")
    values = []
    for part, key in zip(parts, keys):
        head, sep, tail = part.partition("=")
        if not sep or head.strip() != key:
            raise ValueError(f"expected field {key!r} in {part!r}")
        values.append(tail.strip())
    try:
        eta = float(values[0])
    except ValueError:
        raise ValueError(f"bad eta: {values[0]!r}") from None
    outcomes = []
    for block in values[1:]:
        items = block.split(",")
        if len(items) != 4:
            raise ValueError(f"each m block needs 4 outcomes, got {block!r}")
        for item in items:
            try:
                o = int(item)
            except ValueError:
                raise ValueError(f"bad outcome: {item!r}") from None
            outcomes.append(o)
    return PlasticityRule(eta, tuple(outcomes))


def random_rule(rng: np.random.Generator) -> PlasticityRule:
    """Sample eta uniform on [0, 1) and each outcome uniform on {-1, 0, +1}.

    Consumes exactly 9 uniform draws in a fixed order so seeded streams
    reproduce.
    """
    eta = rng.random()
    outcomes = tuple(int(rng.random() * 3.0) - 1 for _ in range(8))
    return PlasticityRule(eta, outcomes)


# Reference rules used throughout the tests and the command line. The two
# "best" entries are the top foraging and pursuit rules recovered by the
# genetic search; the other three are hand-written baselines (pure
# coactivity punishment, and Hebbian variants that ignore the sign
# structure of the task).
NAMED_RULES: dict[str, PlasticityRule] = {
    "foraging-best": PlasticityRule(0.0375, (0, 0, 1, -1, 0, 0, 0, 0)),
    "foraging-punish-coactive": PlasticityRule(0.04, (0, 0, 0, -1, 0, 0, 0, 0)),
    "hebbian-extended": PlasticityRule(0.01, (0, 0, 1, -1, 0, -1, 0, 1)),
    "hebbian": PlasticityRule(0.01, (0, 0, 0, -1, 0, 0, 0, 1)),
    "pp-best": PlasticityRule(0.42, (0, -1, 1, 0, 1, -1, 0, 0)),
}
