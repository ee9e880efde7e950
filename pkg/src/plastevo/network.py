"""Fixed-topology feed-forward networks with binary step activations.

One hidden layer. Inputs and hidden activations are bits; the output layer
is winner-take-all over the real pre-activation sums. Each layer carries a
bias modeled as an extra always-on input whose weight sits in the last
column of the weight matrix, so it takes part in plasticity and
normalization like any other incoming weight.

The arithmetic here is deliberately written as plain sequential
accumulation (index order, one accumulator per neuron). The compiled
kernel and the pure Python stepper follow the same order, which keeps all
three bit-for-bit interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = ["Network", "ActivationRecord", "init_network", "forward"]


@dataclass(frozen=True)
class ActivationRecord:
    """Activations of one forward pass; all bits, output one-hot at ``action``."""

    input_bits: tuple[int, ...]
    hidden_bits: tuple[int, ...]
    output_bits: tuple[int, ...]
    action: int


@dataclass
class Network:
    """Weight matrices; last column of each is the bias weight."""

    w_hidden: np.ndarray  # (n_hidden, n_in + 1)
    w_out: np.ndarray     # (n_out, n_hidden + 1)

    def __post_init__(self):
        self.w_hidden = np.ascontiguousarray(self.w_hidden, dtype=np.float64)
        self.w_out = np.ascontiguousarray(self.w_out, dtype=np.float64)
        if self.w_hidden.ndim != 2 or self.w_out.ndim != 2:
            raise ConfigurationError("weight matrices must be 2-D")
        if self.w_out.shape[1] != self.w_hidden.shape[0] + 1:
            raise ConfigurationError(
                f"output matrix expects {self.w_hidden.shape[0]} hidden units + bias, "
                f"got {self.w_out.shape[1]} columns"
            )
        if not (np.isfinite(self.w_hidden).all() and np.isfinite(self.w_out).all()):
            raise ConfigurationError("weights must be finite")

    @property
    def n_in(self) -> int:
        return self.w_hidden.shape[1] - 1

    @property
    def n_hidden(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def n_out(self) -> int:
        return self.w_out.shape[0]

    def copy(self) -> "Network":
        return Network(self.w_hidden.copy(), self.w_out.copy())


def init_network(n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> Network:
    """Draw every weight i.i.d. uniform on [-1, 1].

    Draw order is fixed (hidden matrix row-major, then output matrix) so a
    seeded generator always produces the same network.
    """
    if min(n_in, n_hidden, n_out) < 1:
        raise ConfigurationError("layer sizes must be >= 1")
    w_hidden = rng.uniform(-1.0, 1.0, size=(n_hidden, n_in + 1))
    w_out = rng.uniform(-1.0, 1.0, size=(n_out, n_hidden + 1))
    return Network(w_hidden, w_out)


def _layer_sums(matrix: np.ndarray, bits: Sequence[int]) -> list[float]:
    # Sequential accumulation, bias (input 1) added last.
    n = len(bits)
    sums = []
    for row in matrix:
        s = 0.0
        for j in range(n):
            s += row[j] * bits[j]
        s += row[n]
        sums.append(s)
    return sums


def forward(net: Network, input_bits: Sequence[int]) -> ActivationRecord:
    """One pass: step-activated hidden layer, argmax action on the output sums.

    Ties on the output argmax break at the lowest index, so the pass is a
    pure function of (net, input_bits).
    """
    bits = tuple(int(b) for b in input_bits)
    if len(bits) != net.n_in:
        raise ValueError(f"expected {net.n_in} input bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("input bits must be 0 or 1")

    hidden = tuple(1 if s > 0.0 else 0 for s in _layer_sums(net.w_hidden, bits))

    out_sums = _layer_sums(net.w_out, hidden)
    action = 0
    for i in range(1, net.n_out):
        if out_sums[i] > out_sums[action]:
            action = i
    output = tuple(1 if i == action else 0 for i in range(net.n_out))
    return ActivationRecord(bits, hidden, output, action)
