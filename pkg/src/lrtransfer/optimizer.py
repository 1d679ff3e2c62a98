"""Full-batch GD and Adam on the trained weights, plus a train driver.

Updates always use the parametrization's effective learning rate
eta * n^-c; a trained W_0 additionally gets the input_lr width factor.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Dataset, Gradients, ModelState, gradients, loss
from .parametrization import effective_lr, input_lr


def _trained(model: ModelState, grads: Gradients):
    """Yield (key, weight, gradient, lr scale relative to effective lr)."""
    n = model.n
    extra_in = float(n) ** model.param.input_lr_exponent
    if model.train_input:
        yield "W0", model.W0, grads.W0, extra_in
    for l in range(1, model.L + 1):
        yield f"W{l}", model.Ws[l - 1], grads.Ws[l - 1], 1.0
    if model.train_head:
        yield "V", model.V, grads.V, 1.0


def gd_step(model: ModelState, grads: Gradients, eta_base: float) -> None:
    lr = effective_lr(model.param, eta_base, model.n)
    for _, w, g, scale in _trained(model, grads):
        w -= (lr * scale) * g
    model.step += 1


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(model: ModelState, adam: AdamState, grads: Gradients, eta_base: float) -> None:
    lr = effective_lr(model.param, eta_base, model.n)
    adam.t += 1
    bc1 = 1.0 - adam.beta1 ** adam.t
    bc2 = 1.0 - adam.beta2 ** adam.t
    for key, w, g, scale in _trained(model, grads):
        if key not in adam.m:
            adam.m[key] = np.zeros_like(w)
            adam.v[key] = np.zeros_like(w)
        m = adam.m[key]
        v = adam.v[key]
        m *= adam.beta1
        m += (1.0 - adam.beta1) * g
        v *= adam.beta2
        v += (1.0 - adam.beta2) * (g * g)
        w -= (lr * scale) * (m / bc1) / (np.sqrt(v / bc2) + adam.eps)
    model.step += 1


def train(
    model: ModelState,
    data: Dataset,
    eta_base: float,
    steps: int,
    optimizer: str = "gd",
    record_steps=None,
    adam: AdamState | None = None,
) -> dict[int, float]:
    """Run `steps` full-batch updates in place; return {step: loss after it}.

    record_steps defaults to {steps}.  A non-finite loss is recorded as
    math.inf and poisons every later recorded step (training stops).
    """
    if optimizer not in ("gd", "adam"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    record = sorted(set(record_steps) if record_steps is not None else {steps})
    if record and (record[0] < 1 or record[-1] > steps):
        raise ValueError("record_steps must lie in 1..steps")
    if optimizer == "adam" and adam is None:
        adam = AdamState()
    out: dict[int, float] = {}
    probe = model.Ws[-1]
    with np.errstate(all="ignore"):
        for t in range(1, steps + 1):
            g = gradients(model, data)
            if optimizer == "gd":
                gd_step(model, g, eta_base)
            else:
                adam_step(model, adam, g, eta_base)
            diverged = not math.isfinite(probe[0, 0])
            if t in record:
                val = math.inf if diverged else loss(model, data)
                if not math.isfinite(val):
                    val = math.inf
                    diverged = True
                out[t] = val
            if diverged:
                for s in record:
                    if s > t:
                        out[s] = math.inf
                break
    return out
