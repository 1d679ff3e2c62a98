"""Width-scaling rules: init variances, forward multipliers, lr exponent.

A parametrization fixes how a width-n model is initialized and trained:

    W_0 ~ N(0, d^-alpha_input)   forward multiplier d^-mult_input
    W_l ~ N(0, n^-alpha_hidden)  forward multiplier n^-mult_hidden
    V   ~ N(0, n^-alpha_head)    forward multiplier n^-mult_head
    effective learning rate = eta * n^-c

Presets:
    mup  alphas (1, 1, 2), no multipliers, c = 0 for GD and 1 for Adam.
         The only initialization difference from SP is the head variance.
    sp   alphas (1, 1, 1), no multipliers, c = 0.
    ntp  unit-variance weights with multipliers d^-1/2 (input) and
         n^-1/2 (hidden, head), c = 0.  Distributionally identical to SP
         at initialization; the multipliers rescale the updates instead.
"""

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Parametrization:
    name: str
    alpha_input: float
    alpha_hidden: float
    alpha_head: float
    mult_input: float = 0.0
    mult_hidden: float = 0.0
    mult_head: float = 0.0
    lr_exponent: float = 0.0
    # Extra width scaling on the input-layer lr when W_0 is trained
    # (mup with GD wants eta * n there, i.e. exponent 1).
    input_lr_exponent: float = 0.0


def mup(optimizer: str = "gd") -> Parametrization:
    if optimizer not in ("gd", "adam"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    c = 1.0 if optimizer == "adam" else 0.0
    # Input-layer lr carries an extra factor n when W_0 is trained, so it
    # is eta * n under GD and eta (width-free) under Adam's c = 1.
    return Parametrization(
        "mup", alpha_input=1.0, alpha_hidden=1.0, alpha_head=2.0,
        lr_exponent=c, input_lr_exponent=1.0,
    )


def sp() -> Parametrization:
    return Parametrization("sp", alpha_input=1.0, alpha_hidden=1.0, alpha_head=1.0)


def ntp() -> Parametrization:
    return Parametrization(
        "ntp", alpha_input=0.0, alpha_hidden=0.0, alpha_head=0.0,
        mult_input=0.5, mult_hidden=0.5, mult_head=0.5,
    )


_PRESETS = {"mup": mup, "sp": sp, "ntp": ntp}


def preset(name: str, optimizer: str = "gd") -> Parametrization:
    if name not in _PRESETS:
        raise ValueError(f"unknown parametrization {name!r}, expected one of {sorted(_PRESETS)}")
    if name == "mup":
        return mup(optimizer)
    return _PRESETS[name]()


def init_std(p: Parametrization, kind: str, n: int, d: int) -> float:
    """Standard deviation (not variance) for a weight of the given kind."""
    if kind == "input":
        return float(d) ** (-0.5 * p.alpha_input)
    if kind == "hidden":
        return float(n) ** (-0.5 * p.alpha_hidden)
    if kind == "head":
        return float(n) ** (-0.5 * p.alpha_head)
    raise ValueError(f"unknown weight kind {kind!r}")


def multiplier(p: Parametrization, kind: str, n: int, d: int) -> float:
    """Constant applied in front of the weight in the forward pass."""
    if kind == "input":
        return float(d) ** (-p.mult_input)
    if kind == "hidden":
        return float(n) ** (-p.mult_hidden)
    if kind == "head":
        return float(n) ** (-p.mult_head)
    raise ValueError(f"unknown weight kind {kind!r}")


def effective_lr(p: Parametrization, eta_base: float, n: int) -> float:
    return eta_base * float(n) ** (-p.lr_exponent)


def input_lr(p: Parametrization, eta_base: float, n: int) -> float:
    """Learning rate for W_0 when it is trained."""
    return effective_lr(p, eta_base, n) * float(n) ** p.input_lr_exponent


def with_lr_exponent(p: Parametrization, c: float) -> Parametrization:
    return replace(p, lr_exponent=c)
