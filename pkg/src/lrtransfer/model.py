"""Deep MLP f(x) = V^T W_L ... W_1 W_0 x with optional ReLU, no biases.

The model is width n, depth L hidden-to-hidden layers, input dim d;
only W_1..W_L are trained unless the train_input/train_head flags are
set.  All width scaling (init std, forward multipliers, lr exponents)
comes from the Parametrization.

For the linear activation the forward factorizes into chains

    a_{-1,i} = x_i,   a_{l,i} = g_l W_l a_{l-1,i}
    b_{L+1}  = g_V V, b_l     = g_l W_l^T b_{l+1}

(g_* are the forward multipliers, folded into the chains) so that
f(x_i) = b_{l+1} . a_{l,i} for every l, and the loss gradient w.r.t.
W_l is the rank-1 sum (1/m) sum_i chi_i g_l b_{l+1} a_{l-1,i}^T with
chi_i = f(x_i) - y_i.  ForwardCache holds exactly these quantities.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .parametrization import Parametrization, init_std, multiplier
from .rng import RngStream

ACTIVATIONS = ("linear", "relu")


# ---------------------------------------------------------------------------
# dataset


@dataclass
class Dataset:
    """Training data plus the cached input kernel K_ij = <x_i, x_j> / d."""

    X: np.ndarray  # (m, d)
    y: np.ndarray  # (m,)
    K: np.ndarray  # (m, m)
    omega: np.ndarray | None = None  # teacher vector when synthetic

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def kernel_matrix(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return (X @ X.T) / X.shape[1]


def make_dataset(X: np.ndarray, y: np.ndarray, omega: np.ndarray | None = None) -> Dataset:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be (m, d), got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y must be ({X.shape[0]},), got shape {y.shape}")
    return Dataset(X=X, y=y, K=kernel_matrix(X), omega=omega)


def subsample(data: Dataset, m: int) -> Dataset:
    """First m rows; rows are iid so a prefix is an unbiased subsample."""
    if not 0 < m <= data.m:
        raise ValueError(f"subsample size {m} out of range (1..{data.m})")
    return make_dataset(data.X[:m], data.y[:m], omega=data.omega)


# ---------------------------------------------------------------------------
# model state


@dataclass
class ModelState:
    param: Parametrization
    n: int
    L: int
    d: int
    activation: str
    W0: np.ndarray          # (n, d)
    Ws: list[np.ndarray]    # L matrices (n, n), Ws[l-1] is W_l
    V: np.ndarray           # (n,)
    train_input: bool = False
    train_head: bool = False
    step: int = 0

    def copy(self) -> "ModelState":
        return ModelState(
            param=self.param, n=self.n, L=self.L, d=self.d,
            activation=self.activation,
            W0=self.W0.copy(), Ws=[w.copy() for w in self.Ws], V=self.V.copy(),
            train_input=self.train_input, train_head=self.train_head,
            step=self.step,
        )

    def multipliers(self) -> tuple[float, float, float]:
        p = self.param
        return (
            multiplier(p, "input", self.n, self.d),
            multiplier(p, "hidden", self.n, self.d),
            multiplier(p, "head", self.n, self.d),
        )


def init_model(
    p: Parametrization,
    n: int,
    L: int,
    d: int,
    rng: RngStream,
    activation: str = "linear",
    train_input: bool = False,
    train_head: bool = False,
    dtype=np.float64,
) -> ModelState:
    """Sample a fresh model.  Draw order is W0, W1..WL, V (fixed for replay)."""
    if L < 1:
        raise ValueError("depth L must be >= 1")
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    W0 = linalg.sample_gaussian_matrix(n, d, init_std(p, "input", n, d), rng).astype(dtype, copy=False)
    Ws = [
        linalg.sample_gaussian_matrix(n, n, init_std(p, "hidden", n, d), rng).astype(dtype, copy=False)
        for _ in range(L)
    ]
    V = linalg.sample_gaussian_vector(n, init_std(p, "head", n, d), rng).astype(dtype, copy=False)
    return ModelState(
        param=p, n=n, L=L, d=d, activation=activation,
        W0=W0, Ws=Ws, V=V,
        train_input=train_input, train_head=train_head,
    )


# ---------------------------------------------------------------------------
# forward


def batch_forward(model: ModelState, X: np.ndarray) -> np.ndarray:
    """Predictions for a batch X of shape (m, d)."""
    g_in, g_hid, g_head = model.multipliers()
    relu = model.activation == "relu"
    H = g_in * (model.W0 @ X.T)
    if relu:
        np.maximum(H, 0.0, out=H)
    for W in model.Ws:
        H = g_hid * (W @ H)
        if relu:
            np.maximum(H, 0.0, out=H)
    return g_head * (model.V @ H)


def forward(model: ModelState, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=model.W0.dtype)
    if x.shape != (model.d,):
        raise ValueError(f"input must have shape ({model.d},), got {x.shape}")
    return float(batch_forward(model, x[None, :])[0])


def loss(model: ModelState, data: Dataset) -> float:
    chi = batch_forward(model, data.X) - data.y
    return float(0.5 * np.mean(chi * chi))


# ---------------------------------------------------------------------------
# linear chains


@dataclass
class ForwardCache:
    """Multiplier-inclusive chains for a linear model on a dataset.

    a[l] is the (dim x m) matrix of forward chains a_{l,i} for
    l = -1..L (a[-1] = X^T), b[l] the backward chain vectors for
    l = 1..L+1 (b[L+1] = g_V V).  preds and chi are length m.
    """

    a: dict[int, np.ndarray]
    b: dict[int, np.ndarray]
    preds: np.ndarray
    chi: np.ndarray


def forward_cache(model: ModelState, data: Dataset) -> ForwardCache:
    if model.activation != "linear":
        raise ValueError("forward chains are only defined for the linear activation")
    g_in, g_hid, g_head = model.multipliers()
    a: dict[int, np.ndarray] = {-1: data.X.T.astype(model.W0.dtype, copy=False)}
    a[0] = g_in * (model.W0 @ a[-1])
    for l in range(1, model.L + 1):
        a[l] = g_hid * (model.Ws[l - 1] @ a[l - 1])
    b: dict[int, np.ndarray] = {model.L + 1: g_head * model.V}
    for l in range(model.L, 0, -1):
        b[l] = g_hid * (model.Ws[l - 1].T @ b[l + 1])
    preds = b[model.L + 1] @ a[model.L]
    chi = preds - data.y.astype(preds.dtype, copy=False)
    return ForwardCache(a=a, b=b, preds=preds, chi=chi)


# ---------------------------------------------------------------------------
# gradients


@dataclass
class Gradients:
    W0: np.ndarray | None
    Ws: list[np.ndarray]
    V: np.ndarray | None


def gradients(model: ModelState, data: Dataset, cache: ForwardCache | None = None) -> Gradients:
    """Full-batch loss gradients for the trained weights."""
    if model.activation == "linear":
        return _gradients_linear(model, data, cache)
    return _gradients_relu(model, data)


def _gradients_linear(model: ModelState, data: Dataset, cache: ForwardCache | None) -> Gradients:
    if cache is None:
        cache = forward_cache(model, data)
    g_in, g_hid, g_head = model.multipliers()
    m = data.m
    w = cache.chi / m
    gWs = []
    for l in range(1, model.L + 1):
        s = cache.a[l - 1] @ w
        gWs.append(g_hid * linalg.outer(cache.b[l + 1], s))
    gW0 = g_in * linalg.outer(cache.b[1], cache.a[-1] @ w) if model.train_input else None
    gV = g_head * (cache.a[model.L] @ w) if model.train_head else None
    return Gradients(W0=gW0, Ws=gWs, V=gV)


def _gradients_relu(model: ModelState, data: Dataset) -> Gradients:
    g_in, g_hid, g_head = model.multipliers()
    X = data.X.astype(model.W0.dtype, copy=False)
    m = data.m
    # Forward, keeping post-activation outputs per layer.
    H = [np.maximum(g_in * (model.W0 @ X.T), 0.0)]
    for W in model.Ws:
        H.append(np.maximum(g_hid * (W @ H[-1]), 0.0))
    preds = g_head * (model.V @ H[-1])
    w = (preds - data.y) / m
    gV = g_head * (H[-1] @ w) if model.train_head else None
    # delta = dL/d(pre-activation of layer l); ReLU mask is H > 0.
    delta = (g_head * model.V)[:, None] * w[None, :]
    delta = delta * (H[-1] > 0)
    gWs: list[np.ndarray] = [None] * model.L
    for l in range(model.L, 0, -1):
        gWs[l - 1] = g_hid * (delta @ H[l - 1].T)
        if l > 1 or model.train_input:
            delta = g_hid * (model.Ws[l - 1].T @ delta)
            delta = delta * (H[l - 1] > 0)
    gW0 = g_in * (delta @ X) if model.train_input else None
    return Gradients(W0=gW0, Ws=gWs, V=gV)
