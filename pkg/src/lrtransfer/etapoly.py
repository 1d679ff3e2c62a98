"""Model output and loss as exact polynomials in the learning rate.

For a linear model trained with full-batch GD, every weight after t
steps has entries polynomial in eta, so f^(t)(x) and the loss are
polynomials too.  Two routes are implemented:

  * one_step_output_poly: after a single step the layer-l slot becomes
    (hat W_l - eta D_l) with D_l a rank-1 matrix built from the cached
    chains, so the degree-L output polynomial falls out of an O(L^2)
    recurrence over coefficient vectors, cheap even at large width.
  * multi_step_output_poly: exact t-step propagation with weights kept
    as polynomial-valued matrices (MatrixEtaPoly).  Cost grows quickly
    with degree, hence the entry-count guard; intended for small n.

Both routes must match ordinary training evaluated at any fixed eta,
which is what the tests pin down.
"""

from dataclasses import dataclass

import numpy as np

from .model import Dataset, ForwardCache, ModelState, forward_cache

# Max float64 entries the exact engine may allocate (~256 MB worth).
DEFAULT_MAX_ENTRIES = 1 << 25


# ---------------------------------------------------------------------------
# scalar polynomials


@dataclass(frozen=True)
class EtaPoly:
    """Polynomial in eta with float64 coefficients, coef[k] on eta^k."""

    coef: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coef, dtype=np.float64))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a non-empty 1-d array")
        object.__setattr__(self, "coef", c)

    @property
    def degree(self) -> int:
        return self.coef.shape[0] - 1

    def __call__(self, eta):
        return poly_eval(self, eta)

    def __add__(self, other):
        return poly_add(self, other)

    def __sub__(self, other):
        return poly_add(self, poly_scale(other, -1.0))

    def __mul__(self, other):
        return poly_mul(self, other)

    def shift(self, k: int) -> "EtaPoly":
        """Multiply by eta^k."""
        return EtaPoly(np.concatenate([np.zeros(k), self.coef]))

    def trim(self, tol: float = 0.0) -> "EtaPoly":
        """Drop trailing coefficients with |c| <= tol (keeps degree >= 0)."""
        c = self.coef
        last = c.shape[0]
        while last > 1 and abs(c[last - 1]) <= tol:
            last -= 1
        return EtaPoly(c[:last].copy())


def poly_add(p: EtaPoly, q: EtaPoly) -> EtaPoly:
    d = max(p.coef.shape[0], q.coef.shape[0])
    out = np.zeros(d)
    out[: p.coef.shape[0]] += p.coef
    out[: q.coef.shape[0]] += q.coef
    return EtaPoly(out)


def poly_mul(p: EtaPoly, q: EtaPoly) -> EtaPoly:
    return EtaPoly(np.convolve(p.coef, q.coef))


def poly_scale(p: EtaPoly, s: float) -> EtaPoly:
    return EtaPoly(p.coef * s)


def poly_eval(p: EtaPoly, eta):
    """Horner evaluation; eta may be a scalar or an array."""
    eta = np.asarray(eta, dtype=np.float64)
    acc = np.full(eta.shape, p.coef[-1])
    for c in p.coef[-2::-1]:
        acc = acc * eta + c
    return float(acc) if acc.ndim == 0 else acc


# ---------------------------------------------------------------------------
# matrix-valued polynomials


@dataclass(frozen=True)
class MatrixEtaPoly:
    """Polynomial with matrix coefficients: coef[k] is (r, c) on eta^k."""

    coef: np.ndarray  # (D+1, r, c)

    def __post_init__(self):
        c = np.asarray(self.coef, dtype=np.float64)
        if c.ndim != 3:
            raise ValueError(f"coefficients must be (D+1, r, c), got shape {c.shape}")
        object.__setattr__(self, "coef", c)

    @classmethod
    def const(cls, mat: np.ndarray) -> "MatrixEtaPoly":
        mat = np.asarray(mat, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError("constant must be a matrix")
        return cls(mat[None, :, :])

    @property
    def degree(self) -> int:
        return self.coef.shape[0] - 1

    @property
    def shape(self) -> tuple:
        return self.coef.shape[1:]

    @property
    def T(self) -> "MatrixEtaPoly":
        return MatrixEtaPoly(self.coef.transpose(0, 2, 1))

    def __matmul__(self, other: "MatrixEtaPoly") -> "MatrixEtaPoly":
        a, b = self.coef, other.coef
        if a.shape[2] != b.shape[1]:
            raise ValueError(f"matmul shape mismatch: {self.shape} @ {other.shape}")
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], b.shape[2]))
        for i in range(a.shape[0]):
            for j in range(b.shape[0]):
                out[i + j] += a[i] @ b[j]
        return MatrixEtaPoly(out)

    def __add__(self, other: "MatrixEtaPoly") -> "MatrixEtaPoly":
        if self.shape != other.shape:
            raise ValueError(f"add shape mismatch: {self.shape} vs {other.shape}")
        d = max(self.coef.shape[0], other.coef.shape[0])
        out = np.zeros((d,) + self.shape)
        out[: self.coef.shape[0]] += self.coef
        out[: other.coef.shape[0]] += other.coef
        return MatrixEtaPoly(out)

    def __sub__(self, other: "MatrixEtaPoly") -> "MatrixEtaPoly":
        return self + other.scale(-1.0)

    def scale(self, s: float) -> "MatrixEtaPoly":
        return MatrixEtaPoly(self.coef * s)

    def shift(self, k: int) -> "MatrixEtaPoly":
        pad = np.zeros((k,) + self.shape)
        return MatrixEtaPoly(np.concatenate([pad, self.coef], axis=0))

    def add_const(self, mat: np.ndarray) -> "MatrixEtaPoly":
        out = self.coef.copy()
        out[0] += mat
        return MatrixEtaPoly(out)

    def eval(self, eta: float) -> np.ndarray:
        acc = self.coef[-1].copy()
        for c in self.coef[-2::-1]:
            acc *= eta
            acc += c
        return acc


# ---------------------------------------------------------------------------
# one-step polynomial (cheap at any width)


def _check_poly_model(model: ModelState):
    if model.activation != "linear":
        raise ValueError("eta polynomials are only defined for linear models")
    if model.train_input or model.train_head:
        raise ValueError("eta polynomials assume frozen W_0 and V")


def _one_step_coef(model: ModelState, data: Dataset, A0: np.ndarray, cache: ForwardCache) -> np.ndarray:
    """Coefficient stack (L+1, k) of the one-step polynomial for the k
    probe inputs whose a_0 chains are the columns of A0."""
    g_in, g_hid, g_head = model.multipliers()
    nc = float(model.n) ** (-model.param.lr_exponent)
    w = cache.chi / data.m
    coef_d = g_hid * g_hid * nc
    V = [np.atleast_2d(A0)]
    for l in range(1, model.L + 1):
        W = model.Ws[l - 1]
        s = cache.a[l - 1] @ w
        bnext = cache.b[l + 1]
        new = []
        for k in range(len(V) + 1):
            acc = g_hid * (W @ V[k]) if k < len(V) else None
            if k > 0:
                corr = coef_d * bnext[:, None] * (s @ V[k - 1])[None, :]
                acc = -corr if acc is None else acc - corr
            new.append(acc)
        V = new
    head = g_head * model.V
    return np.stack([head @ v for v in V])


def one_step_output_poly(model: ModelState, data: Dataset, x: np.ndarray, cache: ForwardCache | None = None) -> EtaPoly:
    """f after one GD step at learning rate eta, as a degree-L polynomial."""
    _check_poly_model(model)
    if cache is None:
        cache = forward_cache(model, data)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValueError(f"probe input must have shape ({model.d},), got {x.shape}")
    g_in = model.multipliers()[0]
    a0 = g_in * (model.W0 @ x)
    coef = _one_step_coef(model, data, a0[:, None], cache)
    return EtaPoly(coef[:, 0])


def _chi_square_sum(chi_coef: np.ndarray, m: int) -> EtaPoly:
    """(1/2m) sum_i chi_i(eta)^2 from a (D+1, m) coefficient stack."""
    deg = chi_coef.shape[0] - 1
    out = np.zeros(2 * deg + 1)
    for i in range(chi_coef.shape[1]):
        out += np.convolve(chi_coef[:, i], chi_coef[:, i])
    return EtaPoly(out / (2.0 * m))


def loss_poly(model: ModelState, data: Dataset, t: int = 1, max_entries: int = DEFAULT_MAX_ENTRIES) -> EtaPoly:
    """Training loss after t GD steps as a polynomial in eta.

    t = 1 uses the rank-1 recurrence (any width); t >= 2 uses the exact
    engine and is subject to its size guard.
    """
    _check_poly_model(model)
    if t < 1:
        raise ValueError("t must be >= 1")
    if t == 1:
        cache = forward_cache(model, data)
        coef = _one_step_coef(model, data, cache.a[0], cache)
        coef[0] -= data.y
        return _chi_square_sum(coef, data.m)
    state = _exact_steps(model, data, t, max_entries)
    chi = _exact_chi(state)
    return _chi_square_sum(chi.coef[:, 0, :], data.m)


# ---------------------------------------------------------------------------
# exact multi-step engine (small widths)


@dataclass
class _ExactState:
    model: ModelState
    data: Dataset
    Wp: list          # effective hidden weights as MatrixEtaPoly
    A0: MatrixEtaPoly  # constant a_0 chains over the dataset (n, m)
    Bh: MatrixEtaPoly  # constant head chain (n, 1)


def exact_mode_cost(L: int, t: int, n: int, m: int) -> tuple[int, int]:
    """(final output degree, rough peak float64 entry count) of the engine."""
    degW = [0] * L
    peak = 0
    dega = [0] * (L + 1)
    for _ in range(t):
        for l in range(1, L + 1):
            dega[l] = dega[l - 1] + degW[l - 1]
        degb = [0] * (L + 2)
        for l in range(L, 0, -1):
            degb[l] = degb[l + 1] + degW[l - 1]
        degf = dega[L]
        entries = sum((dw + 1) * n * n for dw in degW)
        entries += sum((da + 1) * n * m for da in dega)
        new = list(degW)
        for l in range(1, L + 1):
            degG = dega[l - 1] + degf + degb[l + 1]
            new[l - 1] = max(degW[l - 1], 1 + degG)
            entries += (degG + 2) * n * n
        degW = new
        peak = max(peak, entries)
    for l in range(1, L + 1):
        dega[l] = dega[l - 1] + degW[l - 1]
    return dega[L], peak


def _exact_steps(model: ModelState, data: Dataset, t: int, max_entries: int) -> _ExactState:
    _check_poly_model(model)
    degree, entries = exact_mode_cost(model.L, t, model.n, data.m)
    if entries > max_entries:
        raise ValueError(
            f"exact t-step polynomials need ~{entries:.2e} coefficient entries "
            f"(degree {degree}) which exceeds the cap {max_entries:.2e}; "
            "reduce t, width, or depth, or raise max_entries"
        )
    g_in, g_hid, g_head = model.multipliers()
    nc = float(model.n) ** (-model.param.lr_exponent)
    Wp = [MatrixEtaPoly.const(g_hid * W) for W in model.Ws]
    A0 = MatrixEtaPoly.const(g_in * (model.W0 @ data.X.T))
    Bh = MatrixEtaPoly.const((g_head * model.V)[:, None])
    # Note g_hid is NOT reapplied inside matmuls below: Wp already holds
    # the effective matrices, so the chains match forward_cache exactly.
    upd = g_hid * nc / data.m
    for _ in range(t):
        As = [A0]
        for l in range(1, model.L + 1):
            As.append(Wp[l - 1] @ As[-1])
        Bs = {model.L + 1: Bh}
        for l in range(model.L, 0, -1):
            Bs[l] = Wp[l - 1].T @ Bs[l + 1]
        chi = (Bh.T @ As[model.L]).add_const(-data.y[None, :])
        chiT = chi.T
        newW = []
        for l in range(1, model.L + 1):
            S = As[l - 1] @ chiT
            G = (Bs[l + 1] @ S.T).scale(upd)
            newW.append(Wp[l - 1] - G.shift(1))
        Wp = newW
    return _ExactState(model=model, data=data, Wp=Wp, A0=A0, Bh=Bh)


def _exact_chi(state: _ExactState) -> MatrixEtaPoly:
    A = state.A0
    for l in range(1, state.model.L + 1):
        A = state.Wp[l - 1] @ A
    return (state.Bh.T @ A).add_const(-state.data.y[None, :])


def multi_step_output_poly(
    model: ModelState,
    data: Dataset,
    x: np.ndarray,
    t: int,
    max_entries: int = DEFAULT_MAX_ENTRIES,
) -> EtaPoly:
    """f after t GD steps at learning rate eta, as an exact polynomial."""
    if t < 1:
        raise ValueError("t must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.d,):
        raise ValueError(f"probe input must have shape ({model.d},), got {x.shape}")
    state = _exact_steps(model, data, t, max_entries)
    g_in = model.multipliers()[0]
    A = MatrixEtaPoly.const((g_in * (model.W0 @ x))[:, None])
    for l in range(1, model.L + 1):
        A = state.Wp[l - 1] @ A
    return EtaPoly((state.Bh.T @ A).coef[:, 0, 0])


# ---------------------------------------------------------------------------
# coefficient scaling with width


@dataclass
class CoefScaling:
    widths: list[int]
    # estimates[l][i] = sqrt(mean phi_l^2) at widths[i], for l = 1..L
    estimates: dict[int, list[float]]
    slopes: dict[int, float]


def coefficient_l2_scaling(param, widths, L: int, data: Dataset, x: np.ndarray, trials: int, rng) -> CoefScaling:
    """L2-norm estimates of the one-step coefficients phi_l across widths.

    For each width, `trials` fresh models are drawn from child streams of
    rng; the returned slopes are OLS fits of log estimate vs log width.
    Expected: phi_1 is width-stable, phi_l decays like n^-(l-1)/2.
    """
    from .model import init_model

    widths = [int(n) for n in widths]
    if len(widths) < 2:
        raise ValueError("need at least two widths to fit slopes")
    sums = {l: np.zeros(len(widths)) for l in range(1, L + 1)}
    for i, n in enumerate(widths):
        for trial in range(trials):
            m = init_model(param, n, L, data.d, rng.spawn("coef", n, trial))
            p = one_step_output_poly(m, data, x)
            for l in range(1, L + 1):
                sums[l][i] += p.coef[l] ** 2
    estimates = {l: list(np.sqrt(sums[l] / trials)) for l in sums}
    logw = np.log(np.asarray(widths, dtype=np.float64))
    slopes = {}
    for l, est in estimates.items():
        slope = np.polyfit(logw, np.log(np.asarray(est)), 1)[0]
        slopes[l] = float(slope)
    return CoefScaling(widths=widths, estimates=estimates, slopes=slopes)
