"""Forward/backward checks: chain telescoping, finite-difference gradients,
init-scale sanity, and the linear-only cache contract."""

import numpy as np
import pytest

from lrtransfer.model import (
    Dataset,
    batch_forward,
    forward,
    forward_cache,
    gradients,
    init_model,
    kernel_matrix,
    loss,
    make_dataset,
    subsample,
)
from lrtransfer.parametrization import mup, ntp, preset, sp
from lrtransfer.rng import RngStream

from conftest import tiny_dataset


def test_kernel_matrix_hand_value():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    K = kernel_matrix(X)
    assert np.allclose(K, np.array([[5.0, 11.0], [11.0, 25.0]]) / 2.0)


def test_make_dataset_validation():
    with pytest.raises(ValueError):
        make_dataset(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(ValueError):
        make_dataset(np.zeros(3), np.zeros(3))


def test_subsample_is_prefix(data8):
    sub = subsample(data8, 3)
    assert sub.m == 3
    assert np.array_equal(sub.X, data8.X[:3])
    assert np.array_equal(sub.y, data8.y[:3])
    assert np.allclose(sub.K, data8.K[:3, :3])
    with pytest.raises(ValueError):
        subsample(data8, 9)


def test_forward_matches_batch_forward(data4):
    for param in (mup(), sp(), ntp()):
        for act in ("linear", "relu"):
            m = init_model(param, 16, 3, data4.d, RngStream(1, 5), activation=act)
            preds = batch_forward(m, data4.X)
            single = [forward(m, x) for x in data4.X]
            assert np.allclose(preds, single, rtol=1e-12)


def test_cache_telescopes_at_every_layer(data4):
    m = init_model(mup(), 12, 4, data4.d, RngStream(2, 0))
    cache = forward_cache(m, data4)
    preds = batch_forward(m, data4.X)
    assert np.allclose(cache.preds, preds, rtol=1e-12)
    # f = b_{l+1} @ a_l for every split point l
    for l in range(0, m.L + 1):
        assert np.allclose(cache.b[l + 1] @ cache.a[l], preds, rtol=1e-10)
    assert np.allclose(cache.chi, preds - data4.y)


def test_forward_cache_rejects_relu(data4):
    m = init_model(mup(), 8, 2, data4.d, RngStream(2, 1), activation="relu")
    with pytest.raises(ValueError):
        forward_cache(m, data4)


def _fd_grad(model, data, arr, eps=1e-6):
    g = np.zeros_like(arr)
    flat = arr.ravel()
    gf = g.ravel()
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + eps
        lp = loss(model, data)
        flat[i] = old - eps
        lm = loss(model, data)
        flat[i] = old
        gf[i] = (lp - lm) / (2 * eps)
    return g


@pytest.mark.parametrize("act", ["linear", "relu"])
@pytest.mark.parametrize("pname", ["mup", "sp", "ntp"])
def test_gradients_match_finite_differences(act, pname):
    data = tiny_dataset(m=3, d=4, seed=31)
    p = preset(pname)
    model = init_model(p, 8, 3, data.d, RngStream(3, 7), activation=act,
                       train_input=True, train_head=True)
    g = gradients(model, data)
    for arr, got in [(model.W0, g.W0), (model.V, g.V)] + list(zip(model.Ws, g.Ws)):
        want = _fd_grad(model, data, arr)
        assert np.max(np.abs(got - want)) <= 5e-6 * max(1.0, np.max(np.abs(want)))


def test_untrained_layers_have_no_gradients(data4):
    m = init_model(mup(), 8, 2, data4.d, RngStream(3, 8))
    g = gradients(m, data4)
    assert g.W0 is None and g.V is None
    assert len(g.Ws) == 2


def test_init_loss_is_half_mean_square_target():
    data = tiny_dataset(m=20, d=10, seed=41)
    ref = 0.5 * float(np.mean(data.y ** 2))
    # muP head variance n^-2 makes init predictions vanish with width
    m = init_model(mup(), 1024, 3, data.d, RngStream(4, 0))
    assert abs(loss(m, data) - ref) <= 0.05 * ref


def test_ntp_and_sp_forward_scales_agree():
    data = tiny_dataset(m=2, d=8, seed=51)
    x = data.X[0]
    n, L, trials = 64, 3, 200
    out = {}
    for name in ("sp", "ntp"):
        p = preset(name)
        vals = [forward(init_model(p, n, L, data.d, RngStream(6, t)), x)
                for t in range(trials)]
        out[name] = float(np.var(vals))
    assert out["ntp"] == pytest.approx(out["sp"], rel=0.2)


def test_model_copy_is_deep(data4):
    m = init_model(mup(), 8, 2, data4.d, RngStream(5, 0))
    c = m.copy()
    c.Ws[0][0, 0] += 1.0
    c.step = 9
    assert m.Ws[0][0, 0] != c.Ws[0][0, 0]
    assert m.step == 0


def test_relu_is_applied_after_input_layer():
    # hand weights where relu-after-W0 and relu-only-after-W1 disagree:
    # x=-1 gives W0 x = (-1, 1); with the input relu W1 sees (0, 1) and
    # routes it to coordinate 1, without it W1 sees (-1, 1) and cancels
    m = init_model(mup(), 2, 1, 1, RngStream(7, 0), activation="relu")
    m.W0 = np.array([[1.0], [-1.0]])
    m.Ws[0] = np.array([[1.0, 1.0], [0.0, 0.0]])
    m.V = np.array([1.0, 0.0])
    assert forward(m, np.array([-1.0])) == pytest.approx(1.0)
    assert forward(m, np.array([1.0])) == pytest.approx(1.0)
