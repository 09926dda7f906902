import numpy as np
import pytest

from uavchan import nnet
from uavchan.errors import ConfigError, DomainError


def test_init_net_shapes_and_bounds():
    net = nnet.init_net((3, 5, 2), "identity", seed=0)
    assert [w.shape for w in net.weights] == [(3, 5), (5, 2)]
    assert all(np.all(b == 0) for b in net.biases)
    for w, bound in zip(net.weights, (np.sqrt(6 / 8), np.sqrt(6 / 7))):
        assert np.all(np.abs(w) <= bound)
    assert nnet.init_net((3, 5, 2), "identity", 0).weights[0][0, 0] == \
        net.weights[0][0, 0]


def test_init_net_validation():
    with pytest.raises(ConfigError):
        nnet.init_net((3,), "identity", 0)
    with pytest.raises(ConfigError):
        nnet.init_net((3, 2), "softmax", 0)


def test_forward_identity_linear_case():
    net = nnet.init_net((2, 2), "identity", 0)
    net.weights[0][:] = np.array([[1.0, 0.0], [0.0, 2.0]])
    net.biases[0][:] = np.array([0.5, -0.5])
    y = nnet.forward(net, np.array([[1.0, 1.0], [2.0, 0.0]]))
    assert np.allclose(y, [[1.5, 1.5], [2.5, -0.5]])


def test_forward_leaky_hidden():
    net = nnet.init_net((1, 1, 1), "identity", 0)
    net.weights[0][:] = [[1.0]]
    net.weights[1][:] = [[1.0]]
    assert nnet.forward(net, [[2.0]])[0, 0] == pytest.approx(2.0)
    assert nnet.forward(net, [[-2.0]])[0, 0] == pytest.approx(-0.4)


def test_forward_logistic_range_and_clip():
    net = nnet.init_net((2, 4, 1), "logistic", 3)
    y = nnet.forward(net, np.random.default_rng(0).normal(size=(50, 2)))
    assert np.all(y >= nnet.LOGISTIC_FLOOR)
    assert np.all(y <= 1 - nnet.LOGISTIC_FLOOR)


def test_forward_rejects_bad_width():
    net = nnet.init_net((3, 2), "identity", 0)
    with pytest.raises(DomainError):
        nnet.forward(net, np.zeros((4, 2)))


def finite_difference(net, x, adjoint, eps=1e-6):
    grads = []
    for p in net.params():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + eps
            up = float((nnet.forward(net, x) * adjoint).sum())
            p[idx] = orig - eps
            dn = float((nnet.forward(net, x) * adjoint).sum())
            p[idx] = orig
            g[idx] = (up - dn) / (2 * eps)
            it.iternext()
        grads.append(g)
    return grads


@pytest.mark.parametrize("output", ["identity", "logistic"])
def test_backprop_matches_finite_differences(output):
    rng = np.random.default_rng(5)
    net = nnet.init_net((4, 6, 5, 2), output, seed=8)
    x = rng.normal(size=(7, 4))
    adjoint = rng.normal(size=(7, 2))
    _, cache = nnet.forward_pass(net, x)
    grads, _ = nnet.backprop(net, cache, adjoint)
    fd = finite_difference(net, x, adjoint)
    for g, f in zip(grads, fd):
        denom = np.maximum(np.abs(f), 1e-6)
        assert np.max(np.abs(g - f) / denom) < 1e-4


def test_backprop_input_adjoint():
    rng = np.random.default_rng(9)
    net = nnet.init_net((3, 4, 1), "identity", seed=2)
    x = rng.normal(size=(5, 3))
    adjoint = np.ones((5, 1))
    _, cache = nnet.forward_pass(net, x)
    _, dx = nnet.backprop(net, cache, adjoint)
    eps = 1e-6
    for i in (0, 2):
        for j in range(3):
            xp = x.copy(); xp[i, j] += eps
            xm = x.copy(); xm[i, j] -= eps
            fd = (nnet.forward(net, xp).sum()
                  - nnet.forward(net, xm).sum()) / (2 * eps)
            assert dx[i, j] == pytest.approx(fd, abs=1e-6)


def test_gradients_wrapper_scales_by_batch():
    rng = np.random.default_rng(1)
    net = nnet.init_net((2, 3, 1), "identity", seed=4)
    x = rng.normal(size=(8, 2))
    adjoint = np.ones((8, 1))
    mean_grads = nnet.gradients(net, x, adjoint)
    _, cache = nnet.forward_pass(net, x)
    raw, _ = nnet.backprop(net, cache, adjoint)
    for m, r in zip(mean_grads, raw):
        assert np.allclose(m, r / 8)


def test_adam_first_step_size():
    # with fresh moments the bias-corrected first step is exactly lr
    p = np.array([1.0, -2.0])
    g = np.array([0.3, -4.0])
    state = nnet.adam_init([p], lr=1e-3)
    nnet.opt_step([p], [g], state, "descend")
    assert np.allclose(p, [1.0 - 1e-3 * 0.3 / (0.3 + 1e-8),
                           -2.0 + 1e-3 * 4.0 / (4.0 + 1e-8)])


def test_adam_directions_are_opposite():
    g = [np.array([1.0])]
    pa, pd = np.array([0.0]), np.array([0.0])
    sa, sd = nnet.adam_init([pa], lr=0.01), nnet.adam_init([pd], lr=0.01)
    nnet.opt_step([pa], g, sa, "ascend")
    nnet.opt_step([pd], g, sd, "descend")
    assert pa[0] == pytest.approx(-pd[0])
    with pytest.raises(DomainError):
        nnet.opt_step([pa], g, sa, "sideways")


def test_adam_descends_a_quadratic():
    p = np.array([5.0])
    state = nnet.adam_init([p], lr=0.05)
    for _ in range(2000):
        nnet.opt_step([p], [2 * p.copy()], state, "descend")
    assert abs(p[0]) < 1e-2


def test_checkpoint_round_trip(tmp_path):
    net = nnet.init_net((3, 8, 2), "logistic", seed=6)
    path = tmp_path / "net.ckpt"
    nnet.save_checkpoint(net, path, step=42)
    loaded, step = nnet.load_checkpoint(path)
    assert step == 42
    assert loaded.layer_sizes == net.layer_sizes
    assert loaded.output == net.output
    x = np.random.default_rng(0).normal(size=(4, 3))
    assert np.array_equal(nnet.forward(loaded, x), nnet.forward(net, x))


def test_checkpoint_rejects_foreign_file(tmp_path):
    p = tmp_path / "bad.ckpt"
    p.write_bytes(b'{"format": "other"}\n')
    with pytest.raises(ConfigError):
        nnet.load_checkpoint(p)
