import json

import numpy as np
import pytest

from transport_langevin import models as md
from transport_langevin import oracle as orc
from transport_langevin.spectral import cosine_basis, gram_eigenbasis, eval_basis


def test_clip_properties():
    assert md.clip(0.0, 1.5) == 0.0
    assert md.clip(0.5, 1.0) == pytest.approx(np.tanh(0.5), rel=1e-14)
    v = np.linspace(-50, 50, 1001)
    c = md.clip(v, 2.0)
    assert np.all(np.abs(c) <= 2.0)
    np.testing.assert_allclose(md.clip(-v, 2.0), -c, atol=1e-15)
    # 1-Lipschitz on a grid
    assert np.max(np.abs(np.diff(c))) <= np.max(np.diff(v)) * (1 + 1e-12)
    assert c[-1] == pytest.approx(2.0, abs=1e-8) and c[0] == pytest.approx(-2.0, abs=1e-8)
    np.testing.assert_allclose(md.clip_deriv(v, 2.0), 1 - np.tanh(v / 2.0) ** 2, rtol=1e-14)
    with pytest.raises(ValueError):
        md.clip(v, 0.5)


def _unclip(target, R):
    # value v with clip(v, R) == target
    return R * np.arctanh(np.asarray(target, dtype=float) / R)


def _cloud_model(w, a, R=2.0, D=2.0, bandwidth=1.0):
    cloud = md.finite_width_cloud(w, a)
    model = md.ModelSpec(arch="two-layer", cloud=cloud,
                         clip=md.ClipConfig(R=R, input_bound_D=D))
    basis = gram_eigenbasis(cloud, bandwidth, cloud.size)
    return md.attach_basis(model, basis)


def test_two_layer_hand_composition():
    # one particle; map values chosen so the clipped values are exactly
    # W1 = (1, 0) and W2 = 1, hence f(x) = tanh(x_0)
    model = _cloud_model(np.array([[0.2, -0.1]]), np.array([0.4]), R=2.0)
    target = np.array([[1.0, 0.0, 1.0]])
    values = _unclip(target, 2.0)
    E = model.basis.basis_vectors          # (1, 1)
    coeffs = np.linalg.solve(E, values)
    W = md.TransportMap(coeffs=coeffs, basis=model.basis)
    got = md.forward(model, W, np.array([0.5, 0.3]))
    assert got == pytest.approx(np.tanh(0.5), rel=1e-12)


def test_two_layer_zero_map_predicts_zero():
    model = _cloud_model(np.random.default_rng(0).standard_normal((5, 2)),
                         np.linspace(-1, 1, 5))
    W = md.TransportMap(coeffs=np.zeros((5, 3)), basis=model.basis)
    x = np.random.default_rng(1).standard_normal((7, 2)) * 0.4
    np.testing.assert_allclose(md.forward(model, W, x), np.zeros(7), atol=1e-15)


def test_finite_width_equivalence_when_clipping_inactive():
    # identity map with huge clip radius reproduces (1/M) sum a_m tanh(w_m.x)
    rng = np.random.default_rng(2)
    M, d = 6, 3
    w = rng.standard_normal((M, d))
    a = rng.uniform(-1, 1, M)
    model = _cloud_model(w, a, R=1e7, D=2.0)
    coeffs = md.identity_coeffs(model, model.basis)
    W = md.TransportMap(coeffs=coeffs, basis=model.basis)
    x = rng.standard_normal((9, d)) * 0.5
    want = np.mean(a[None, :] * np.tanh(x @ w.T), axis=1)
    np.testing.assert_allclose(md.forward(model, W, x), want, atol=1e-12)


def test_identity_map_interpolates_at_cloud_points():
    rng = np.random.default_rng(3)
    cloud = md.finite_width_cloud(rng.standard_normal((8, 2)), rng.uniform(-1, 1, 8))
    basis = gram_eigenbasis(cloud, 1.0, 8, include_a=False)
    model = md.ModelSpec(arch="identity-map", basis=basis)
    stored = rng.standard_normal(8)
    coeffs = basis.basis_vectors.T @ (basis.anchor_weights * stored)
    W = md.TransportMap(coeffs=coeffs[:, None], basis=basis)
    got = md.forward(model, W, cloud.w)
    np.testing.assert_allclose(got, stored, atol=1e-9)


def test_gradient_zero_residual_is_zero():
    rng = np.random.default_rng(4)
    model = _cloud_model(rng.standard_normal((4, 2)), rng.uniform(-1, 1, 4))
    coeffs = rng.standard_normal((4, 3)) * 0.3
    W = md.TransportMap(coeffs=coeffs, basis=model.basis)
    x = rng.standard_normal((6, 2)) * 0.5
    y = md.forward(model, W, x)
    g = md.gradient(model, W, md.Dataset(x=x, y=y), "squared")
    np.testing.assert_allclose(g, np.zeros_like(coeffs), atol=1e-12)


def test_gradient_single_particle_hand_value():
    # zero first-layer values, nonzero second layer: the first-layer gradient
    # block is clip(v2) * loss'(y, 0) * x exactly (tanh'(0) = clip'(0) = 1)
    model = _cloud_model(np.array([[0.3, 0.7]]), np.array([0.2]), R=2.0)
    v2 = 0.8
    values = np.array([[0.0, 0.0, _unclip(v2, 2.0)]])
    E = model.basis.basis_vectors
    coeffs = np.linalg.solve(E, values)
    W = md.TransportMap(coeffs=coeffs, basis=model.basis)
    x = np.array([[0.5, -0.25]])
    y = np.array([0.7])
    g = md.gradient(model, W, md.Dataset(x=x, y=y), "squared")
    g_values = (E @ g)  # back to value space: (1, 3)
    lp = -2.0 * (0.7 - 0.0)
    np.testing.assert_allclose(g_values[0, :2], v2 * lp * x[0], rtol=1e-12)
    # second-layer gradient vanishes because sigma(0) = 0
    assert abs(g_values[0, 2]) < 1e-14


def _random_two_layer(rng):
    M, d = rng.integers(2, 6), rng.integers(1, 4)
    model = _cloud_model(rng.standard_normal((M, d)), rng.uniform(-1, 1, M),
                         R=float(rng.uniform(1.0, 3.0)), D=3.0,
                         bandwidth=float(rng.uniform(0.6, 1.6)))
    n = rng.integers(2, 8)
    data = md.Dataset(x=rng.standard_normal((n, d)) * 0.6, y=rng.standard_normal(n))
    gamma = float(rng.choice([0.0, 0.0, 1.0]))
    W = md.TransportMap(coeffs=rng.standard_normal((M, d + 1)), basis=model.basis, gamma=gamma)
    return model, W, data


def _random_identity(rng):
    N = rng.integers(3, 9)
    basis = cosine_basis(int(N), dim_in=1)
    model = md.ModelSpec(arch="identity-map", basis=basis)
    n = rng.integers(2, 10)
    data = md.Dataset(x=rng.uniform(0, 1, (n, 1)), y=rng.standard_normal(n))
    gamma = float(rng.choice([0.0, 0.5]))
    W = md.TransportMap(coeffs=rng.standard_normal((N, 1)), basis=basis, gamma=gamma)
    return model, W, data


def _random_resnet(rng):
    M, d, T = int(rng.integers(2, 5)), int(rng.integers(2, 4)), int(rng.integers(1, 4))
    cloud = md.finite_width_cloud(rng.standard_normal((M, d)), rng.uniform(-1, 1, M),
                                  a_vec=rng.standard_normal((M, d)) / np.sqrt(d))
    basis = gram_eigenbasis(cloud, 1.0, M, include_a=False)
    model = md.ModelSpec(arch="resnet", cloud=cloud, clip=md.ClipConfig(R=2.0, input_bound_D=3.0),
                         basis=basis, resnet_blocks=T)
    n = rng.integers(2, 6)
    data = md.Dataset(x=rng.standard_normal((n, d)) * 0.5, y=rng.standard_normal(n))
    W = md.TransportMap(coeffs=rng.standard_normal((M, T * d)) * 0.7, basis=basis)
    return model, W, data


@pytest.mark.parametrize("maker,loss", [
    ("two-layer", "squared"), ("two-layer", "logistic"),
    ("identity", "squared"), ("resnet", "squared"),
])
def test_gradient_matches_finite_differences(maker, loss):
    rng = np.random.default_rng(hash(maker) % 2 ** 31)
    makers = {"two-layer": _random_two_layer, "identity": _random_identity,
              "resnet": _random_resnet}
    for trial in range(12):
        model, W, data = makers[maker](rng)
        if loss == "logistic":
            data = md.Dataset(x=data.x, y=np.sign(data.y) + (data.y == 0))
        g = md.gradient(model, W, data, loss)
        fd = orc.finite_diff_grad(model, loss, data, W, step=1e-5)
        denom = max(np.linalg.norm(fd), 1e-10)
        assert np.linalg.norm(g - fd) / denom < 1e-5, f"trial {trial}"


def test_wasserstein_objective_identity_cases():
    rng = np.random.default_rng(6)
    src = rng.standard_normal((20, 1))
    cloud = md.finite_width_cloud(src, np.zeros(20))
    basis = gram_eigenbasis(cloud, 0.3, 20, include_a=False)
    model = md.ModelSpec(arch="wasserstein", basis=basis, cloud=cloud,
                         wasserstein_penalty=1.0, mmd_bandwidth=0.7)
    ident = basis.basis_vectors.T @ (basis.anchor_weights[:, None] * src)
    W = md.TransportMap(coeffs=ident, basis=basis)
    # identity onto itself: zero displacement, zero discrepancy
    assert md.wasserstein_objective(W, src, src, 1.0, 0.7) == pytest.approx(0.0, abs=1e-10)
    # translated target keeps zero displacement but positive discrepancy
    shifted = md.wasserstein_objective(W, src, src + 1.5, 0.0, 0.7)
    assert shifted == pytest.approx(0.0, abs=1e-10)
    assert md.wasserstein_objective(W, src, src + 1.5, 1.0, 0.7) > 0.05


def test_wasserstein_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    src = rng.standard_normal((10, 2))
    tgt = rng.standard_normal((8, 2)) + 0.5
    cloud = md.finite_width_cloud(src, np.zeros(10))
    basis = gram_eigenbasis(cloud, 1.2, 10, include_a=False)
    model = md.ModelSpec(arch="wasserstein", basis=basis, cloud=cloud,
                         wasserstein_penalty=0.8, mmd_bandwidth=1.1)
    for _ in range(5):
        W = md.TransportMap(coeffs=rng.standard_normal((10, 2)) * 0.5, basis=basis)
        data = md.Dataset(x=src, y=tgt)
        g = md.gradient(model, W, data, "squared")
        fd = orc.finite_diff_grad(model, "squared", data, W, step=1e-5)
        assert np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-10) < 1e-5


def test_wasserstein_gaussian_grid_search():
    # 1-d Gaussian -> Gaussian: the optimal map is affine with slope s_t/s_s
    rng = np.random.default_rng(8)
    src = rng.standard_normal((20, 1)) * 1.0
    a_true, b_true = 0.5, 1.0
    tgt = a_true * rng.standard_normal((40, 1)) + b_true
    cloud = md.finite_width_cloud(src, np.zeros(20))
    basis = gram_eigenbasis(cloud, 0.3, 20, include_a=False)
    penalty = 25.0
    best, best_ab = np.inf, None
    for a in np.linspace(0.1, 1.2, 23):
        for b in np.linspace(0.0, 1.6, 33):
            vals = a * src + b
            coeffs = basis.basis_vectors.T @ (basis.anchor_weights[:, None] * vals)
            W = md.TransportMap(coeffs=coeffs, basis=basis)
            obj = md.wasserstein_objective(W, src, tgt, penalty, 0.8)
            if obj < best:
                best, best_ab = obj, (a, b)
    # grid optimum sits near the analytic affine transport map
    assert abs(best_ab[0] - a_true) < 0.2
    assert abs(best_ab[1] - b_true) < 0.2


def test_lipschitz_gap_trivial_and_shift():
    rng = np.random.default_rng(9)
    model = _cloud_model(rng.standard_normal((6, 2)), rng.uniform(-1, 1, 6), R=1.5, D=1.0)
    W = md.TransportMap(coeffs=rng.standard_normal((6, 3)), basis=model.basis)
    grid = rng.standard_normal((64, 2))
    grid /= np.maximum(1.0, np.linalg.norm(grid, axis=1))[:, None]
    lhs, rhs = md.lipschitz_gap(model, W, W, grid)
    assert lhs == 0.0 and rhs == 0.0
    # constant shift on the second-layer coordinate only
    c = 0.3
    E = model.basis.basis_vectors
    shift_values = np.column_stack([np.zeros((6, 2)), np.full(6, c)])
    shift_coeffs = E.T @ (model.cloud.weights[:, None] * shift_values)
    W2 = md.TransportMap(coeffs=W.coeffs + shift_coeffs, basis=model.basis)
    lhs, rhs = md.lipschitz_gap(model, W, W2, grid)
    assert lhs <= c + 1e-9
    assert lhs <= rhs + 1e-9
    assert rhs == pytest.approx((1 + 1.5 * 1.0) * c, rel=1e-9)


def test_lipschitz_inequality_random_pairs():
    rng = np.random.default_rng(10)
    for _ in range(50):
        M = int(rng.integers(2, 7))
        model = _cloud_model(rng.standard_normal((M, 2)), rng.uniform(-1, 1, M),
                             R=float(rng.uniform(1, 3)), D=1.5)
        Wa = md.TransportMap(coeffs=rng.standard_normal((M, 3)) * 2, basis=model.basis)
        Wb = md.TransportMap(coeffs=rng.standard_normal((M, 3)) * 2, basis=model.basis)
        grid = rng.standard_normal((128, 2))
        grid *= (1.5 / np.maximum(1.5, np.linalg.norm(grid, axis=1)))[:, None]
        lhs, rhs = md.lipschitz_gap(model, Wa, Wb, grid)
        assert lhs <= rhs + 1e-9


def test_gamma_scaling_composition_identity():
    rng = np.random.default_rng(12)
    model = _cloud_model(rng.standard_normal((5, 2)), rng.uniform(-1, 1, 5))
    coeffs = rng.standard_normal((5, 3))
    x = rng.standard_normal((8, 2)) * 0.5
    from transport_langevin.spectral import fractional_power_scale
    W_gamma = md.TransportMap(coeffs=coeffs, basis=model.basis, gamma=1.2)
    scaled = fractional_power_scale(coeffs, model.basis.eigen, 1.2)
    W_plain = md.TransportMap(coeffs=scaled, basis=model.basis, gamma=0.0)
    np.testing.assert_allclose(md.forward(model, W_gamma, x),
                               md.forward(model, W_plain, x), rtol=1e-13)


def test_cloud_validation_and_serialization_roundtrip():
    with pytest.raises(ValueError):
        md.ParticleCloud(w=np.zeros((3, 2)), a=np.zeros(3), weights=np.array([0.5, 0.2, 0.2]))
    rng = np.random.default_rng(13)
    cloud = md.sample_cloud(rng, 6, 2, with_a_vec=True)
    back = md.cloud_from_json(md.cloud_to_json(cloud))
    np.testing.assert_array_equal(back.w, cloud.w)
    np.testing.assert_array_equal(back.a_vec, cloud.a_vec)
    assert back.mode == "monte-carlo-continuous"

    model = _cloud_model(cloud.w, cloud.a)
    W = md.TransportMap(coeffs=rng.standard_normal((6, 3)), basis=model.basis, gamma=0.5)
    W2 = md.map_from_json(md.map_to_json(W))
    np.testing.assert_array_equal(W2.coeffs, W.coeffs)
    assert W2.gamma == 0.5
    x = rng.standard_normal((4, 2)) * 0.3
    np.testing.assert_allclose(md.forward(model, W2, x), md.forward(model, W, x), rtol=1e-12)
    # stable ordering of the serialized document
    assert md.map_to_json(W) == md.map_to_json(W)
    payload = json.loads(md.map_to_json(W))
    assert payload["format"] == "transport-map"


def test_arch_cloud_mismatch_rejected():
    with pytest.raises(ValueError):
        md.ModelSpec(arch="two-layer", cloud=None)
    rng = np.random.default_rng(14)
    cloud = md.finite_width_cloud(rng.standard_normal((3, 2)), np.zeros(3))
    with pytest.raises(ValueError):
        md.ModelSpec(arch="resnet", cloud=cloud, resnet_blocks=2)  # no a_vec
    with pytest.raises(ValueError):
        md.ModelSpec(arch="unknown")


def test_input_bound_warning():
    rng = np.random.default_rng(15)
    model = _cloud_model(rng.standard_normal((3, 2)), np.zeros(3), D=0.5)
    W = md.TransportMap(coeffs=np.zeros((3, 3)), basis=model.basis)
    with pytest.warns(UserWarning):
        md.forward(model, W, np.array([5.0, 5.0]))
