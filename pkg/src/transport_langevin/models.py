"""Transport maps and the predictors they induce.

A map W is stored by its mode coefficients against a spectral basis; the
architectures differ in how the map values turn into a predictor:

* ``two-layer``     f_W(x) = sum_m weight_m * clip(V2_m) * act(clip(V1_m) . x)
                    with (V1_m, V2_m) the map value at particle m,
* ``identity-map``  f_W(x) = W(x), scalar output,
* ``wasserstein``   f_W(x) = W(x), vector output,
* ``resnet``        composition of (identity + particle-averaged block) layers.

Clipping is componentwise R*tanh(v/R); its derivative enters every analytic
gradient, which is written in coefficient space so that it agrees with finite
differences of the empirical risk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .losses import loss_eval_derivs
from .spectral import (EigenSequence, SpectralBasis, eval_basis,
                       fractional_power_scale, gram_eigenbasis)

__all__ = [
    "Dataset",
    "ParticleCloud",
    "TransportMap",
    "ClipConfig",
    "ModelSpec",
    "clip",
    "clip_deriv",
    "finite_width_cloud",
    "sample_cloud",
    "forward",
    "empirical_risk",
    "gradient",
    "lipschitz_gap",
    "wasserstein_objective",
    "wasserstein_gradient",
    "identity_coeffs",
    "map_values",
    "cloud_to_json",
    "cloud_from_json",
    "map_to_json",
    "map_from_json",
]

ARCHS = ("two-layer", "identity-map", "resnet", "wasserstein")


class Dataset(NamedTuple):
    x: np.ndarray  # (n, d_in)
    y: np.ndarray  # (n,) labels/targets, or (n, d) for map targets


@dataclass(frozen=True)
class ParticleCloud:
    """Discrete representation of the initial weight distribution.

    In ``finite-width`` mode the cloud *is* the model (one particle per
    neuron); in ``monte-carlo-continuous`` mode it is a fixed i.i.d. draw
    from a declared initial distribution.  ``a_vec`` holds the fixed
    per-particle read-in vectors used by the resnet blocks.
    """

    w: np.ndarray
    a: np.ndarray
    weights: np.ndarray
    mode: str = "finite-width"
    a_vec: Optional[np.ndarray] = None

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        a = np.asarray(self.a, dtype=float).ravel()
        wt = np.asarray(self.weights, dtype=float).ravel()
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "weights", wt)
        if self.mode not in ("finite-width", "monte-carlo-continuous"):
            raise ValueError(f"unknown cloud mode {self.mode!r}")
        if w.shape[0] != a.size or w.shape[0] != wt.size:
            raise ValueError("w, a and weights must agree on the particle count")
        if np.any(wt < 0) or abs(wt.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        if self.a_vec is not None:
            av = np.asarray(self.a_vec, dtype=float)
            object.__setattr__(self, "a_vec", av)
            if av.shape != w.shape:
                raise ValueError("a_vec must have shape (n_particles, d)")

    @property
    def size(self) -> int:
        return self.w.shape[0]

    @property
    def dim(self) -> int:
        return self.w.shape[1]


def finite_width_cloud(w, a, a_vec=None) -> ParticleCloud:
    """Uniform-mass cloud whose particles are the network's own neurons."""
    w = np.atleast_2d(np.asarray(w, dtype=float))
    M = w.shape[0]
    return ParticleCloud(w=w, a=a, weights=np.full(M, 1.0 / M), mode="finite-width", a_vec=a_vec)


def sample_cloud(rng: np.random.Generator, n_particles: int, dim: int,
                 w_scale: float = 1.0, a_low: float = -1.0, a_high: float = 1.0,
                 with_a_vec: bool = False) -> ParticleCloud:
    """I.i.d. cloud: w ~ N(0, w_scale^2 I), a ~ Uniform[a_low, a_high]."""
    w = rng.standard_normal((n_particles, dim)) * w_scale
    a = rng.uniform(a_low, a_high, size=n_particles)
    a_vec = rng.standard_normal((n_particles, dim)) / np.sqrt(dim) if with_a_vec else None
    return ParticleCloud(w=w, a=a, weights=np.full(n_particles, 1.0 / n_particles),
                         mode="monte-carlo-continuous", a_vec=a_vec)


@dataclass
class TransportMap:
    """Mode-coefficient representation of a map, optionally reparametrized.

    ``gamma > 0`` means the map that is actually evaluated is the
    fractional-power rescaling mu_k^(gamma/2) of the stored coefficients.
    """

    coeffs: np.ndarray
    basis: SpectralBasis
    gamma: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        self.coeffs = c
        if c.shape[0] != self.basis.n_modes:
            raise ValueError("coefficient rows must match the basis mode count")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    def effective_coeffs(self) -> np.ndarray:
        if self.gamma == 0.0:
            return self.coeffs
        return fractional_power_scale(self.coeffs, self.basis.eigen, self.gamma)

    def copy_with(self, coeffs) -> "TransportMap":
        return TransportMap(coeffs=np.asarray(coeffs, dtype=float), basis=self.basis, gamma=self.gamma)


@dataclass(frozen=True)
class ClipConfig:
    """Clipping radius, activation choice and the input-norm bound."""

    R: float = 2.0
    activation: str = "tanh"
    input_bound_D: float = 1.0

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("clip radius R must be >= 1")
        if self.activation not in ("tanh", "smoothed-relu"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.input_bound_D <= 0:
            raise ValueError("input bound D must be positive")


@dataclass(frozen=True)
class ModelSpec:
    arch: str
    cloud: Optional[ParticleCloud] = None
    clip: ClipConfig = ClipConfig()
    basis: Optional[SpectralBasis] = None
    resnet_blocks: int = 0
    resnet_readout: Optional[np.ndarray] = None
    wasserstein_penalty: float = 1.0
    mmd_bandwidth: float = 1.0

    def __post_init__(self):
        if self.arch not in ARCHS:
            raise ValueError(f"unknown architecture {self.arch!r}")
        if self.arch in ("two-layer", "resnet") and self.cloud is None:
            raise ValueError(f"{self.arch} requires a particle cloud")
        if self.arch == "resnet":
            if self.resnet_blocks < 1:
                raise ValueError("resnet requires resnet_blocks >= 1")
            if self.cloud.a_vec is None:
                raise ValueError("resnet requires a cloud with read-in vectors a_vec")


def clip(v, R: float):
    """Componentwise R*tanh(v/R): odd, bounded by R, 1-Lipschitz."""
    if R < 1:
        raise ValueError("R must be >= 1")
    return R * np.tanh(np.asarray(v, dtype=float) / R)


def clip_deriv(v, R: float):
    if R < 1:
        raise ValueError("R must be >= 1")
    t = np.tanh(np.asarray(v, dtype=float) / R)
    return 1.0 - t ** 2


def _activation(name: str):
    if name == "tanh":
        return np.tanh, lambda z: 1.0 - np.tanh(z) ** 2
    # smoothed relu: softplus, 1-Lipschitz and smooth
    def sp(z):
        return np.logaddexp(0.0, z)

    def spd(z):
        return 1.0 / (1.0 + np.exp(-z))

    return sp, spd


def model_basis(model: ModelSpec) -> SpectralBasis:
    if model.basis is None:
        raise ValueError("model has no basis attached")
    return model.basis


def map_output_dim(model: ModelSpec) -> int:
    """Output dimension of the transport map (not of the predictor)."""
    if model.arch == "two-layer":
        return model.cloud.dim + 1
    if model.arch == "identity-map":
        return 1
    if model.arch == "wasserstein":
        return model_basis(model).dim_in
    return model.resnet_blocks * model.cloud.dim


def attach_basis(model: ModelSpec, basis: SpectralBasis) -> ModelSpec:
    return ModelSpec(arch=model.arch, cloud=model.cloud, clip=model.clip, basis=basis,
                     resnet_blocks=model.resnet_blocks, resnet_readout=model.resnet_readout,
                     wasserstein_penalty=model.wasserstein_penalty,
                     mmd_bandwidth=model.mmd_bandwidth)


def default_basis(model: ModelSpec, n_modes: Optional[int] = None,
                  kernel_bandwidth: float = 1.0) -> SpectralBasis:
    """Gram eigenbasis on the model's cloud (joint (w, a) domain for two-layer)."""
    if model.cloud is None:
        raise ValueError("model has no cloud to build a basis from")
    if n_modes is None:
        n_modes = model.cloud.size
    include_a = model.arch == "two-layer"
    return gram_eigenbasis(model.cloud, kernel_bandwidth, n_modes, include_a=include_a)


def map_values(model: ModelSpec, W: TransportMap) -> np.ndarray:
    """Unclipped map values at the cloud points, shape (M, d_out_of_map)."""
    if model.cloud is None:
        raise ValueError(f"{model.arch} has no particle cloud to evaluate at")
    E = _cloud_features(model, W.basis)
    return E @ W.effective_coeffs()


def _cloud_features(model: ModelSpec, basis: SpectralBasis) -> np.ndarray:
    if basis.kind == "gram-eigenbasis" and basis.basis_vectors is not None \
            and model.cloud is not None and basis.basis_vectors.shape[0] == model.cloud.size:
        return basis.basis_vectors
    pts = np.column_stack([model.cloud.w, model.cloud.a]) if basis.dim_in == model.cloud.dim + 1 \
        else model.cloud.w
    return eval_basis(basis, pts)


def _as_points(x, dim_in) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if x.shape[1] != dim_in:
        raise ValueError(f"input dimension {x.shape[1]} does not match model dimension {dim_in}")
    return x, single


def forward(model: ModelSpec, W: TransportMap, x):
    """Predictor value(s) at x.

    Scalar output for two-layer / identity-map / resnet, vector output for
    wasserstein.  Accepts a single point or a batch of rows.
    """
    if model.arch == "two-layer":
        X, single = _as_points(x, model.cloud.dim)
        _warn_input_bound(model, X)
        R = model.clip.R
        act, _ = _activation(model.clip.activation)
        V = map_values(model, W)
        Vb = clip(V, R)
        Z = Vb[:, :-1] @ X.T                      # (M, n) pre-activations
        out = (model.cloud.weights * Vb[:, -1]) @ act(Z)
        return float(out[0]) if single else out
    if model.arch == "identity-map":
        basis = model_basis(model)
        X, single = _as_points(x, basis.dim_in)
        out = eval_basis(basis, X) @ W.effective_coeffs()[:, 0]
        return float(out[0]) if single else out
    if model.arch == "wasserstein":
        basis = model_basis(model)
        X, single = _as_points(x, basis.dim_in)
        out = eval_basis(basis, X) @ W.effective_coeffs()
        return out[0] if single else out
    if model.arch == "resnet":
        X, single = _as_points(x, model.cloud.dim)
        _warn_input_bound(model, X)
        z, _ = _resnet_forward(model, W, X)
        u = _resnet_readout(model)
        out = z @ u
        return float(out[0]) if single else out
    raise ValueError(f"unknown architecture {model.arch!r}")


def _warn_input_bound(model, X):
    import warnings
    D = model.clip.input_bound_D
    r = np.max(np.linalg.norm(X, axis=1))
    if r > D * (1 + 1e-9):
        warnings.warn(f"input norm {r:.3g} exceeds the declared bound D={D:g}", stacklevel=3)


def _resnet_readout(model: ModelSpec) -> np.ndarray:
    d = model.cloud.dim
    if model.resnet_readout is not None:
        return np.asarray(model.resnet_readout, dtype=float)
    return np.full(d, 1.0 / np.sqrt(d))


def _resnet_forward(model: ModelSpec, W: TransportMap, X):
    """Forward pass through the residual blocks; returns output and a cache."""
    M, d = model.cloud.size, model.cloud.dim
    T = model.resnet_blocks
    R = model.clip.R
    act, actd = _activation(model.clip.activation)
    E = _cloud_features(model, W.basis)
    C = W.effective_coeffs().reshape(W.basis.n_modes, T, d)
    omega = model.cloud.weights
    a_vec = model.cloud.a_vec
    z = X
    cache = []
    for t in range(T):
        V = E @ C[:, t, :]                        # (M, d)
        Vb = clip(V, R)
        P = z @ Vb.T                              # (n, M)
        S = act(P)
        cache.append((z, V, Vb, P))
        z = z + (S * omega[None, :]) @ a_vec
    return z, cache


def empirical_risk(model: ModelSpec, W: TransportMap, loss_kind: str, dataset: Dataset) -> float:
    """Mean loss over the dataset; the soft transport objective for wasserstein."""
    if model.arch == "wasserstein":
        return wasserstein_objective(W, dataset.x, dataset.y,
                                     model.wasserstein_penalty, model.mmd_bandwidth)
    f = forward(model, W, dataset.x)
    return float(np.mean(loss_eval_derivs(loss_kind, dataset.y, f, 0)))


def gradient(model: ModelSpec, W: TransportMap, dataset: Dataset, loss_kind: str) -> np.ndarray:
    """Coefficient-space gradient of the empirical risk.

    The pointwise functional gradient at each cloud point is projected onto
    the basis (exact for a full gram eigenbasis); the clip derivative and the
    fractional-power reparametrization enter by the chain rule.
    """
    if model.arch == "wasserstein":
        return wasserstein_gradient(model, W, dataset.x, dataset.y)
    n = dataset.x.shape[0]
    if model.arch == "identity-map":
        basis = model_basis(model)
        Phi = eval_basis(basis, dataset.x)
        f = Phi @ W.effective_coeffs()[:, 0]
        lp = loss_eval_derivs(loss_kind, dataset.y, f, 1)
        g = (Phi.T @ lp)[:, None] / n
        return _gamma_chain(g, W)
    if model.arch == "two-layer":
        X = np.asarray(dataset.x, dtype=float)
        R = model.clip.R
        act, actd = _activation(model.clip.activation)
        E = _cloud_features(model, W.basis)
        V = E @ W.effective_coeffs()              # (M, d+1)
        Vb = clip(V, R)
        Cd = clip_deriv(V, R)
        Z = Vb[:, :-1] @ X.T                      # (M, n)
        f = (model.cloud.weights * Vb[:, -1]) @ act(Z)
        lp = loss_eval_derivs(loss_kind, dataset.y, f, 1)          # (n,)
        omega = model.cloud.weights
        kernel = actd(Z) * lp[None, :]            # (M, n)
        dV1 = (omega * Vb[:, -1])[:, None] * (kernel @ X) / n * Cd[:, :-1]
        dV2 = omega * (act(Z) @ lp) / n * Cd[:, -1]
        dV = np.column_stack([dV1, dV2])
        return _gamma_chain(E.T @ dV, W)
    if model.arch == "resnet":
        X = np.asarray(dataset.x, dtype=float)
        n = X.shape[0]
        M, d = model.cloud.size, model.cloud.dim
        T = model.resnet_blocks
        act, actd = _activation(model.clip.activation)
        E = _cloud_features(model, W.basis)
        omega = model.cloud.weights
        a_vec = model.cloud.a_vec
        u = _resnet_readout(model)
        z_out, cache = _resnet_forward(model, W, X)
        f = z_out @ u
        lp = loss_eval_derivs(loss_kind, dataset.y, f, 1)
        G = (lp[:, None] / n) * u[None, :]        # adjoint after the last block
        dC = np.zeros((W.basis.n_modes, T, d))
        R = model.clip.R
        for t in range(T - 1, -1, -1):
            z_in, V, Vb, P = cache[t]
            Q = (G @ a_vec.T) * actd(P)           # (n, M)
            dV = (Q.T @ z_in) * omega[:, None] * clip_deriv(V, R)
            dC[:, t, :] = E.T @ dV
            G = G + (Q * omega[None, :]) @ Vb
        return _gamma_chain(dC.reshape(W.basis.n_modes, T * d), W)
    raise ValueError(f"unknown architecture {model.arch!r}")


def _gamma_chain(g: np.ndarray, W: TransportMap) -> np.ndarray:
    if W.gamma == 0.0:
        return g
    return fractional_power_scale(g, W.basis.eigen, W.gamma)


def lipschitz_gap(model: ModelSpec, W: TransportMap, W2: TransportMap, x_grid) -> tuple[float, float]:
    """Sup-norm gap of the predictors against the (1 + R*D) map-distance bound.

    Returns (lhs, rhs) with lhs the max |f_W - f_W'| over the grid and rhs the
    bound (1 + R*D) * ||W - W'|| in the mass-weighted L2 sense of the
    unclipped map values.
    """
    X = np.asarray(x_grid, dtype=float)
    fa = forward(model, W, X)
    fb = forward(model, W2, X)
    lhs = float(np.max(np.abs(fa - fb)))
    V = map_values(model, W)
    V2 = map_values(model, W2)
    dist = np.sqrt(np.sum(model.cloud.weights * np.sum((V - V2) ** 2, axis=1)))
    rhs = (1.0 + model.clip.R * model.clip.input_bound_D) * float(dist)
    return lhs, rhs


# ---------------------------------------------------------------------------
# soft transport objective
# ---------------------------------------------------------------------------

def _mmd_terms(A: np.ndarray, B: np.ndarray, h: float):
    def k(u, v):
        sq = np.sum(u ** 2, axis=1)[:, None] + np.sum(v ** 2, axis=1)[None, :] - 2.0 * u @ v.T
        return np.exp(-np.maximum(sq, 0.0) / (2.0 * h ** 2))
    return k(A, A), k(B, B), k(A, B)


def wasserstein_objective(W: TransportMap, source_samples, target_samples,
                          penalty: float, mmd_bandwidth: float = 1.0) -> float:
    """Mean squared displacement plus a kernel-discrepancy pushforward penalty.

    The hard pushforward constraint is relaxed to penalty * MMD^2 between the
    mapped source sample and the target sample (Gaussian kernel, V-statistic).
    """
    S = np.atleast_2d(np.asarray(source_samples, dtype=float))
    Tgt = np.atleast_2d(np.asarray(target_samples, dtype=float))
    if S.shape[0] == 0 or Tgt.shape[0] == 0:
        raise ValueError("both sample sets must be non-empty")
    F = eval_basis(W.basis, S) @ W.effective_coeffs()
    disp = float(np.mean(np.sum((S - F) ** 2, axis=1)))
    Kff, Ktt, Kft = _mmd_terms(F, Tgt, mmd_bandwidth)
    mmd2 = float(Kff.mean() + Ktt.mean() - 2.0 * Kft.mean())
    return disp + penalty * mmd2


def wasserstein_gradient(model: ModelSpec, W: TransportMap, source_samples, target_samples) -> np.ndarray:
    S = np.atleast_2d(np.asarray(source_samples, dtype=float))
    Tgt = np.atleast_2d(np.asarray(target_samples, dtype=float))
    h = model.mmd_bandwidth
    Phi = eval_basis(W.basis, S)
    F = Phi @ W.effective_coeffs()
    m, t = S.shape[0], Tgt.shape[0]
    dF = -2.0 * (S - F) / m
    Kff, _, Kft = _mmd_terms(F, Tgt, h)
    # d/dF of the V-statistic MMD^2; both slots of the ff term contribute
    dmmd = (-2.0 / (m ** 2 * h ** 2)) * (Kff.sum(axis=1)[:, None] * F - Kff @ F) \
        + (2.0 / (m * t * h ** 2)) * (Kft.sum(axis=1)[:, None] * F - Kft @ Tgt)
    dF = dF + model.wasserstein_penalty * dmmd
    return _gamma_chain(Phi.T @ dF, W)


# ---------------------------------------------------------------------------
# initial condition and serialization
# ---------------------------------------------------------------------------

def identity_coeffs(model: ModelSpec, basis: SpectralBasis) -> np.ndarray:
    """Projection of the identity map onto the basis.

    For cloud-based bases this projects the cloud coordinates themselves
    (exact at the cloud points with a full gram basis); cosine bases project
    the coordinate functions on the unit cube by midpoint quadrature; the
    abstract diagonal basis has no spatial identity and starts at zero.
    """
    d_out = map_output_dim(model)
    if basis.kind == "synthetic-diagonal":
        return np.zeros((basis.n_modes, d_out))
    if basis.kind == "gram-eigenbasis":
        pts, wts = basis.anchor_points, basis.anchor_weights
        if model.arch == "resnet":
            target = np.tile(pts[:, : model.cloud.dim], (1, model.resnet_blocks))
        elif model.arch == "identity-map":
            target = pts[:, :1]
        else:
            target = pts
        if target.shape[1] != d_out:
            raise ValueError("basis anchor dimension does not match the map output dimension")
        return basis.basis_vectors.T @ (wts[:, None] * target)
    # cosine-tensor: quadrature on the unit cube
    npts = 512 if basis.dim_in == 1 else 64
    grids = [np.linspace(0.5 / npts, 1 - 0.5 / npts, npts)] * basis.dim_in
    mesh = np.meshgrid(*grids, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    Phi = eval_basis(basis, pts)
    if pts.shape[1] < d_out:
        raise ValueError("cosine basis dimension is smaller than the map output dimension")
    target = pts[:, :d_out]
    return Phi.T @ target / pts.shape[0]


def cloud_to_json(cloud: ParticleCloud) -> str:
    payload = {
        "format": "particle-cloud",
        "version": 1,
        "mode": cloud.mode,
        "w": cloud.w.tolist(),
        "a": cloud.a.tolist(),
        "weights": cloud.weights.tolist(),
        "a_vec": None if cloud.a_vec is None else cloud.a_vec.tolist(),
    }
    return json.dumps(payload, sort_keys=True)


def cloud_from_json(text: str) -> ParticleCloud:
    payload = json.loads(text)
    if payload.get("format") != "particle-cloud":
        raise ValueError("not a particle-cloud document")
    return ParticleCloud(
        w=np.array(payload["w"], dtype=float),
        a=np.array(payload["a"], dtype=float),
        weights=np.array(payload["weights"], dtype=float),
        mode=payload["mode"],
        a_vec=None if payload["a_vec"] is None else np.array(payload["a_vec"], dtype=float),
    )


def _basis_to_dict(basis: SpectralBasis) -> dict:
    d = {
        "kind": basis.kind, "dim_in": basis.dim_in, "dim_out": basis.dim_out,
        "n_modes": basis.n_modes,
        "mu": basis.eigen.mu.tolist(), "c_mu": basis.eigen.c_mu,
        "decay_exponent": basis.eigen.decay_exponent,
    }
    if basis.kind == "gram-eigenbasis":
        d.update(basis_vectors=basis.basis_vectors.tolist(),
                 anchor_points=basis.anchor_points.tolist(),
                 anchor_weights=basis.anchor_weights.tolist(),
                 kernel_bandwidth=basis.kernel_bandwidth)
    if basis.kind == "cosine-tensor":
        d.update(frequencies=basis.frequencies.tolist())
    return d


def _basis_from_dict(d: dict) -> SpectralBasis:
    eigen = EigenSequence(mu=np.array(d["mu"], dtype=float), c_mu=d["c_mu"],
                          decay_exponent=d["decay_exponent"])
    kw = dict(kind=d["kind"], dim_in=d["dim_in"], dim_out=d["dim_out"],
              n_modes=d["n_modes"], eigen=eigen)
    if d["kind"] == "gram-eigenbasis":
        kw.update(basis_vectors=np.array(d["basis_vectors"], dtype=float),
                  anchor_points=np.array(d["anchor_points"], dtype=float),
                  anchor_weights=np.array(d["anchor_weights"], dtype=float),
                  kernel_bandwidth=d["kernel_bandwidth"])
    if d["kind"] == "cosine-tensor":
        kw.update(frequencies=np.array(d["frequencies"], dtype=int))
    return SpectralBasis(**kw)


def map_to_json(W: TransportMap) -> str:
    payload = {
        "format": "transport-map",
        "version": 1,
        "coeffs": W.coeffs.tolist(),
        "gamma": W.gamma,
        "basis": _basis_to_dict(W.basis),
    }
    return json.dumps(payload, sort_keys=True)


def map_from_json(text: str) -> TransportMap:
    payload = json.loads(text)
    if payload.get("format") != "transport-map":
        raise ValueError("not a transport-map document")
    return TransportMap(coeffs=np.array(payload["coeffs"], dtype=float),
                        basis=_basis_from_dict(payload["basis"]),
                        gamma=payload["gamma"])
