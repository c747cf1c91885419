#!/usr/bin/env python3
"""A tour of the Hilbert-space machinery.

Builds an eigenvalue sequence at the decay boundary, applies the
regularizing operator and its resolvent, samples the Gaussian reference
measure, and estimates a small-ball probability -- everything a chain step
touches, in isolation.
"""
import numpy as np

from transport_langevin import (GaussianMeasureSpec, apply_A, diagonal_basis,
                                make_eigen_sequence, project_P_N,
                                resolvent_S_eta, sample_prior, weighted_norm)
from transport_langevin.oracle import small_ball_mc

rng = np.random.default_rng(0)

print("== eigenvalue sequence at the decay boundary ==")
eigen = make_eigen_sequence(c_mu=1.0, decay_exponent=2.0, n_modes=8)
print("mu_k:", np.round(eigen.mu, 4))

print("\n== regularizing operator and resolvent ==")
alpha = rng.standard_normal(8)
print("coefficients:        ", np.round(alpha, 3))
print("A alpha (lam=0.5):   ", np.round(apply_A(alpha, 0.5, eigen), 3))
shrunk = resolvent_S_eta(alpha, eta=0.2, lam=0.5, eigen=eigen)
print("resolvent (eta=0.2): ", np.round(shrunk, 3))
print(f"norm before/after:    {np.linalg.norm(alpha):.4f} -> {np.linalg.norm(shrunk):.4f} (contracts)")

print("\n== truncation and weighted norms ==")
print("P_3 alpha:", np.round(project_P_N(alpha, 3), 3))
for eps in (0.0, 0.5, -0.5):
    print(f"  ||alpha||_(eps={eps:+.1f}) = {weighted_norm(alpha, eigen, eps):.4f}")

print("\n== sampling the Gaussian reference measure ==")
spec = GaussianMeasureSpec(beta=10.0, lam=0.1, eigen=eigen)
basis = diagonal_basis(8)
draws = np.stack([sample_prior(spec, basis, rng)[:, 0] for _ in range(20000)])
print("per-mode variance, target vs sampled:")
for k in range(4):
    print(f"  mode {k}: {spec.mode_variances[k]:.4f} vs {draws[:, k].var():.4f}")

print("\n== small-ball mass of the reference measure ==")
for radius in (0.5, 1.0, 2.0):
    est = small_ball_mc(spec, radius, 100_000, rng)
    print(f"  P(||W|| <= {radius:>3}) ~ {est.probability:.4f}  (-log = {est.neg_log:.3f})")
