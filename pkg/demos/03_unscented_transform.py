"""
Sigma points and the unscented transform
========================================

Sigma points reproduce a Gaussian's mean and covariance exactly. Pushed
through a linear map they give the exact transformed moments; through a
nonlinear map they give a better estimate than first-order linearization.
"""

from __future__ import annotations

import numpy as np

from facekf import UkfConfig, finite_difference_jacobian, generate_sigma_points
from facekf.ukf import unscented_transform

mean = np.array([0.0, 0.0])
cov = np.eye(2)
sigma = generate_sigma_points(mean, cov, UkfConfig(2, lam=1.0))

# 2n + 1 = 5 points at distance sqrt(n + lambda) = sqrt(3)
print("sigma points:\n", sigma.points)
print("weights:", sigma.mean_weights)

# %%
# A linear map is handled exactly.
A = np.array([[2.0, 1.0], [0.0, 3.0]])
m, P, _ = unscented_transform(sigma, lambda x: A @ x)
print("\nlinear map: UT covariance\n", P, "\nanalytic A P A^T\n", A @ cov @ A.T)

# %%
# Range and bearing of a point 10 mm away with 1 mm^2 uncertainty.
def polar(x):
    return np.array([np.hypot(x[0], x[1]), np.arctan2(x[1], x[0])])


mean = np.array([10.0, 0.0])
sigma = generate_sigma_points(mean, np.eye(2), UkfConfig(2, lam=1.0))
ut_mean, ut_cov, _ = unscented_transform(sigma, polar)
J = finite_difference_jacobian(polar, mean)

rng = np.random.default_rng(0)
samples = np.array([polar(s) for s in rng.multivariate_normal(mean, np.eye(2), 200_000)])

print("\nrange mean   Monte Carlo {:.4f}  UT {:.4f}  linearized {:.4f}".format(
    samples[:, 0].mean(), ut_mean[0], polar(mean)[0]))
print("range var    Monte Carlo {:.4f}  UT {:.4f}  linearized {:.4f}".format(
    samples[:, 0].var(), ut_cov[0, 0], (J @ J.T)[0, 0]))
