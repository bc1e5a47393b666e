"""Geodesics of the boundary metric, integrated in ambient coordinates.

For a metric g = Sigma^{-1} restricted to the level set S = 0, the geodesic
equation of the induced metric reads x'' = mu Sigma grad S with the multiplier
fixed by keeping x'' . Hess(S) consistent with staying on S = 0.  This is
independent of the chart machinery and finite differences used by the rays.
"""
import numpy as np
from scipy.integrate import solve_ivp


def ambient_geodesic(sigma, semi_axes, x0, v0, times):
    axes = np.asarray(semi_axes, dtype=float)
    hess = np.diag(2.0 / axes ** 2)

    def rhs(_, z):
        x, v = z[:3], z[3:]
        gs = 2.0 * x / axes ** 2
        mu = -(v @ hess @ v) / (gs @ sigma @ gs)
        return np.concatenate([v, mu * (sigma @ gs)])

    sol = solve_ivp(rhs, (times[0], times[-1]), np.concatenate([x0, v0]), method="DOP853",
                    rtol=1e-13, atol=1e-14, dense_output=True)
    return sol.sol(times)[:3].T
