"""Independent evaluation of the cash-flow Riccati pipeline and feedback value.

Uses scipy adaptive quadrature / ODE integration (rtol 1e-12), sharing no code
with the C++ solvers. Prints the frozen fixture values used in the unit tests.
"""
import numpy as np
from scipy.integrate import quad, solve_ivp

rho, c, sigma, disc, theta, a, m0, T = 0.2, 0.1, 0.3, 0.05, 0.5, 1.0, 1.0, 1.0
y0 = 0.3


def ybar(t):
    return y0 * (T - t) / T


kappa = rho
G = sigma**2
rate_a = 2 * c + kappa**2 / G
rate_b = c + kappa**2 / G


def A(t):
    return theta * np.exp(quad(lambda s: rate_a, t, T)[0])


def psi_phi_rhs(t, s):
    psi, phi = s
    return [rho**2 * psi**2 - 2 * disc * sigma**2 * A(t) * psi,
            (rho * psi - disc) * phi]


sol = solve_ivp(psi_phi_rhs, (0, T), [theta, 1 - theta * (y0 - a)],
                rtol=1e-12, atol=1e-14, dense_output=True)


def p3(t):
    psi, phi = sol.sol(t)
    return psi * ybar(t) + phi


def B(t):
    bt = 1 - theta * (y0 + a)
    hom = bt * np.exp(rate_b * (T - t))
    src = quad(lambda s: np.exp(rate_b * (s - t)) * c * p3(s), t, T,
               epsabs=1e-14, epsrel=1e-13)[0]
    return hom + src


psi0, phi0 = sol.sol(0.0)
u0 = -(kappa * (A(0) * m0 + B(0)) + rho * (psi0 * y0 + phi0)) / (A(0) * G)
print(f"A(0)   = {A(0):.17g}")
print(f"B(0)   = {B(0):.17g}")
print(f"psi(T) = {sol.sol(T)[0]:.17g}")
print(f"phi(T) = {sol.sol(T)[1]:.17g}")
print(f"u(0, m0, y0) = {u0:.17g}")

# Bernoulli testbed slope of the small-theta expansion residual.
for p in (0.5, 0.2):
    ths = np.array([0.05, 0.1, 0.2, 0.4])
    loss = np.log(1 - p + p * np.exp(ths)) / ths
    res = loss - (p + ths / 2 * p * (1 - p))
    slope = np.polyfit(np.log(ths), np.log(np.abs(res)), 1)[0]
    print(f"bernoulli p={p}: residuals={res}, slope={slope:.6f}")
