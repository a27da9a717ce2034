"""Reference values computed independently of the library under test.

Everything here goes through scipy.integrate or hand-rolled classical
schemes on the textbook form of each problem, so agreement with the
package is evidence rather than tautology.
"""

import math

import numpy as np
from scipy.integrate import quad


def polytrope_coefficient(k, amplitude=1.0):
    """Closed form of the density prefactor for the polytropic profile.

    Integrating amplitude * (y - v^2/2)^k over velocity space gives
    c_k y^(k + 3/2) with c_k expressed through Gamma functions.
    """
    from scipy.special import gamma

    return (
        4.0
        * math.pi
        * math.sqrt(2.0)
        * amplitude
        * gamma(k + 1.0)
        * gamma(1.5)
        / gamma(k + 2.5)
    )


def isotropic_density(k, amplitude, y):
    """Density from the velocity-space integral, by adaptive quadrature."""
    if y <= 0.0:
        return 0.0
    v_max = math.sqrt(2.0 * y)
    val, _ = quad(
        lambda v: v * v * (y - 0.5 * v * v) ** k,
        0.0,
        v_max,
        epsabs=0.0,
        epsrel=1e-13,
    )
    return 4.0 * math.pi * amplitude * val


def lane_emden(n, h=1e-3):
    """First zero of the Lane-Emden equation of index n.

    Fixed-step RK4 started on the series expansion
    theta = 1 - xi^2/6 + n xi^4/120, with the crossing refined by cubic
    Hermite interpolation on the last step.  Returns (xi1, -xi1^2 theta').
    """

    def rhs(x, th, dth):
        return dth, -2.0 * dth / x - max(th, 0.0) ** n

    xi = 1e-3
    theta = 1.0 - xi**2 / 6.0 + n * xi**4 / 120.0
    dtheta = -xi / 3.0 + n * xi**3 / 30.0

    while theta > 0.0:
        xi0, th0, dth0 = xi, theta, dtheta
        k1t, k1d = rhs(xi, theta, dtheta)
        k2t, k2d = rhs(xi + 0.5 * h, theta + 0.5 * h * k1t, dtheta + 0.5 * h * k1d)
        k3t, k3d = rhs(xi + 0.5 * h, theta + 0.5 * h * k2t, dtheta + 0.5 * h * k2d)
        k4t, k4d = rhs(xi + h, theta + h * k3t, dtheta + h * k3d)
        theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
        dtheta += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        xi += h
        if xi > 60.0:
            raise RuntimeError("Lane-Emden solution never crossed zero")

    def hermite(t):
        t2, t3 = t * t, t * t * t
        val = (
            (2.0 * t3 - 3.0 * t2 + 1.0) * th0
            + (t3 - 2.0 * t2 + t) * h * dth0
            + (-2.0 * t3 + 3.0 * t2) * theta
            + (t3 - t2) * h * dtheta
        )
        slope = (
            (6.0 * t2 - 6.0 * t) * th0
            + (3.0 * t2 - 4.0 * t + 1.0) * h * dth0
            + (-6.0 * t2 + 6.0 * t) * theta
            + (3.0 * t2 - 2.0 * t) * h * dtheta
        ) / h
        return val, slope

    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if hermite(mid)[0] > 0.0:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    xi1 = xi0 + t_star * h
    slope = hermite(t_star)[1]
    return xi1, -(xi1**2) * slope


def kepler_period(mass, energy):
    """Radial period of a bound orbit around a point mass."""
    return 2.0 * math.pi * mass * (-2.0 * energy) ** -1.5


def kepler_turning_points(mass, energy, ell):
    """Roots of E r^2 + M r - L/2 = 0 for the point-mass potential."""
    disc = math.sqrt(mass * mass + 2.0 * energy * ell)
    return (mass - disc) / (-2.0 * energy), (mass + disc) / (-2.0 * energy)


def relativistic_momenta(k, amplitude, cutoff, q):
    """Density and pressure of the relativistic profile at depth q.

    Direct adaptive quadrature over the modulus of momentum, with the
    particle energy e^mu sqrt(1 + u^2) written via cutoff * exp(-q).
    """
    u_max = math.sqrt(math.expm1(2.0 * q))
    scale = cutoff * math.exp(-q)

    def profile(u):
        depth = cutoff - scale * math.sqrt(1.0 + u * u)
        return amplitude * depth**k if depth > 0.0 else 0.0

    rho, _ = quad(
        lambda u: u * u * math.sqrt(1.0 + u * u) * profile(u),
        0.0,
        u_max,
        epsabs=1e-15,
        epsrel=1e-13,
    )
    p, _ = quad(
        lambda u: u**4 / math.sqrt(1.0 + u * u) * profile(u),
        0.0,
        u_max,
        epsabs=1e-15,
        epsrel=1e-13,
    )
    return 4.0 * math.pi * rho, 4.0 * math.pi / 3.0 * p


def _ball_samples(rng, radius, count):
    direction = rng.standard_normal((count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    shell = radius * rng.uniform(0.0, 1.0, count) ** (1.0 / 3.0)
    return direction * shell[:, None]


def mc_phase_space_integral(fn, r_cap, w_cap, n_samples, seed, chunk=500_000):
    """Monte Carlo integral of fn over position-velocity space.

    Samples (x, v) uniformly from the product of two balls and evaluates
    fn on the reduced coordinates r = |x|, w = x.v/|x|, and the squared
    angular momentum |x x v|^2.  Returns (estimate, standard error); the
    reduced-coordinate integral with its 4 pi^2 volume factor must agree
    within the error bar.
    """
    rng = np.random.default_rng(seed)
    volume = (4.0 / 3.0 * math.pi * r_cap**3) * (4.0 / 3.0 * math.pi * w_cap**3)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = _ball_samples(rng, r_cap, m)
        v = _ball_samples(rng, w_cap, m)
        r = np.linalg.norm(x, axis=1)
        radial = np.einsum("ij,ij->i", x, v) / r
        ell = r * r * np.einsum("ij,ij->i", v, v) - (radial * r) ** 2
        vals = fn(r, radial, np.maximum(ell, 0.0))
        total += float(np.sum(vals))
        total_sq += float(np.sum(vals * vals))
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return volume * mean, volume * math.sqrt(var / n_samples)
