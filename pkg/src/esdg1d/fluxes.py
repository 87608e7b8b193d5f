"""Interface (numerical) fluxes and the two-point entropy-conservative volume flux.

All two-point functions take conservative states with the first argument on
the -x side of the interface and return the +x-oriented flux. They are
vectorized over leading axes.

``interface_flux`` additionally takes an outward normal n = +-1 and the
interior state first, so that the returned value is the outward numerical
flux f*_n seen by the owning element. With F the +x-oriented flux this is

    f*_n(u_int, u_ext, +1) =  F(u_int, u_ext)
    f*_n(u_int, u_ext, -1) = -F(u_ext, u_int)

which gives skew symmetry f*_n(a, b, n) = -f*_n(b, a, -n) by construction.
Entropy stability of a kind means (v_R - v_L)^T F(u_L, u_R) <= psi_R - psi_L
for geometric left/right states.
"""

import numpy as np

from esdg1d import euler

FLUX_KINDS = ("llf_davis", "hllc", "ec_ranocha", "ec_plus_matrix_dissipation")


def logmean(a, b):
    """Logarithmic mean (a - b) / (log a - log b), stable as a -> b.

    Switches to a series in xi = (a/b - 1)/(a/b + 1) for |xi| < 1e-4.
    Arguments are sorted first so the result is exactly symmetric.
    """
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    a = np.asarray(lo, dtype=float)
    b = np.asarray(hi, dtype=float)
    zeta = a / b
    f = (zeta - 1.0) / (zeta + 1.0)
    u = f * f
    small = np.abs(f) < 1e-4
    # avoid log(1)/0 warnings on the series branch
    safe = np.where(small, 2.0, zeta)
    direct = (a - b) / np.log(safe)
    series = (a + b) / (2.0 * (1.0 + u / 3.0 + u**2 / 5.0 + u**3 / 7.0))
    return np.where(small, series, direct)


def central_flux(qL, qR, gamma=euler.GAMMA):
    return 0.5 * (euler.flux(qL, gamma) + euler.flux(qR, gamma))


def llf_davis_flux(qL, qR, gamma=euler.GAMMA):
    """Local Lax-Friedrichs flux with the Davis wavespeed estimate."""
    lam = euler.max_wavespeed(qL, qR, gamma)
    return central_flux(qL, qR, gamma) - 0.5 * lam[..., None] * (qR - qL)


def ec_volume_flux(qL, qR, gamma=euler.GAMMA):
    """Entropy-conservative two-point flux (kinetic-energy and pressure-equilibrium
    preserving form with logarithmic means of rho and rho/p).

    Symmetric, consistent, and satisfies the Tadmor condition
    (v_L - v_R)^T f = psi_L - psi_R.
    """
    rhoL, uL, pL = euler.cons_to_prim(qL, gamma)
    rhoR, uR, pR = euler.cons_to_prim(qR, gamma)
    rho_mean = logmean(rhoL, rhoR)
    # 1 / logmean(rho_L/p_L, rho_R/p_R), rearranged to avoid the division
    inv_rho_p_mean = pL * pR / logmean(rhoL * pR, rhoR * pL)
    u_avg = 0.5 * (uL + uR)
    p_avg = 0.5 * (pL + pR)
    vel_sq_avg = 0.5 * uL * uR
    f1 = rho_mean * u_avg
    f2 = f1 * u_avg + p_avg
    f3 = f1 * (vel_sq_avg + inv_rho_p_mean / (gamma - 1.0)) + 0.5 * (pL * uR + pR * uL)
    return np.stack([f1, f2, f3], axis=-1)


def ec_matrix_dissipation_flux(qL, qR, gamma=euler.GAMMA):
    """EC flux plus symmetric positive semi-definite dissipation in entropy variables.

    Dissipation matrix: Davis wavespeed times du/dv at the arithmetic-average
    state, which keeps the pair entropy stable.
    """
    f = ec_volume_flux(qL, qR, gamma)
    lam = euler.max_wavespeed(qL, qR, gamma)
    A0 = euler.dudv(0.5 * (qL + qR), gamma)
    dv = euler.entropy_vars(qR, gamma) - euler.entropy_vars(qL, gamma)
    diss = np.einsum("...ij,...j->...i", A0, dv)
    return f - 0.5 * lam[..., None] * diss


def hllc_flux(qL, qR, gamma=euler.GAMMA):
    """HLLC flux with Davis-type bounds for the outer wavespeeds."""
    rhoL, uL, pL = euler.cons_to_prim(qL, gamma)
    rhoR, uR, pR = euler.cons_to_prim(qR, gamma)
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    sL = np.minimum(uL - aL, uR - aR)
    sR = np.maximum(uL + aL, uR + aR)
    num = pR - pL + rhoL * uL * (sL - uL) - rhoR * uR * (sR - uR)
    den = rhoL * (sL - uL) - rhoR * (sR - uR)
    s_star = num / den

    def star_state(q, rho, u, p, s_outer):
        factor = rho * (s_outer - u) / (s_outer - s_star)
        E = q[..., 2]
        e_star = E / rho + (s_star - u) * (s_star + p / (rho * (s_outer - u)))
        return np.stack([factor, factor * s_star, factor * e_star], axis=-1)

    fL = euler.flux(qL, gamma)
    fR = euler.flux(qR, gamma)
    f_starL = fL + sL[..., None] * (star_state(qL, rhoL, uL, pL, sL) - qL)
    f_starR = fR + sR[..., None] * (star_state(qR, rhoR, uR, pR, sR) - qR)

    out = np.where((0.0 <= sL)[..., None], fL, f_starL)
    out = np.where((sL < 0.0)[..., None] & (0.0 <= s_star)[..., None], f_starL, out)
    out = np.where((s_star < 0.0)[..., None] & (0.0 <= sR)[..., None], f_starR, out)
    out = np.where((sR < 0.0)[..., None], fR, out)
    return out


_ORIENTED = {
    "llf_davis": llf_davis_flux,
    "hllc": hllc_flux,
    "ec_ranocha": ec_volume_flux,
    "ec_plus_matrix_dissipation": ec_matrix_dissipation_flux,
    "central": central_flux,
}


def oriented_flux(kind, qL, qR, gamma=euler.GAMMA):
    """+x-oriented single-valued flux for geometric left/right states."""
    try:
        fn = _ORIENTED[kind]
    except KeyError:
        raise ValueError(f"unknown flux kind {kind!r}, expected one of {FLUX_KINDS}") from None
    return fn(qL, qR, gamma)


def interface_flux(kind, q_int, q_ext, n, gamma=euler.GAMMA):
    """Outward numerical flux f*_n for the element owning q_int; see module docstring."""
    if n == 1:
        return oriented_flux(kind, q_int, q_ext, gamma)
    if n == -1:
        return -oriented_flux(kind, q_ext, q_int, gamma)
    raise ValueError(f"normal must be +1 or -1, got {n}")
