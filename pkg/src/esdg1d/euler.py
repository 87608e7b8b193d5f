"""Pointwise compressible-Euler physics (1D, ideal gas, gamma = 1.4).

Conservative states are (..., 3) arrays ordered (rho, rho*u, E). All maps are
vectorized over leading axes. Admissibility means rho > 0 and rho*e > 0.
"""

import numpy as np

from esdg1d.errors import AdmissibilityError

GAMMA = 1.4


def prim_to_cons(rho, u, p, gamma=GAMMA):
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    E = p / (gamma - 1.0) + 0.5 * rho * u**2
    return np.stack(np.broadcast_arrays(rho, rho * u, E), axis=-1)


def cons_to_prim(q, gamma=GAMMA):
    rho = q[..., 0]
    u = q[..., 1] / rho
    p = (gamma - 1.0) * (q[..., 2] - 0.5 * q[..., 1] * u)
    return rho, u, p


def internal_energy(q):
    """rho*e = E - (rho u)^2 / (2 rho)."""
    return q[..., 2] - 0.5 * q[..., 1] ** 2 / q[..., 0]


def pressure(q, gamma=GAMMA):
    return (gamma - 1.0) * internal_energy(q)


def is_admissible(q):
    return bool(np.all(q[..., 0] > 0.0) and np.all(internal_energy(q) > 0.0))


def check_admissible(q, context="", time=None):
    """Raise AdmissibilityError with the first offending location."""
    bad = (q[..., 0] <= 0.0) | (internal_energy(q) <= 0.0) | ~np.isfinite(q).all(axis=-1)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        element = int(idx[0]) if idx.size >= 1 else None
        node = int(idx[1]) if idx.size >= 2 else None
        raise AdmissibilityError(
            f"inadmissible state{' in ' + context if context else ''}",
            element=element,
            node=node,
            time=time,
        )


def flux(q, gamma=GAMMA):
    """Inviscid flux (rho u, rho u^2 + p, u (E + p))."""
    rho, u, p = cons_to_prim(q, gamma)
    return np.stack([q[..., 1], q[..., 1] * u + p, u * (q[..., 2] + p)], axis=-1)


def sound_speed(q, gamma=GAMMA):
    rho, _, p = cons_to_prim(q, gamma)
    return np.sqrt(gamma * p / rho)


def max_wavespeed(qL, qR, gamma=GAMMA):
    """Davis estimate max(|u_L| + a_L, |u_R| + a_R)."""
    rhoL, uL, pL = cons_to_prim(qL, gamma)
    rhoR, uR, pR = cons_to_prim(qR, gamma)
    aL = np.sqrt(gamma * pL / rhoL)
    aR = np.sqrt(gamma * pR / rhoR)
    return np.maximum(np.abs(uL) + aL, np.abs(uR) + aR)


def physical_entropy(q, gamma=GAMMA):
    """s = log(p / rho^gamma)."""
    rho, _, p = cons_to_prim(q, gamma)
    return np.log(p) - gamma * np.log(rho)


def entropy(q, gamma=GAMMA):
    """Mathematical entropy S = -rho s / (gamma - 1).

    The 1/(gamma - 1) scaling is the one compatible with the entropy
    potential psi = rho u: it makes F = v^T f - psi hold exactly.
    """
    return -q[..., 0] * physical_entropy(q, gamma) / (gamma - 1.0)


def entropy_flux(q, gamma=GAMMA):
    """Entropy flux F = -rho s u / (gamma - 1)."""
    return entropy(q, gamma) * q[..., 1] / q[..., 0]


def entropy_potential(q):
    """psi = rho u."""
    return q[..., 1]


def entropy_vars(q, gamma=GAMMA):
    """v = dS/du for S = -rho s / (gamma - 1)."""
    rho, u, p = cons_to_prim(q, gamma)
    s = np.log(p) - gamma * np.log(rho)
    v1 = (gamma - s) / (gamma - 1.0) - 0.5 * rho * u**2 / p
    v2 = q[..., 1] / p
    v3 = -rho / p
    return np.stack([v1, v2, v3], axis=-1)


def cons_vars(v, gamma=GAMMA):
    """Inverse of entropy_vars; requires v3 < 0."""
    if np.any(v[..., 2] >= 0.0) or not np.all(np.isfinite(v)):
        bad = np.argwhere((v[..., 2] >= 0.0) | ~np.isfinite(v).all(axis=-1))[0]
        raise AdmissibilityError(
            "entropy variables outside the admissible range (v3 >= 0)",
            element=int(bad[0]) if bad.size >= 1 else None,
            node=int(bad[1]) if bad.size >= 2 else None,
        )
    # work in the unnormalized gradient of -rho s, where the inverse map has
    # its simplest closed form
    g1 = (gamma - 1.0) * v[..., 0]
    g2 = (gamma - 1.0) * v[..., 1]
    g3 = (gamma - 1.0) * v[..., 2]
    s = gamma - g1 + 0.5 * g2**2 / g3
    rho_e = ((gamma - 1.0) / (-g3) ** gamma) ** (1.0 / (gamma - 1.0)) * np.exp(-s / (gamma - 1.0))
    rho = -rho_e * g3
    rhou = rho_e * g2
    E = rho_e * (1.0 - 0.5 * g2**2 / g3)
    return np.stack([rho, rhou, E], axis=-1)


def dudv(q, gamma=GAMMA):
    """Symmetric positive definite Jacobian du/dv, shape (..., 3, 3)."""
    rho, u, p = cons_to_prim(q, gamma)
    E = q[..., 2]
    a2 = gamma * p / rho
    H = a2 / (gamma - 1.0) + 0.5 * u**2
    A = np.empty(q.shape[:-1] + (3, 3))
    A[..., 0, 0] = rho
    A[..., 0, 1] = q[..., 1]
    A[..., 0, 2] = E
    A[..., 1, 1] = q[..., 1] * u + p
    A[..., 1, 2] = u * (E + p)
    A[..., 2, 2] = rho * H**2 - a2 * p / (gamma - 1.0)
    A[..., 1, 0] = A[..., 0, 1]
    A[..., 2, 0] = A[..., 0, 2]
    A[..., 2, 1] = A[..., 1, 2]
    return A
