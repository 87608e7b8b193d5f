"""Entropy-correction artificial viscosity.

The weak-form DG operator does not satisfy a cell entropy identity under
inexact quadrature; the per-element violation is measured by the volume
entropy residual delta_k. A BR-1 viscous term sized by the smallest
coefficient that cancels min(0, delta_k) restores a global semi-discrete
entropy inequality:

    delta_k               quadrature cell-entropy-identity defect
    Theta                 BR-1 weak gradient of the projected entropy variables
    a(x) = Theta^T K Theta   pointwise viscous entropy dissipation density
    d_k  = (a, 1)_k          element dissipation
    eps_k = reg(-min(0, delta_k), d_k)   elementwise coefficient
    eps_k(x) = reg(-min(0, delta_k), ||a||^2) a(x)   minimum-norm subcell field

with reg(p, q) = p q / (delta_tol + q^2) the regularized ratio that sends the
coefficient to zero as the solution approaches a constant. K = du/dv is
evaluated at the element-average state.

Two cheaper single-element corrections (mean-value and derivative-based) are
provided as comparison baselines, and a second residual variant evaluates the
entropy potential at the solution instead of its entropy projection.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from esdg1d import dg, euler
from esdg1d.errors import AdmissibilityError

VISCOSITY_MODES = (
    "none",
    "elementwise",
    "subcell",
    "mv_correction",
    "deriv_correction",
    "two_inequalities",
)

DELTA_TOL_DEFAULT = 1e-14


class SpuriousGradientWarning(UserWarning):
    """Viscous dissipation is tiny relative to the entropy residual (null-mode hazard)."""


def regularized_ratio(num, den, delta_tol=DELTA_TOL_DEFAULT):
    """num/den computed as num*den/(delta_tol + den^2)."""
    return num * den / (delta_tol + den * den)


def br1_gradient(disc, proj, bc):
    """BR-1 weak gradient of the projected entropy variables, (K, nq, 3).

    Central face coupling with jump [[v]] = v_ext - v_int; at ghost-state
    boundaries the jump is closed with zero (the viscous operator carries no
    boundary data).
    """
    ops = disc.ops
    J = disc.mesh.jacobian
    vol = np.einsum("qp,kpc->kqc", ops.Dr, proj.v_vol)
    ext = dg.exterior_traces(proj.v_face, bc)
    if bc.mode == "dirichlet_ghost":
        ext = ext.copy()
        ext[0, 0] = proj.v_face[0, 0]
        ext[-1, 1] = proj.v_face[-1, 1]
    jump = ext - proj.v_face
    face_term = np.stack([-0.5 * jump[:, 0], 0.5 * jump[:, 1]], axis=1)
    lift = np.einsum("qf,kfc->kqc", ops.LIFT, face_term)
    return (vol + lift) / J


def element_kmatrices(disc, u):
    """du/dv at the element-average state, (K, 3, 3); Cholesky-validated SPD."""
    ubar = dg.cell_averages(disc, u)
    euler.check_admissible(ubar, "element averages")
    A0 = euler.dudv(ubar)
    try:
        np.linalg.cholesky(A0)
    except np.linalg.LinAlgError as exc:
        raise AdmissibilityError("du/dv not positive definite at an element average") from exc
    return A0


def volume_entropy_residual(disc, u, proj):
    """delta_k = (-f(u), d(Pi_N v)/dx)_k + <psi(u~) n, 1>_k, shape (K,)."""
    ops = disc.ops
    dv_dr = np.einsum("qp,kpc->kqc", ops.Dr, proj.v_vol)
    # volume jacobians cancel: J * (f, dv/dx) = sum_q w_q f_q (Dr v)_q
    vol = -np.einsum("q,kqc,kqc->k", ops.w, euler.flux(u), dv_dr)
    psi = euler.entropy_potential(proj.u_tilde)
    return vol + psi[:, 1] - psi[:, 0]


def second_inequality_residual(disc, u, proj):
    """Residual with psi evaluated at the solution's own face traces."""
    ops = disc.ops
    dv_dr = np.einsum("qp,kpc->kqc", ops.Dr, proj.v_vol)
    vol = -np.einsum("q,kqc,kqc->k", ops.w, euler.flux(u), dv_dr)
    psi = euler.entropy_potential(dg.face_traces(disc, u))
    return vol + psi[:, 1] - psi[:, 0]


def dissipation_density(theta, kmats):
    """Pointwise a(x) = Theta^T K Theta >= 0, shape (K, nq)."""
    # clamp roundoff negatives; K is SPD so the form is nonnegative
    return np.maximum(np.einsum("kqi,kij,kqj->kq", theta, kmats, theta), 0.0)


def viscosity_elementwise(delta, a_density, disc, delta_tol=DELTA_TOL_DEFAULT):
    """Smallest constant coefficient per element, via the regularized ratio."""
    b = np.maximum(0.0, -delta)
    d = dg.elementwise_inner(disc, a_density, np.ones_like(a_density))
    _warn_spurious(delta, d)
    return regularized_ratio(b, d, delta_tol)


def viscosity_subcell(delta, a_density, disc, delta_tol=DELTA_TOL_DEFAULT):
    """Minimum-L2-norm nodal coefficient eps(x) = -min(0, delta) a(x)/||a||^2."""
    b = np.maximum(0.0, -delta)
    a_norm2 = dg.elementwise_inner(disc, a_density, a_density)
    _warn_spurious(delta, a_norm2)
    return regularized_ratio(b, a_norm2, delta_tol)[:, None] * a_density


def _warn_spurious(delta, den):
    # only flag residuals clearly above roundoff
    hazard = (delta < -1e-12) & (den < 1e-10 * np.abs(delta))
    if np.any(hazard):
        warnings.warn(
            "viscous entropy dissipation is << the entropy residual on "
            f"{int(np.sum(hazard))} element(s); gradient null modes suspected",
            SpuriousGradientWarning,
            stacklevel=3,
        )


def gvisc_br1(disc, eps, kmats, theta, bc):
    """BR-1 viscous RHS contribution for coefficient eps ((K,) or (K, nq)).

    At ghost-state boundaries the viscous flux is closed with {sigma} n = 0
    (no viscous flux through the boundary); together with the zero-jump
    gradient closure this keeps the global dissipation identity exact for
    any admissible state, not just on periodic meshes.
    """
    ops = disc.ops
    J = disc.mesh.jacobian
    if eps.ndim == 1:
        eps = eps[:, None]
    sigma = np.einsum("qp,kpc->kqc", ops.Pi, eps[..., None] * np.einsum("kij,kqj->kqi", kmats, theta))
    sig_face = np.einsum("fp,kpc->kfc", ops.Vfq, sigma)
    ext = dg.exterior_traces(sig_face, bc)
    if bc.mode == "dirichlet_ghost":
        ext = ext.copy()
        ext[0, 0] = -sig_face[0, 0]
        ext[-1, 1] = -sig_face[-1, 1]
    avg = 0.5 * (sig_face + ext)
    face_term = np.stack([-avg[:, 0], avg[:, 1]], axis=1)
    vol = np.einsum("qp,kpc->kqc", ops.WDr, sigma)
    surf = np.einsum("qf,kfc->kqc", ops.LIFT, face_term)
    return (-vol + surf) / J


def local_correction_mv(disc, u, proj, delta, kmats, delta_tol=DELTA_TOL_DEFAULT):
    """Mean-value correction g = -eps A0 (Pi_N v - vbar), sized like the BR-1 term."""
    vbar = 0.5 * np.einsum("q,kqc->kc", disc.ops.w, proj.v_vol)
    dv = proj.v_vol - vbar[:, None, :]
    Adv = np.einsum("kij,kqj->kqi", kmats, dv)
    den = dg.elementwise_inner(disc, Adv, dv)
    b = np.maximum(0.0, -delta)
    eps = regularized_ratio(b, den, delta_tol)
    if not np.any(eps):
        return None, eps
    return -eps[:, None, None] * Adv, eps


def local_correction_deriv(disc, u, proj, delta, kmats, delta_tol=DELTA_TOL_DEFAULT):
    """Derivative-based correction, a purely local weak Laplacian with A0 scaling."""
    ops = disc.ops
    J = disc.mesh.jacobian
    dvdx = np.einsum("qp,kpc->kqc", ops.Dr, proj.v_vol) / J
    Advdx = np.einsum("kij,kqj->kqi", kmats, dvdx)
    den = dg.elementwise_inner(disc, Advdx, dvdx)
    b = np.maximum(0.0, -delta)
    eps = regularized_ratio(b, den, delta_tol)
    if not np.any(eps):
        return None, eps
    g = -np.einsum("qp,kpc->kqc", ops.WDr, Advdx) / J
    return eps[:, None, None] * g, eps


@dataclass
class ViscosityData:
    """Per-evaluation viscosity diagnostics kept for histories and snapshots."""

    mode: str
    delta: np.ndarray
    eps_element: np.ndarray
    eps_node: np.ndarray
    dissipation: np.ndarray | None = None


def viscous_rhs(disc, u, proj, mode, bc, delta_tol=DELTA_TOL_DEFAULT):
    """Dispatch on viscosity mode; returns (g or None, ViscosityData).

    g is None exactly when the coefficient vanishes on every element, so the
    caller can keep the convective RHS bit-identical in that case.
    """
    nq = disc.ops.n_nodes
    K = disc.mesh.K
    if mode == "none":
        z = np.zeros(K)
        return None, ViscosityData(mode, z, z, np.zeros((K, nq)))
    kmats = element_kmatrices(disc, u)
    delta = volume_entropy_residual(disc, u, proj)

    if mode in ("mv_correction", "deriv_correction"):
        fn = local_correction_mv if mode == "mv_correction" else local_correction_deriv
        g, eps = fn(disc, u, proj, delta, kmats, delta_tol)
        return g, ViscosityData(mode, delta, eps, np.broadcast_to(eps[:, None], (K, nq)).copy())

    theta = br1_gradient(disc, proj, bc)
    a_density = dissipation_density(theta, kmats)
    if mode == "elementwise":
        eps = viscosity_elementwise(delta, a_density, disc, delta_tol)
        eps_node = np.broadcast_to(eps[:, None], (K, nq)).copy()
    elif mode == "subcell":
        eps_node = viscosity_subcell(delta, a_density, disc, delta_tol)
        eps = 0.5 * np.einsum("q,kq->k", disc.ops.w, eps_node)
    elif mode == "two_inequalities":
        delta2 = second_inequality_residual(disc, u, proj)
        eps = np.maximum(
            viscosity_elementwise(delta, a_density, disc, delta_tol),
            viscosity_elementwise(delta2, a_density, disc, delta_tol),
        )
        eps_node = np.broadcast_to(eps[:, None], (K, nq)).copy()
    else:
        raise ValueError(f"unknown viscosity mode {mode!r}, expected one of {VISCOSITY_MODES}")

    data = ViscosityData(mode, delta, eps, eps_node)
    if not np.any(eps_node):
        return None, data
    coeff = eps if mode in ("elementwise", "two_inequalities") else eps_node
    g = gvisc_br1(disc, coeff, kmats, theta, bc)
    data.dissipation = dg.elementwise_inner(disc, eps_node * a_density, np.ones((K, nq)))
    return g, data
