"""Run-to-numbers diagnostics: error norms, exact Riemann oracle, linearized
spectra, entropy-residual convergence study, BR-1 gradient null-space probe,
and entropy-history analysis."""

import math
from dataclasses import dataclass, field

import numpy as np

from esdg1d import basis, dg, euler, mesh, viscosity


# ---------------------------------------------------------------------------
# error norms
# ---------------------------------------------------------------------------

def l2_error(disc, u, exact, t):
    """Quadrature-weighted global L2 norm of u - exact(x, t) over all components."""
    diff = u - exact(disc.x, t)
    return float(np.sqrt(disc.mesh.jacobian * np.einsum("q,kqc,kqc->", disc.ops.w, diff, diff)))


def l1_error(disc, u, reference_values):
    """Quadrature-weighted global L1 norm of u - reference (values at nodes)."""
    diff = np.abs(u - reference_values)
    return float(disc.mesh.jacobian * np.einsum("q,kqc->", disc.ops.w, diff))


# ---------------------------------------------------------------------------
# exact Riemann solver (oracle only)
# ---------------------------------------------------------------------------

def _pressure_fn(p, rho_k, p_k, a_k, gamma):
    """Toro's f_K(p) and its derivative."""
    if p > p_k:
        A = 2.0 / ((gamma + 1.0) * rho_k)
        B = (gamma - 1.0) / (gamma + 1.0) * p_k
        sq = math.sqrt(A / (B + p))
        return (p - p_k) * sq, sq * (1.0 - 0.5 * (p - p_k) / (B + p))
    f = 2.0 * a_k / (gamma - 1.0) * ((p / p_k) ** ((gamma - 1.0) / (2.0 * gamma)) - 1.0)
    df = (p / p_k) ** (-(gamma + 1.0) / (2.0 * gamma)) / (rho_k * a_k)
    return f, df


def riemann_star(qL, qR, gamma=euler.GAMMA, tol=1e-14, max_iter=100):
    """Star-region pressure and velocity for a 1D Riemann problem."""
    rhoL, uL, pL = (float(v) for v in euler.cons_to_prim(np.asarray(qL, float)))
    rhoR, uR, pR = (float(v) for v in euler.cons_to_prim(np.asarray(qR, float)))
    aL = math.sqrt(gamma * pL / rhoL)
    aR = math.sqrt(gamma * pR / rhoR)
    if 2.0 * (aL + aR) / (gamma - 1.0) <= uR - uL:
        raise ValueError("vacuum-generating Riemann data is not supported")
    du = uR - uL
    # PVRS guess, floored away from zero
    p = max(
        0.5 * (pL + pR) - 0.125 * du * (rhoL + rhoR) * (aL + aR),
        1e-8 * min(pL, pR),
    )
    for _ in range(max_iter):
        fL, dfL = _pressure_fn(p, rhoL, pL, aL, gamma)
        fR, dfR = _pressure_fn(p, rhoR, pR, aR, gamma)
        step = (fL + fR + du) / (dfL + dfR)
        p_new = p - step
        if p_new <= 0.0:
            p_new = 0.5 * p
        if abs(p_new - p) < tol * p_new:
            p = p_new
            break
        p = p_new
    fL, _ = _pressure_fn(p, rhoL, pL, aL, gamma)
    fR, _ = _pressure_fn(p, rhoR, pR, aR, gamma)
    u_star = 0.5 * (uL + uR) + 0.5 * (fR - fL)
    return p, u_star


def exact_riemann(qL, qR, xi, gamma=euler.GAMMA):
    """Self-similar exact solution sampled at xi = x/t, conservative variables.

    Vectorized over xi.
    """
    rhoL, uL, pL = (float(v) for v in euler.cons_to_prim(np.asarray(qL, float)))
    rhoR, uR, pR = (float(v) for v in euler.cons_to_prim(np.asarray(qR, float)))
    aL = math.sqrt(gamma * pL / rhoL)
    aR = math.sqrt(gamma * pR / rhoR)
    p_star, u_star = riemann_star(qL, qR, gamma)
    gm = (gamma - 1.0) / (gamma + 1.0)

    xi = np.asarray(xi, dtype=float)
    rho = np.empty_like(xi)
    u = np.empty_like(xi)
    p = np.empty_like(xi)

    left_of_contact = xi <= u_star
    # left wave
    if p_star > pL:  # shock
        sL = uL - aL * math.sqrt((gamma + 1.0) / (2.0 * gamma) * p_star / pL + (gamma - 1.0) / (2.0 * gamma))
        rho_starL = rhoL * (p_star / pL + gm) / (gm * p_star / pL + 1.0)
        pre = xi < sL
        fan = np.zeros_like(pre)
    else:  # rarefaction
        a_starL = aL * (p_star / pL) ** ((gamma - 1.0) / (2.0 * gamma))
        head, tail = uL - aL, u_star - a_starL
        rho_starL = rhoL * (p_star / pL) ** (1.0 / gamma)
        pre = xi < head
        fan = (xi >= head) & (xi < tail)
    m = left_of_contact & pre
    rho[m], u[m], p[m] = rhoL, uL, pL
    m = left_of_contact & fan
    if np.any(m):
        fac = 2.0 / (gamma + 1.0) + gm / aL * (uL - xi[m])
        rho[m] = rhoL * fac ** (2.0 / (gamma - 1.0))
        u[m] = 2.0 / (gamma + 1.0) * (aL + 0.5 * (gamma - 1.0) * uL + xi[m])
        p[m] = pL * fac ** (2.0 * gamma / (gamma - 1.0))
    m = left_of_contact & ~pre & ~fan
    rho[m], u[m], p[m] = rho_starL, u_star, p_star

    right_of_contact = ~left_of_contact
    if p_star > pR:  # shock
        sR = uR + aR * math.sqrt((gamma + 1.0) / (2.0 * gamma) * p_star / pR + (gamma - 1.0) / (2.0 * gamma))
        rho_starR = rhoR * (p_star / pR + gm) / (gm * p_star / pR + 1.0)
        post = xi > sR
        fan = np.zeros_like(post)
    else:
        a_starR = aR * (p_star / pR) ** ((gamma - 1.0) / (2.0 * gamma))
        head, tail = uR + aR, u_star + a_starR
        rho_starR = rhoR * (p_star / pR) ** (1.0 / gamma)
        post = xi > head
        fan = (xi <= head) & (xi > tail)
    m = right_of_contact & post
    rho[m], u[m], p[m] = rhoR, uR, pR
    m = right_of_contact & fan
    if np.any(m):
        fac = 2.0 / (gamma + 1.0) - gm / aR * (uR - xi[m])
        rho[m] = rhoR * fac ** (2.0 / (gamma - 1.0))
        u[m] = 2.0 / (gamma + 1.0) * (-aR + 0.5 * (gamma - 1.0) * uR + xi[m])
        p[m] = pR * fac ** (2.0 * gamma / (gamma - 1.0))
    m = right_of_contact & ~post & ~fan
    rho[m], u[m], p[m] = rho_starR, u_star, p_star

    return euler.prim_to_cons(rho, u, p, gamma)


def riemann_reference(disc, qL, qR, x0, t):
    """Exact Riemann solution at the discretization nodes and time t > 0."""
    return exact_riemann(qL, qR, (disc.x - x0) / t)


# ---------------------------------------------------------------------------
# linearized spectra
# ---------------------------------------------------------------------------

@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real: float
    meta: dict = field(default_factory=dict)

    def conjugation_defect(self):
        """Distance of the spectrum from closure under conjugation."""
        lam = self.eigenvalues
        defect = 0.0
        for z in lam:
            defect = max(defect, float(np.min(np.abs(lam - np.conj(z)))))
        return defect


def linearized_spectrum(rhs, u0, meta=None):
    """Dense eigenvalues of the finite-difference Jacobian of rhs at u0.

    Central differences with step sqrt(machine eps) * (1 + |u_j|) per column.
    """
    shape = u0.shape
    x0 = u0.ravel().copy()
    n = x0.size
    if n > 4000:
        raise ValueError(f"dense spectrum limited to ~4000 unknowns, got {n}")
    sqrt_eps = math.sqrt(np.finfo(float).eps)
    jac = np.empty((n, n))
    for j in range(n):
        h = sqrt_eps * (1.0 + abs(x0[j]))
        xp = x0.copy()
        xp[j] += h
        xm = x0.copy()
        xm[j] -= h
        fp = rhs(xp.reshape(shape), 0.0).ravel()
        fm = rhs(xm.reshape(shape), 0.0).ravel()
        jac[:, j] = (fp - fm) / (2.0 * h)
    lam = np.linalg.eigvals(jac)
    return SpectrumReport(lam, float(np.max(lam.real)), dict(meta or {}))


# ---------------------------------------------------------------------------
# convergence tables
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceTable:
    """Rows of (h, named values), sorted by decreasing h."""

    h: np.ndarray
    values: dict

    def __post_init__(self):
        order = np.argsort(self.h)[::-1]
        self.h = np.asarray(self.h, float)[order]
        self.values = {k: np.asarray(v, float)[order] for k, v in self.values.items()}

    def incremental_rates(self, name):
        v = self.values[name]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(v[:-1] / v[1:]) / np.log(self.h[:-1] / self.h[1:])

    def ls_slope(self, name, n_points=3):
        """Least-squares slope of log(value) vs log(h) over the finest n_points."""
        v = self.values[name][-n_points:]
        h = self.h[-n_points:]
        keep = v > 0
        if keep.sum() < 2:
            return float("nan")
        return float(np.polyfit(np.log(h[keep]), np.log(v[keep]), 1)[0])


def residual_convergence_study(N, K_list, field=None, quadrature="high", domain=(-1.0, 1.0)):
    """Max volume entropy residual and viscosity coefficient of the projected
    smooth field over a sweep of mesh sizes.

    quadrature="high" uses the (N+2)-point Gauss volume rule (exact well past
    degree 2N+1); "default" uses the (N+1)-point left-Radau rule, exact for
    degree 2N only, which costs one order of residual convergence.
    """
    if field is None:
        from esdg1d.driver import smooth_residual_field

        field = smooth_residual_field().ic
    if quadrature == "high":
        rule = basis.gauss_legendre(N + 2)
    elif quadrature == "default":
        rule = basis.gauss_radau(N + 1)
    else:
        raise ValueError(f"unknown quadrature option {quadrature!r}")
    max_delta, max_eps = [], []
    for K in K_list:
        ops = basis._operators_from_rule(N, "modal_gauss", rule)
        m = mesh.make_mesh(domain[0], domain[1], K, "periodic")
        disc = dg.Discretization(m, ops)
        u = np.einsum("qp,kpc->kqc", ops.Pi, field(disc.x))
        proj = dg.compute_entropy_projection(disc, u)
        delta = viscosity.volume_entropy_residual(disc, u, proj)
        kmats = viscosity.element_kmatrices(disc, u)
        theta = viscosity.br1_gradient(disc, proj, dg.periodic_bc())
        a = viscosity.dissipation_density(theta, kmats)
        eps = viscosity.viscosity_elementwise(delta, a, disc)
        max_delta.append(np.max(np.abs(delta)))
        max_eps.append(np.max(eps))
    h = (domain[1] - domain[0]) / np.asarray(K_list, float)
    return ConvergenceTable(h, {"max_delta": max_delta, "max_eps": max_eps})


# ---------------------------------------------------------------------------
# BR-1 gradient null space
# ---------------------------------------------------------------------------

def assemble_gradient_matrix(disc, bc=None):
    """Dense matrix of the scalar BR-1 gradient on the whole periodic mesh."""
    if bc is None:
        bc = dg.periodic_bc()
    K, nq = disc.mesh.K, disc.ops.n_nodes
    n = K * nq
    G = np.empty((n, n))
    for j in range(n):
        v = np.zeros((K, nq, 1))
        v.ravel()[j] = 1.0
        vf = np.einsum("fp,kpc->kfc", disc.ops.Vfq, v)
        proj = dg.EntropyProjection(v, vf, None)
        G[:, j] = viscosity.br1_gradient(disc, proj, bc).ravel()
    return G


def gradient_nullspace(m, N, tol=1e-10):
    """Null space of the assembled BR-1 gradient beyond constants.

    Returns (extra_dimension, modes, singular_values) where modes has one
    null vector per column, constants projected out, shaped (K, nq, n_modes).
    """
    disc = dg.nodal_discretization(m, N)
    G = assemble_gradient_matrix(disc)
    _, s, vt = np.linalg.svd(G)
    thresh = tol * max(1.0, s[0])
    null = vt[s < thresh].T if np.any(s < thresh) else np.zeros((G.shape[0], 0))
    # project out the constant direction, then orthonormalize with rank
    # truncation (the projected columns can be linearly dependent)
    const = np.ones(G.shape[0]) / math.sqrt(G.shape[0])
    noncon = null - np.outer(const, const @ null)
    if noncon.shape[1]:
        U, sv, _ = np.linalg.svd(noncon, full_matrices=False)
        modes = U[:, sv > 1e-8]
    else:
        modes = noncon
    K, nq = disc.mesh.K, disc.ops.n_nodes
    return modes.shape[1], modes.reshape(K, nq, -1), s


# ---------------------------------------------------------------------------
# entropy histories
# ---------------------------------------------------------------------------

@dataclass
class HistoryReport:
    monotone: bool
    max_increase: float
    first_violation: int | None


def entropy_history_report(total_entropy, slack=0.0):
    """Monotonicity check of a total-entropy time series with per-step slack."""
    S = np.asarray(total_entropy, float)
    inc = np.diff(S)
    bad = inc > slack
    first = int(np.argmax(bad)) if np.any(bad) else None
    return HistoryReport(not np.any(bad), float(np.max(inc)) if inc.size else 0.0, first)
