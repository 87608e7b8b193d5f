"""Weak-form DG spatial operator with entropy-projected interface traces.

Solution fields are (K, nq, 3) arrays of conservative values at the volume
nodes of each element. The weak form on element D^k,

    (du/dt, w) = (f(u), dw/dx) - <f*_n, w>_faces,

is realized in value space as

    du/dt = (1/J) [ WDr @ f(u) - LIFT @ (-F_left, +F_right) ],

with a single-valued +x-oriented numerical flux F per mesh face (so local
conservation telescopes exactly).
"""

from dataclasses import dataclass

import numpy as np

from esdg1d import basis, euler, fluxes
from esdg1d.mesh import Mesh1D

TRACE_MODES = ("entropy_projection", "direct")


@dataclass(frozen=True)
class Discretization:
    """A mesh bound to one reference-element operator set."""

    mesh: Mesh1D
    ops: basis.ElementOperators

    @property
    def x(self):
        return self.mesh.nodes(self.ops.r)

    @property
    def variant(self):
        return self.ops.variant

    def zeros(self):
        return np.zeros((self.mesh.K, self.ops.n_nodes, 3))


@dataclass(frozen=True)
class BoundaryData:
    """Boundary closure: periodic wraparound or frozen exterior (ghost) states."""

    mode: str
    ghost_left: np.ndarray | None = None
    ghost_right: np.ndarray | None = None


def periodic_bc():
    return BoundaryData("periodic")


def ghost_bc(q_left, q_right):
    return BoundaryData("dirichlet_ghost", np.asarray(q_left, float), np.asarray(q_right, float))


def nodal_discretization(mesh, N):
    return Discretization(mesh, basis.nodal_operators(N))


def modal_discretization(mesh, N, n_points=None):
    return Discretization(mesh, basis.modal_operators(N, n_points))


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def _orthonormal_at(points, N):
    return basis.legendre_values(points, N) * np.sqrt(np.arange(N + 1) + 0.5)


def project_initial(disc, fn, n_fine=None):
    """Quadrature-weighted L2 projection of fn(x) onto P^N, via a fine Gauss rule."""
    ops = disc.ops
    if n_fine is None:
        n_fine = ops.N + 8
    rule = basis.gauss_legendre(n_fine)
    V_fine = _orthonormal_at(rule.points, ops.N)
    M_fine = V_fine.T @ np.diag(rule.weights) @ V_fine
    vals = fn(disc.mesh.nodes(rule.points))
    coeff = np.einsum("nj,n,knc->kjc", V_fine, rule.weights, vals)
    coeff = np.einsum("ij,kjc->kic", np.linalg.inv(M_fine), coeff)
    return np.einsum("qj,kjc->kqc", ops.V, coeff)


def interpolate_initial(disc, fn):
    """Degree-N interpolation of fn(x), evaluated at the volume nodes."""
    ops = disc.ops
    if disc.variant == "nodal_lobatto":
        return fn(disc.x)
    # interpolate at N+1 Gauss points, then evaluate at the quadrature nodes
    pts = basis.gauss_legendre(ops.N + 1)
    vals = fn(disc.mesh.nodes(pts.points))
    coeff = np.einsum("ij,kjc->kic", np.linalg.inv(_orthonormal_at(pts.points, ops.N)), vals)
    return np.einsum("qj,kjc->kqc", ops.V, coeff)


# ---------------------------------------------------------------------------
# entropy projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyProjection:
    """Projected entropy variables and the face states they induce.

    v_vol   values of Pi_N v(u) at volume nodes, (K, nq, 3)
    v_face  traces of Pi_N v(u) at element faces, (K, 2, 3)
    u_tilde face states u(v_face), (K, 2, 3); for the nodal variant these
            are the endpoint values of u itself
    """

    v_vol: np.ndarray
    v_face: np.ndarray
    u_tilde: np.ndarray


def compute_entropy_projection(disc, u):
    v_q = euler.entropy_vars(u)
    if disc.variant == "nodal_lobatto":
        # collocation: projection = interpolation, face states = endpoint values
        return EntropyProjection(v_q, v_q[:, [0, -1], :], u[:, [0, -1], :])
    ops = disc.ops
    v_vol = np.einsum("qp,kpc->kqc", ops.Pi, v_q)
    v_face = np.einsum("fp,kpc->kfc", ops.Vfq, v_q)
    u_tilde = euler.cons_vars(v_face)
    return EntropyProjection(v_vol, v_face, u_tilde)


def face_traces(disc, u):
    """Interior traces of the solution polynomial at both faces, (K, 2, 3)."""
    if disc.variant == "nodal_lobatto":
        return u[:, [0, -1], :]
    return np.einsum("fp,kpc->kfc", disc.ops.Vfq, u)


# ---------------------------------------------------------------------------
# face data exchange and single-valued fluxes
# ---------------------------------------------------------------------------

def exterior_traces(traces, bc):
    """Exterior (neighbor) values opposite each element face, (K, 2, ...)."""
    ext = np.empty_like(traces)
    ext[:, 0] = np.roll(traces[:, 1], 1, axis=0)
    ext[:, 1] = np.roll(traces[:, 0], -1, axis=0)
    if bc.mode == "dirichlet_ghost":
        ext[0, 0] = bc.ghost_left
        ext[-1, 1] = bc.ghost_right
    return ext


def face_fluxes(flux_kind, traces, bc):
    """Single-valued +x-oriented numerical flux at each element's faces.

    Returns (f_left, f_right), each (K, 3); interior faces are evaluated once
    and shared by both incident elements.
    """
    K = traces.shape[0]
    if bc.mode == "periodic":
        # face f lies to the left of element f
        qL = np.roll(traces[:, 1], 1, axis=0)
        qR = traces[:, 0]
        F = fluxes.oriented_flux(flux_kind, qL, qR)
        return F, np.roll(F, -1, axis=0)
    qL = np.concatenate([bc.ghost_left[None], traces[:, 1]], axis=0)
    qR = np.concatenate([traces[:, 0], bc.ghost_right[None]], axis=0)
    F = fluxes.oriented_flux(flux_kind, qL, qR)
    return F[:-1], F[1:]


# ---------------------------------------------------------------------------
# weak-form RHS
# ---------------------------------------------------------------------------

def dg_rhs_weak(disc, u, flux_kind, bc, trace_mode="entropy_projection", proj=None, time=None):
    """Convective du/dt of the weak-form DG discretization."""
    if trace_mode not in TRACE_MODES:
        raise ValueError(f"unknown trace mode {trace_mode!r}")
    euler.check_admissible(u, "solution field", time=time)
    if trace_mode == "entropy_projection":
        if proj is None:
            proj = compute_entropy_projection(disc, u)
        traces = proj.u_tilde
    else:
        traces = face_traces(disc, u)
        euler.check_admissible(traces, "face traces", time=time)
    f_left, f_right = face_fluxes(flux_kind, traces, bc)
    ops = disc.ops
    vol = np.einsum("qp,kpc->kqc", ops.WDr, euler.flux(u))
    face_term = np.stack([-f_left, f_right], axis=1)
    surf = np.einsum("qf,kfc->kqc", ops.LIFT, face_term)
    return (vol - surf) / disc.mesh.jacobian


# ---------------------------------------------------------------------------
# entropy functionals
# ---------------------------------------------------------------------------

def elementwise_inner(disc, a, b):
    """Quadrature inner product (a, b)_{D^k} per element, contracting components."""
    if a.ndim == 3:
        return disc.mesh.jacobian * np.einsum("q,kqc,kqc->k", disc.ops.w, a, b)
    return disc.mesh.jacobian * np.einsum("q,kq,kq->k", disc.ops.w, a, b)


def cell_averages(disc, u):
    """Quadrature cell average per element, (K, 3)."""
    return 0.5 * np.einsum("q,kqc->kc", disc.ops.w, u)


def total_entropy(disc, u):
    """Sum over elements of (S(u), 1)."""
    return disc.mesh.jacobian * np.einsum("q,kq->", disc.ops.w, euler.entropy(u))


def entropy_rhs_test(disc, u, rhs, proj=None):
    """Sum over elements of (rhs, Pi_N v(u)); semi-discretely equals d/dt (S, 1)."""
    if proj is None:
        proj = compute_entropy_projection(disc, u)
    return float(np.sum(elementwise_inner(disc, rhs, proj.v_vol)))


def entropy_rate(disc, u, rhs, flux_kind, bc, trace_mode="entropy_projection", proj=None):
    """Semi-discrete entropy rate sum_k [(dS/dt, 1)_k + <v^T f* - psi(u~) n, 1>_k].

    Returns (rate, scale) where scale is the L1 size of the summands, the
    natural yardstick for 'zero up to roundoff'.
    """
    if proj is None:
        proj = compute_entropy_projection(disc, u)
    if trace_mode == "entropy_projection":
        traces = proj.u_tilde
    else:
        traces = face_traces(disc, u)
    f_left, f_right = face_fluxes(flux_kind, traces, bc)
    volume = elementwise_inner(disc, rhs, proj.v_vol)
    psi = euler.entropy_potential(proj.u_tilde)
    vf_right = np.einsum("kc,kc->k", proj.v_face[:, 1], f_right)
    vf_left = np.einsum("kc,kc->k", proj.v_face[:, 0], f_left)
    surface = (vf_right - psi[:, 1]) - (vf_left - psi[:, 0])
    rate = float(np.sum(volume) + np.sum(surface))
    scale = float(np.sum(np.abs(volume)) + np.sum(np.abs(vf_right)) + np.sum(np.abs(vf_left)) + np.sum(np.abs(psi)))
    return rate, scale


def interface_entropy_dissipation(disc, proj, flux_kind, bc):
    """Per interior face: -[[v]]^T F + [[psi]] (>= 0 for entropy stable fluxes)."""
    traces = proj.u_tilde
    f_left, _ = face_fluxes(flux_kind, traces, bc)
    psi = euler.entropy_potential(proj.u_tilde)
    if bc.mode == "periodic":
        v_right_of_face = proj.v_face[:, 0]
        v_left_of_face = np.roll(proj.v_face[:, 1], 1, axis=0)
        dpsi = psi[:, 0] - np.roll(psi[:, 1], 1, axis=0)
        F = f_left
    else:
        v_right_of_face = proj.v_face[1:, 0]
        v_left_of_face = proj.v_face[:-1, 1]
        dpsi = psi[1:, 0] - psi[:-1, 1]
        F = f_left[1:]
    dv = v_right_of_face - v_left_of_face
    return -np.einsum("kc,kc->k", dv, F) + dpsi
