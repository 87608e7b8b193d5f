"""Experiment assembly: benchmark problems and ready-to-step semidiscretizations."""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from esdg1d import dg, euler, fluxdiff, mesh, viscosity

SCHEMES = ("weak_form", "flux_diff")


@dataclass(frozen=True)
class Problem:
    """A benchmark setup: domain, boundary treatment, initial data, references."""

    name: str
    a: float
    b: float
    t_final: float
    bc_mode: str
    ic: Callable
    exact: Callable | None = None
    riemann_data: tuple | None = None


def density_wave(amplitude=0.5):
    if not abs(amplitude) < 1.0:
        raise ValueError(f"density wave needs |A| < 1, got {amplitude}")

    def ic(x):
        return euler.prim_to_cons(
            1.0 + amplitude * np.sin(2 * np.pi * x), np.full_like(x, 0.1), np.full_like(x, 10.0)
        )

    def exact(x, t):
        return euler.prim_to_cons(
            1.0 + amplitude * np.sin(2 * np.pi * (x - 0.1 * t)),
            np.full_like(x, 0.1),
            np.full_like(x, 10.0),
        )

    return Problem(f"density_wave(A={amplitude})", 0.0, 1.0, 25.0, "periodic", ic, exact)


def riemann_problem(name, left, right, x0, a, b, t_final):
    qL = euler.prim_to_cons(*left)
    qR = euler.prim_to_cons(*right)

    def ic(x):
        x = np.asarray(x)
        return np.where((x < x0)[..., None], qL, qR)

    return Problem(name, a, b, t_final, "dirichlet_ghost", ic, riemann_data=(qL, qR, x0))


def modified_sod():
    return riemann_problem("modified_sod", (1.0, 0.75, 1.0), (0.125, 0.0, 0.1), 0.3, 0.0, 1.0, 0.2)


def modified_sod_near_vacuum():
    return riemann_problem(
        "modified_sod_near_vacuum", (1.0, 0.75, 1.0), (0.0125, 0.0, 0.01), 0.3, 0.0, 1.0, 0.2
    )


def shu_osher():
    def ic(x):
        x = np.asarray(x)
        rho = np.where(x < -4.0, 3.857143, 1.0 + 0.2 * np.sin(5.0 * x))
        u = np.where(x < -4.0, 2.629369, 0.0)
        p = np.where(x < -4.0, 10.3333, 1.0)
        return euler.prim_to_cons(rho, u, p)

    return Problem("shu_osher", -5.0, 5.0, 1.8, "dirichlet_ghost", ic)


def smooth_residual_field():
    """Static smooth field used by the entropy-residual convergence study."""

    def ic(x):
        rho = 1.0 + 0.5 * np.sin(0.1 + np.pi * x)
        u = 0.5 * np.sin(0.2 + np.pi * x)
        return euler.prim_to_cons(rho, u, rho**euler.GAMMA)

    return Problem("smooth_residual_field", -1.0, 1.0, 0.0, "periodic", ic)


PROBLEMS = {
    "density_wave": density_wave,
    "modified_sod": modified_sod,
    "modified_sod_near_vacuum": modified_sod_near_vacuum,
    "shu_osher": shu_osher,
}

# reference setup for Shu-Osher profile comparisons: a heavily refined run of
# the same entropy-corrected scheme (self-convergence reference)
SHU_OSHER_REFERENCE = dict(
    disc_variant="nodal", disc_N=3, disc_K=3200,
    scheme="weak_form", viscosity_mode="elementwise",
    time_integrator="fixed_cfl", time_cfl=0.05,
)


@dataclass
class Semidiscretization:
    """A spatial operator with its flux, trace, viscosity, and boundary choices.

    ``last_viscosity`` holds the ViscosityData of the most recent weak-form
    RHS evaluation (for snapshots and histories).
    """

    disc: dg.Discretization
    bc: dg.BoundaryData
    scheme: str = "weak_form"
    flux_kind: str = "llf_davis"
    volume_flux: str = "ec_ranocha"
    trace_mode: str = "entropy_projection"
    viscosity_mode: str = "elementwise"
    delta_tol: float = viscosity.DELTA_TOL_DEFAULT
    last_viscosity: viscosity.ViscosityData | None = field(default=None, repr=False)
    _fd_op: fluxdiff.FluxDiffOperator | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.viscosity_mode not in viscosity.VISCOSITY_MODES:
            raise ValueError(f"unknown viscosity mode {self.viscosity_mode!r}")
        if self.scheme == "flux_diff":
            if self.viscosity_mode != "none":
                raise ValueError("flux_diff does not combine with artificial viscosity")
            self._fd_op = fluxdiff.FluxDiffOperator(self.disc, self.volume_flux)

    def rhs(self, u, t=0.0):
        if self.scheme == "flux_diff":
            return self._fd_op.rhs(u, self.flux_kind, self.bc, time=t)
        proj = dg.compute_entropy_projection(self.disc, u)
        conv = dg.dg_rhs_weak(
            self.disc, u, self.flux_kind, self.bc, self.trace_mode, proj=proj, time=t
        )
        if self.viscosity_mode == "none":
            return conv
        g, data = viscosity.viscous_rhs(
            self.disc, u, proj, self.viscosity_mode, self.bc, self.delta_tol
        )
        self.last_viscosity = data
        if g is None:
            return conv
        return conv + g

    def viscosity_nodal(self, u):
        """Per-node viscosity coefficient at state u (zeros when mode is none)."""
        if self.scheme == "flux_diff" or self.viscosity_mode == "none":
            return np.zeros((self.disc.mesh.K, self.disc.ops.n_nodes))
        proj = dg.compute_entropy_projection(self.disc, u)
        _, data = viscosity.viscous_rhs(
            self.disc, u, proj, self.viscosity_mode, self.bc, self.delta_tol
        )
        return data.eps_node

    def entropy_rate(self, u, rhs_value):
        return dg.entropy_rate(
            self.disc, u, rhs_value, self.flux_kind, self.bc, self.trace_mode
        )

    def max_wavespeed(self, u):
        rho, vel, p = euler.cons_to_prim(u)
        return float(np.max(np.abs(vel) + np.sqrt(euler.GAMMA * p / rho)))


def resolve_trace_mode(requested, scheme, viscosity_mode):
    """'auto' means entropy-projected traces for entropy-corrected or
    flux-differencing runs and direct traces for the plain DG baseline."""
    if requested != "auto":
        return requested
    if scheme == "flux_diff" or viscosity_mode != "none":
        return "entropy_projection"
    return "direct"


def build_discretization(variant, N, K, problem, volume_points=None):
    m = mesh.make_mesh(problem.a, problem.b, K, problem.bc_mode)
    if variant == "nodal":
        return dg.nodal_discretization(m, N)
    if variant == "modal":
        return dg.modal_discretization(m, N, volume_points)
    raise ValueError(f"unknown discretization variant {variant!r}")


def build_boundary(problem):
    if problem.bc_mode == "periodic":
        return dg.periodic_bc()
    qa = problem.ic(np.array([problem.a]))[0]
    qb = problem.ic(np.array([problem.b]))[0]
    return dg.ghost_bc(qa, qb)


def initialize(disc, problem, init_mode="projection"):
    if init_mode == "projection":
        return dg.project_initial(disc, problem.ic)
    if init_mode == "interpolation":
        return dg.interpolate_initial(disc, problem.ic)
    raise ValueError(f"unknown init mode {init_mode!r}")
