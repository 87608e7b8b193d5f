"""Legendre quadrature rules and dense reference-element operators.

All solution fields are stored as values at the volume quadrature nodes of a
reference element [-1, 1]. The operator set below is built once per
discretization and shared (read-only) by every element:

    r, w    quadrature nodes / weights, nq of each
    V, Vr   orthonormal-Legendre Vandermonde and its derivative, (nq, N+1)
    Vf      basis values at the faces r = -1, +1, (2, N+1)
    M       mass matrix of the variant's coefficient basis, (N+1, N+1)
    P       values -> modal coefficients (quadrature L2 projection), (N+1, nq)
    Pi      L2 projection in value space, Pi = V @ P, (nq, nq)
    Dr      differentiation in value space (d/dr), (nq, nq)
    WDr     weak differentiation, V M^-1 Vr^T diag(w), (nq, nq)
    LIFT    face-term lift V M^-1 Vf^T, (nq, 2)
    Vfq     face traces from values, Vf @ P, (2, nq)
    Q, B    SBP pair Q = diag(w) Dr, B = Q + Q^T (nodal variant only)

For the nodal (collocated Lobatto) variant Pi is the exact identity and Vfq
is exact endpoint extraction; both are stored that way so the collocation
identities hold bitwise.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Quadrature1D:
    """A quadrature rule on [-1, 1] exact for polynomials of degree <= exactness_degree."""

    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=float))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def n_points(self):
        return self.points.size


def legendre_values(x, n_max):
    """Values of Legendre polynomials P_0..P_n_max at x, shape (len(x), n_max+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.zeros((x.size, n_max + 1))
    p[:, 0] = 1.0
    if n_max >= 1:
        p[:, 1] = x
    for n in range(1, n_max):
        p[:, n + 1] = ((2 * n + 1) * x * p[:, n] - n * p[:, n - 1]) / (n + 1)
    return p


def legendre_derivatives(x, n_max):
    """Values of P_0'..P_n_max' at x, shape (len(x), n_max+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = legendre_values(x, n_max)
    dp = np.zeros_like(p)
    interior = np.abs(x) < 1.0
    for n in range(1, n_max + 1):
        # (1 - x^2) P_n' = n (P_{n-1} - x P_n); endpoints from P_n'(+-1)
        dp[interior, n] = (
            n * (p[interior, n - 1] - x[interior] * p[interior, n]) / (1.0 - x[interior] ** 2)
        )
        edge = ~interior
        dp[edge, n] = np.sign(x[edge]) ** (n - 1) * n * (n + 1) / 2.0
    return dp


def gauss_legendre(n_points):
    """Gauss-Legendre rule with n_points interior nodes, exact to degree 2n-1."""
    if n_points < 1:
        raise ValueError(f"gauss_legendre needs n_points >= 1, got {n_points}")
    x, w = np.polynomial.legendre.leggauss(n_points)
    return Quadrature1D(x, w, 2 * n_points - 1)


def gauss_lobatto(n_points):
    """Legendre-Gauss-Lobatto rule including both endpoints, exact to degree 2n-3.

    Nodes are the extrema of P_{n-1} plus the endpoints, found by Newton
    iteration from Chebyshev-Gauss-Lobatto initial guesses.
    """
    if n_points < 2:
        raise ValueError(f"gauss_lobatto needs n_points >= 2, got {n_points}")
    n = n_points
    if n == 2:
        x = np.array([-1.0, 1.0])
    else:
        x = -np.cos(np.pi * np.arange(n) / (n - 1))
        # interior nodes are roots of P_{n-1}'
        for _ in range(100):
            p = legendre_values(x[1:-1], n - 1)
            dp = legendre_derivatives(x[1:-1], n - 1)
            # q = P_{n-1}', q' from the Legendre ODE:
            # (1-x^2) P'' - 2x P' + m(m+1) P = 0 with m = n-1
            q = dp[:, n - 1]
            dq = (2 * x[1:-1] * q - (n - 1) * n * p[:, n - 1]) / (1.0 - x[1:-1] ** 2)
            dx = q / dq
            x[1:-1] -= dx
            if np.max(np.abs(dx)) < 1e-15:
                break
    pn = legendre_values(x, n - 1)[:, n - 1]
    w = 2.0 / (n * (n - 1) * pn**2)
    return Quadrature1D(x, w, 2 * n - 3)


def gauss_radau(n_points):
    """Left Gauss-Radau rule (node at x = -1), exact to degree 2n-2.

    Interior nodes are the roots of (P_{n-1} + P_n) / (1 + x).
    """
    if n_points < 1:
        raise ValueError(f"gauss_radau needs n_points >= 1, got {n_points}")
    n = n_points
    if n == 1:
        return Quadrature1D(np.array([-1.0]), np.array([2.0]), 0)
    coeff = np.zeros(n + 1)
    coeff[n - 1] = 1.0
    coeff[n] = 1.0
    roots = np.polynomial.legendre.Legendre(coeff).roots()
    interior = np.sort(roots[roots > -1.0 + 1e-10].real)
    # Newton polish on f = P_{n-1} + P_n
    for _ in range(50):
        p = legendre_values(interior, n)
        dp = legendre_derivatives(interior, n)
        f = p[:, n - 1] + p[:, n]
        df = dp[:, n - 1] + dp[:, n]
        dx = f / df
        interior -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x = np.concatenate(([-1.0], interior))
    pnm1 = legendre_values(x, n - 1)[:, n - 1]
    w = np.empty(n)
    w[0] = 2.0 / n**2
    w[1:] = (1.0 - x[1:]) / (n**2 * pnm1[1:] ** 2)
    return Quadrature1D(x, w, 2 * n - 2)


def _orthonormal_vandermonde(x, N):
    scale = np.sqrt(np.arange(N + 1) + 0.5)
    V = legendre_values(x, N) * scale
    Vr = legendre_derivatives(x, N) * scale
    return V, Vr


@dataclass(frozen=True)
class ElementOperators:
    """Dense operator set for one reference element; see module docstring."""

    N: int
    variant: str
    rule: Quadrature1D
    V: np.ndarray
    Vr: np.ndarray
    Vf: np.ndarray
    M: np.ndarray
    P: np.ndarray
    Pi: np.ndarray
    Dr: np.ndarray
    WDr: np.ndarray
    LIFT: np.ndarray
    Vfq: np.ndarray
    Q: np.ndarray | None = field(default=None)
    B: np.ndarray | None = field(default=None)

    @property
    def r(self):
        return self.rule.points

    @property
    def w(self):
        return self.rule.weights

    @property
    def n_nodes(self):
        return self.rule.n_points


VARIANTS = ("nodal_lobatto", "modal_gauss")


def build_operators(N, variant, volume_rule):
    """Assemble ElementOperators for degree N on the given volume rule.

    nodal_lobatto requires an (N+1)-point Lobatto rule (endpoints included);
    modal_gauss requires at least N+2 interior Gauss points.
    """
    if N < 1:
        raise ValueError(f"degree must be >= 1, got {N}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    nq = volume_rule.n_points
    if variant == "nodal_lobatto":
        if nq != N + 1 or abs(volume_rule.points[0] + 1.0) > 1e-12 or abs(volume_rule.points[-1] - 1.0) > 1e-12:
            raise ValueError(
                f"nodal_lobatto at degree {N} needs the (N+1)-point Lobatto rule, "
                f"got {nq} points on [{volume_rule.points[0]}, {volume_rule.points[-1]}]"
            )
    else:
        if nq < N + 2:
            raise ValueError(f"modal_gauss at degree {N} needs >= {N + 2} points, got {nq}")
        if np.max(np.abs(volume_rule.points)) >= 1.0:
            raise ValueError("modal_gauss requires a rule with strictly interior points")
    return _operators_from_rule(N, variant, volume_rule)


def _operators_from_rule(N, variant, rule):
    """Operator assembly without the public precondition checks.

    Used directly by the entropy-residual quadrature study, which deliberately
    runs degree N on reduced-exactness rules.
    """
    x, w = rule.points, rule.weights
    V, Vr = _orthonormal_vandermonde(x, N)
    Vf, _ = _orthonormal_vandermonde(np.array([-1.0, 1.0]), N)
    W = np.diag(w)
    Mmod = V.T @ W @ V
    P = np.linalg.solve(Mmod, V.T @ W)
    Dr = Vr @ P
    # force annihilation of constants down to roundoff (row sums to ~0)
    for _ in range(3):
        resid = Dr.sum(axis=1, keepdims=True)
        if not resid.any():
            break
        Dr = Dr - resid / Dr.shape[1]
    WDr = V @ np.linalg.solve(Mmod, Vr.T @ W)
    LIFT = V @ np.linalg.solve(Mmod, Vf.T)
    nq = rule.n_points

    if variant == "nodal_lobatto":
        # collocation: projection is the identity and face traces are endpoint
        # values; store these identities exactly
        Pi = np.eye(nq)
        Vfq = np.zeros((2, nq))
        Vfq[0, 0] = 1.0
        Vfq[1, -1] = 1.0
        M = np.diag(w)
        Q = M @ Dr
        B = np.zeros((nq, nq))
        B[0, 0] = -1.0
        B[-1, -1] = 1.0
        # symmetrize so the SBP identity Q + Q^T = B holds bitwise
        Q = 0.5 * (Q - Q.T) + 0.5 * B
        return ElementOperators(N, variant, rule, V, Vr, Vf, M, P, Pi, Dr, WDr, LIFT, Vfq, Q, B)

    Pi = V @ P
    Vfq = Vf @ P
    return ElementOperators(N, variant, rule, V, Vr, Vf, Mmod, P, Pi, Dr, WDr, LIFT, Vfq)


def nodal_operators(N):
    """Convenience: DGSEM operators collocated on (N+1) Lobatto points."""
    return build_operators(N, "nodal_lobatto", gauss_lobatto(N + 1))


def modal_operators(N, n_points=None):
    """Convenience: modal operators on an (N+2)-point Gauss rule by default."""
    if n_points is None:
        n_points = N + 2
    return build_operators(N, "modal_gauss", gauss_legendre(n_points))
