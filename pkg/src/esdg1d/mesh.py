"""Uniform 1D mesh with affine reference-to-physical maps."""

from dataclasses import dataclass

import numpy as np

BC_MODES = ("periodic", "dirichlet_ghost")


@dataclass(frozen=True)
class Mesh1D:
    """K equal elements on [a, b]; J = h/2 is the affine map Jacobian."""

    a: float
    b: float
    K: int
    bc: str

    @property
    def h(self):
        return (self.b - self.a) / self.K

    @property
    def jacobian(self):
        return 0.5 * self.h

    @property
    def element_lefts(self):
        return self.a + self.h * np.arange(self.K)

    def left_neighbor(self, k):
        if k > 0:
            return k - 1
        return self.K - 1 if self.bc == "periodic" else None

    def right_neighbor(self, k):
        if k < self.K - 1:
            return k + 1
        return 0 if self.bc == "periodic" else None

    def nodes(self, r):
        """Physical coordinates of reference nodes r on every element, (K, len(r))."""
        return self.element_lefts[:, None] + 0.5 * (np.asarray(r) + 1.0) * self.h


def make_mesh(a, b, K, bc="periodic"):
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if K < 1:
        raise ValueError(f"need at least one element, got K = {K}")
    if bc not in BC_MODES:
        raise ValueError(f"unknown boundary mode {bc!r}, expected one of {BC_MODES}")
    return Mesh1D(float(a), float(b), int(K), bc)
