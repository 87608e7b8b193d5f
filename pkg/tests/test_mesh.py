import numpy as np
import pytest

from esdg1d import basis, mesh


class TestMesh:
    def test_periodic_wraparound(self):
        m = mesh.make_mesh(0.0, 1.0, 4, "periodic")
        assert m.h == 0.25
        assert m.left_neighbor(0) == 3
        assert m.right_neighbor(3) == 0
        assert m.left_neighbor(2) == 1

    def test_single_element_self_neighbor(self):
        m = mesh.make_mesh(0.0, 1.0, 1, "periodic")
        assert m.left_neighbor(0) == 0
        assert m.right_neighbor(0) == 0

    def test_ghost_boundaries_have_no_neighbor(self):
        m = mesh.make_mesh(-5.0, 5.0, 50, "dirichlet_ghost")
        assert m.h == 0.2
        assert m.left_neighbor(0) is None
        assert m.right_neighbor(49) is None
        assert m.left_neighbor(1) == 0

    def test_widths_sum_to_domain(self):
        m = mesh.make_mesh(-1.3, 2.2, 17, "periodic")
        assert abs(m.h * m.K - (m.b - m.a)) < 1e-14

    def test_nodes_monotone(self):
        m = mesh.make_mesh(0.0, 2.0, 9, "periodic")
        r = basis.gauss_lobatto(5).points
        x = m.nodes(r).ravel()
        assert np.all(np.diff(x) >= -1e-14)
        assert abs(x[0] - 0.0) < 1e-14 and abs(x[-1] - 2.0) < 1e-14

    def test_jacobian_positive(self):
        m = mesh.make_mesh(0.0, 1.0, 3, "periodic")
        assert m.jacobian > 0

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            mesh.make_mesh(1.0, 0.0, 4, "periodic")
        with pytest.raises(ValueError):
            mesh.make_mesh(0.0, 1.0, 0, "periodic")
        with pytest.raises(ValueError):
            mesh.make_mesh(0.0, 1.0, 4, "reflecting")
