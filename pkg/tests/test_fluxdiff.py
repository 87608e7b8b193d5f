import numpy as np
import pytest

from esdg1d import dg, euler, fluxdiff, mesh
from tests.test_dg import density_wave_ic, make_disc


def nodal_disc(N=3, K=8):
    return dg.nodal_discretization(mesh.make_mesh(0.0, 1.0, K, "periodic"), N)


class TestFluxDiffRhs:
    def test_requires_nodal_variant(self):
        disc = make_disc("modal")
        with pytest.raises(NotImplementedError):
            fluxdiff.FluxDiffOperator(disc)

    def test_unknown_volume_flux(self):
        with pytest.raises(ValueError):
            fluxdiff.FluxDiffOperator(nodal_disc(), "roe")

    def test_free_stream(self):
        disc = nodal_disc()
        q = euler.prim_to_cons(1.0, 0.3, 2.0)
        u = np.tile(q, (disc.mesh.K, disc.ops.n_nodes, 1))
        r = fluxdiff.flux_diff_rhs(disc, u, "llf_davis", dg.periodic_bc())
        assert np.max(np.abs(r)) < 1e-12 * max(1.0, np.max(np.abs(euler.flux(q))))

    def test_conservation(self):
        disc = nodal_disc()
        u = dg.project_initial(disc, density_wave_ic(0.5))
        r = fluxdiff.flux_diff_rhs(disc, u, "llf_davis", dg.periodic_bc())
        assert abs(np.sum(dg.elementwise_inner(disc, r, np.ones_like(r)))) < 1e-12

    @pytest.mark.parametrize("amplitude", (0.5, 0.98))
    def test_ec_volume_and_interface_conserves_entropy(self, amplitude):
        disc = nodal_disc()
        u = dg.project_initial(disc, density_wave_ic(amplitude))
        op = fluxdiff.FluxDiffOperator(disc, "ec_ranocha")
        r = op.rhs(u, "ec_ranocha", dg.periodic_bc())
        assert abs(dg.entropy_rhs_test(disc, u, r)) < 1e-10

    def test_ec_volume_with_llf_interface_dissipates(self):
        disc = nodal_disc()
        u = dg.project_initial(disc, density_wave_ic(0.98))
        op = fluxdiff.FluxDiffOperator(disc, "ec_ranocha")
        r = op.rhs(u, "llf_davis", dg.periodic_bc())
        assert dg.entropy_rhs_test(disc, u, r) <= 1e-12

    def test_central_volume_flux_recovers_weak_form(self):
        # central two-point volume flux + direct traces == standard weak form
        disc = nodal_disc()
        u = dg.project_initial(disc, density_wave_ic(0.5))
        r_fd = fluxdiff.flux_diff_rhs(disc, u, "llf_davis", dg.periodic_bc(), volume_flux="central")
        r_weak = dg.dg_rhs_weak(disc, u, "llf_davis", dg.periodic_bc(), trace_mode="direct")
        scale = max(1.0, np.max(np.abs(r_weak)))
        assert np.max(np.abs(r_fd - r_weak)) < 1e-12 * scale

    def test_inadmissible_raises_with_time(self):
        disc = nodal_disc()
        u = dg.project_initial(disc, density_wave_ic(0.5))
        u[0, 0, 0] = -1.0
        with pytest.raises(euler.AdmissibilityError) as err:
            fluxdiff.flux_diff_rhs(disc, u, "llf_davis", dg.periodic_bc(), time=0.7)
        assert err.value.time == 0.7

    def test_sbp_pair_tables_cover_matrix(self):
        # accumulation tables reproduce the direct two-point contraction
        disc = nodal_disc(N=2, K=3)
        op = fluxdiff.FluxDiffOperator(disc)
        u = dg.project_initial(disc, density_wave_ic(0.3))
        from esdg1d import fluxes

        nq = disc.ops.n_nodes
        direct = np.zeros_like(u)
        for i in range(nq):
            for j in range(nq):
                F = fluxes.ec_volume_flux(u[:, i, :], u[:, j, :])
                direct[:, i, :] += 2.0 * disc.ops.Q[i, j] * F
        via_tables = np.einsum("ip,kpc->kic", op.acc, fluxes.ec_volume_flux(u[:, op.iu, :], u[:, op.ju, :]))
        via_tables += op.diag[None, :, None] * euler.flux(u)
        assert np.max(np.abs(direct - via_tables)) < 1e-13 * max(1.0, np.max(np.abs(direct)))
