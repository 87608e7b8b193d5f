"""End-to-end acceptance suite.

Each test prints one [PASS]/[FAIL] line per criterion (pytest -s shows them
live). Runs use the same entry points as the CLI. Full suite takes roughly
twenty minutes on one core; individual criteria note their cost.
"""

import numpy as np
import pytest

from esdg1d import cli, dg, diagnostics, driver, euler, fluxdiff, mesh, timestep, viscosity
from esdg1d.errors import IntegrationFailure


def report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def build(problem_kind, variant, N, K, scheme="weak_form", flux="llf_davis",
          vm="elementwise", trace="auto", amplitude=0.98, volume_flux="ec_ranocha"):
    cfg = cli.validate_config(cli.RunConfig(
        problem_kind=problem_kind, problem_amplitude=amplitude,
        disc_variant=variant, disc_N=N, disc_K=K, scheme=scheme,
        flux_kind=flux, flux_volume=volume_flux, viscosity_mode=vm, trace_mode=trace))
    return cli.build_semidiscretization(cfg)


def evolve(semi, problem, T, abs_tol=1e-8, rel_tol=1e-6, stage_callback=None, max_steps=10**6):
    u = driver.initialize(semi.disc, problem, "projection")
    ctrl = timestep.TimeController(abs_tol=abs_tol, rel_tol=rel_tol, dt_max=T)
    u, t = timestep.integrate_adaptive(
        semi.rhs, u, 0.0, T, ctrl, admissible=euler.is_admissible,
        stage_callback=stage_callback, max_steps=max_steps)
    return u, t, ctrl


class TestC01EntropyInequality:
    """Semi-discrete entropy rate <= 1e-10 * scale at every RK stage, and the
    total entropy series non-increasing within time-integration tolerance,
    for AV runs of the hard problems (nodal/modal, N in {3, 7})."""

    CASES = [
        ("density_wave", 4, 2.5),
        ("modified_sod", 50, 0.2),
        ("shu_osher", 50, 1.8),
    ]

    @pytest.mark.parametrize("problem_kind,K,T", CASES)
    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    @pytest.mark.parametrize("N", (3, 7))
    def test_entropy_inequality(self, problem_kind, K, T, variant, N):
        problem, semi = build(problem_kind, variant, N, K)
        worst_ratio = -np.inf
        entropy_series = []

        def on_stage(t, u_stage, rhs_stage):
            nonlocal worst_ratio
            rate, scale = semi.entropy_rate(u_stage, rhs_stage)
            worst_ratio = max(worst_ratio, rate / max(scale, 1e-300))

        def on_step(t, u_step):
            entropy_series.append(dg.total_entropy(semi.disc, u_step))

        u = driver.initialize(semi.disc, problem, "projection")
        entropy_series.append(dg.total_entropy(semi.disc, u))
        ctrl = timestep.TimeController(abs_tol=1e-8, rel_tol=1e-6, dt_max=T)
        u, t = timestep.integrate_adaptive(
            semi.rhs, u, 0.0, T, ctrl, admissible=euler.is_admissible,
            stage_callback=on_stage, step_callback=on_step)

        S = np.asarray(entropy_series)
        slack = 10.0 * (1e-8 + 1e-6 * np.max(np.abs(S)))
        hist = diagnostics.entropy_history_report(S, slack)
        name = f"C1 entropy inequality [{problem_kind} {variant} N={N} K={K}]"
        ok = worst_ratio <= 1e-10 and hist.monotone
        report(name, ok,
               f"max stage rate/scale = {worst_ratio:.2e} (bar 1e-10), "
               f"max entropy increase = {hist.max_increase:.2e} (slack {slack:.1e}), "
               f"steps = {ctrl.n_accepted}")


class TestC02EcBaselineConservation:
    """Flux differencing with EC volume + EC interface flux conserves total
    entropy: semi-discretely to 1e-10 and over a density-wave run to 1e-8."""

    def test_semi_discrete_conservation(self):
        worst = 0.0
        for A in (0.5, 0.98):
            problem, semi = build("density_wave", "nodal", 3, 8, scheme="flux_diff",
                                  flux="ec_ranocha", vm="none", amplitude=A)
            u = driver.initialize(semi.disc, problem, "projection")
            worst = max(worst, abs(dg.entropy_rhs_test(semi.disc, u, semi.rhs(u))))
        report("C2 EC baseline (semi-discrete)", worst < 1e-10,
               f"|dS/dt| = {worst:.2e} (bar 1e-10)")

    def test_entropy_constant_over_run(self):
        problem, semi = build("density_wave", "nodal", 3, 8, scheme="flux_diff",
                              flux="ec_ranocha", vm="none", amplitude=0.5)
        u = driver.initialize(semi.disc, problem, "projection")
        S0 = dg.total_entropy(semi.disc, u)
        u, t, n = timestep.integrate_fixed_cfl(
            semi.rhs, u, 0.0, 5.0, 0.05, semi.disc.mesh.h, semi.max_wavespeed)
        drift = abs(dg.total_entropy(semi.disc, u) - S0)
        report("C2 EC baseline (run)", drift < 1e-8,
               f"|S(T) - S(0)| = {drift:.2e} over T=5, {n} steps (bar 1e-8)")


class TestC03Superconvergence:
    """Entropy-residual slopes: >= 2N+2.5 with high-exactness quadrature;
    reduced-exactness quadrature drops the slope by about one order."""

    LADDERS = {1: (8, 16, 32, 64), 2: (8, 16, 32, 48), 3: (6, 8, 12, 16, 24)}

    @pytest.mark.parametrize("N", (1, 2, 3))
    def test_residual_slopes(self, N):
        Ks = self.LADDERS[N]
        hi = diagnostics.residual_convergence_study(N, Ks, quadrature="high")
        lo = diagnostics.residual_convergence_study(N, Ks, quadrature="default")
        s_hi = hi.ls_slope("max_delta")
        s_lo = lo.ls_slope("max_delta")
        drop = s_hi - s_lo
        ok = s_hi >= 2 * N + 2.5 and 0.5 <= drop <= 1.5
        report(f"C3 superconvergence [N={N}]", ok,
               f"slope(high) = {s_hi:.2f} (bar {2*N + 2.5}, target {2*N + 3}), "
               f"slope(default) = {s_lo:.2f}, drop = {drop:.2f} (bar 1 +- 0.5)")

    def test_viscosity_coefficient_slope(self):
        tab = diagnostics.residual_convergence_study(3, (6, 8, 12, 16, 24), quadrature="high")
        slope = tab.ls_slope("max_eps")
        report("C3 viscosity-coefficient slope [N=3]", slope >= 3 + 2.0,
               f"slope = {slope:.2f} (bar N+2 = 5)")


class TestC04ViscosityVanishing:
    """eps = 0 at machine precision for constants; bitwise-identical RHS to
    plain weak-form DG whenever no element violates the entropy identity."""

    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    def test_constant_state(self, variant):
        problem, semi = build("density_wave", variant, 3, 8)
        q = euler.prim_to_cons(1.3, 0.4, 2.0)
        u = np.tile(q, (8, semi.disc.ops.n_nodes, 1))
        eps = semi.viscosity_nodal(u)
        report(f"C4 constant state [{variant}]", np.max(np.abs(eps)) < 1e-20,
               f"max eps = {np.max(np.abs(eps)):.2e} (bar 1e-20)")

    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    def test_bitwise_equality_when_identity_holds(self, variant):
        # construct an admissible field with delta_k > 0 on every element by
        # flipping the sign of a per-element smooth perturbation
        rng = np.random.default_rng(42)
        problem, semi = build("density_wave", variant, 3, 8)
        disc, bc = semi.disc, semi.bc
        nq = disc.ops.n_nodes
        base = euler.prim_to_cons(
            rng.uniform(0.8, 1.2, 8), rng.uniform(-0.2, 0.2, 8), rng.uniform(0.9, 1.4, 8))
        u0 = np.repeat(base[:, None, :], nq, axis=1)
        bump = np.stack([
            np.sin(np.pi * (disc.ops.r + 1.0)),
            0.3 * np.cos(0.5 * np.pi * disc.ops.r),
            0.2 * np.sin(0.7 * np.pi * disc.ops.r)], axis=-1)
        bump = np.einsum("qp,pc->qc", disc.ops.Pi, bump)
        t, sign = 1e-3, np.ones((8, 1, 1))
        for _ in range(60):
            u = u0 + t * sign * bump[None]
            proj = dg.compute_entropy_projection(disc, u)
            delta = viscosity.volume_entropy_residual(disc, u, proj)
            if np.all(delta > 0):
                break
            sign[delta <= 0] *= -1.0
            t *= 0.75
        assert np.all(delta > 0), "field construction failed"
        eps = semi.viscosity_nodal(u)
        r_av = semi.rhs(u)
        r_dg = dg.dg_rhs_weak(disc, u, semi.flux_kind, bc, semi.trace_mode)
        ok = (not np.any(eps)) and r_av.tobytes() == r_dg.tobytes()
        report(f"C4 bitwise equality [{variant}]", ok,
               f"min delta = {delta.min():.2e} > 0, eps identically 0 = {not np.any(eps)}, "
               f"RHS bitwise equal = {r_av.tobytes() == r_dg.tobytes()}")


class TestC05SubcellOptimality:
    """Constraint activity and norm minimality of the subcell coefficient on
    random admissible fields; reduction to the elementwise value when the
    dissipation density is constant."""

    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    def test_optimality(self, variant):
        rng = np.random.default_rng(7)
        problem, semi = build("density_wave", variant, 3, 8, vm="subcell")
        disc, bc = semi.disc, semi.bc
        worst_act = worst_norm = 0.0
        for trial in range(5):
            phase = rng.uniform(0, 2 * np.pi, 3)
            amp = rng.uniform(0.2, 0.45, 3)

            def field(x):
                return euler.prim_to_cons(
                    1.0 + amp[0] * np.sin(2 * np.pi * x + phase[0]),
                    amp[1] * np.sin(2 * np.pi * x + phase[1]),
                    1.0 + amp[2] * np.cos(2 * np.pi * x + phase[2]))

            u = dg.project_initial(disc, field)
            proj = dg.compute_entropy_projection(disc, u)
            kmats = viscosity.element_kmatrices(disc, u)
            delta = viscosity.volume_entropy_residual(disc, u, proj)
            theta = viscosity.br1_gradient(disc, proj, bc)
            a = viscosity.dissipation_density(theta, kmats)
            eps = viscosity.viscosity_subcell(delta, a, disc)
            b = np.maximum(0.0, -delta)
            scale = max(1.0, np.max(np.abs(delta)))
            worst_act = max(worst_act, np.max(np.abs(dg.elementwise_inner(disc, a, eps) - b)) / scale)
            norm_eps = np.sqrt(dg.elementwise_inner(disc, eps, eps))
            norm_a = np.sqrt(dg.elementwise_inner(disc, a, a))
            worst_norm = max(worst_norm, np.max(np.abs(norm_eps - b / norm_a)) / scale)
            assert np.all(eps >= 0.0)
        ok = worst_act < 1e-11 and worst_norm < 1e-11
        report(f"C5 subcell optimality [{variant}]", ok,
               f"constraint activity {worst_act:.2e}, norm minimality {worst_norm:.2e} (bars 1e-11)")

    def test_reduces_to_elementwise_for_constant_density(self):
        problem, semi = build("density_wave", "nodal", 3, 8)
        disc = semi.disc
        rng = np.random.default_rng(11)
        delta = -rng.uniform(0.1, 1.0, 8)
        a = np.repeat(rng.uniform(0.5, 2.0, 8)[:, None], disc.ops.n_nodes, axis=1)
        eps_sub = viscosity.viscosity_subcell(delta, a, disc)
        eps_el = viscosity.viscosity_elementwise(delta, a, disc)
        gap = np.max(np.abs(eps_sub - eps_el[:, None])) / np.max(eps_el)
        report("C5 constant-density reduction", gap < 1e-11, f"relative gap {gap:.2e} (bar 1e-11)")


class TestC06ConvergenceRates:
    """Density wave, AV enabled, contact-preserving interface flux:
    least-squares L2 slopes >= N + 0.75 for N = 1..4."""

    LADDERS = {1: (8, 16, 32, 64), 2: (8, 16, 32, 64), 3: (4, 8, 16, 32), 4: (4, 8, 16)}

    @pytest.mark.parametrize("N", (1, 2, 3, 4))
    def test_rates(self, N):
        errs = []
        for K in self.LADDERS[N]:
            problem, semi = build("density_wave", "nodal", N, K, flux="hllc", amplitude=0.5)
            u, t, _ = evolve(semi, problem, 2.0, abs_tol=1e-11, rel_tol=1e-10)
            errs.append(diagnostics.l2_error(semi.disc, u, problem.exact, t))
        h = 1.0 / np.asarray(self.LADDERS[N], float)
        slope = np.polyfit(np.log(h[-3:]), np.log(np.asarray(errs[-3:])), 1)[0]
        report(f"C6 convergence rate [N={N}]", slope >= N + 0.75,
               f"LS slope (finest 3) = {slope:.2f} (bar {N + 0.75}); errors "
               + " ".join(f"{e:.2e}" for e in errs))


class TestC07ErrorOrdering:
    """At N=7, K=4, T=25: error(AV) <= 3 error(DG) and error(EC) >= 3 error(AV)
    for A=0.5; error(AV) < error(EC) for A=0.98."""

    def _final_error(self, amplitude, scheme, vm, trace):
        problem, semi = build("density_wave", "nodal", 7, 4, scheme=scheme,
                              vm=vm, trace=trace, amplitude=amplitude)
        u, t, _ = evolve(semi, problem, 25.0)
        return diagnostics.l2_error(semi.disc, u, problem.exact, t)

    def test_moderate_amplitude(self):
        e_dg = self._final_error(0.5, "weak_form", "none", "direct")
        e_av = self._final_error(0.5, "weak_form", "elementwise", "auto")
        e_ec = self._final_error(0.5, "flux_diff", "none", "auto")
        ok = e_av <= 3.0 * e_dg and e_ec >= 3.0 * e_av
        report("C7 error ordering [A=0.5]", ok,
               f"DG {e_dg:.3e}, AV {e_av:.3e} (AV/DG {e_av/e_dg:.2f}, bar 3), "
               f"EC {e_ec:.3e} (EC/AV {e_ec/e_av:.1f}, bar 3)")

    def test_large_amplitude(self):
        e_av = self._final_error(0.98, "weak_form", "elementwise", "auto")
        e_ec = self._final_error(0.98, "flux_diff", "none", "auto")
        report("C7 error ordering [A=0.98]", e_av < e_ec,
               f"AV {e_av:.3e} < EC {e_ec:.3e}")


class TestC08SodCorrectness:
    """AV converges in L1 to the exact Riemann solution on modified Sod
    (contact-preserving flux; global LS rate >= 0.7, errors monotone), and
    the near-vacuum variant separates AV (completes, positive) from flux
    differencing (admissibility failure before T = 0.2)."""

    def test_l1_convergence(self):
        errs = []
        Ks = (40, 80, 160, 320)
        for K in Ks:
            problem, semi = build("modified_sod", "nodal", 3, K, flux="hllc")
            u, t, _ = evolve(semi, problem, 0.2)
            qL, qR, x0 = problem.riemann_data
            ref = diagnostics.riemann_reference(semi.disc, qL, qR, x0, t)
            errs.append(diagnostics.l1_error(semi.disc, u, ref))
        errs = np.asarray(errs)
        h = 1.0 / np.asarray(Ks, float)
        slope = np.polyfit(np.log(h), np.log(errs), 1)[0]
        monotone = bool(np.all(np.diff(errs) < 0))
        ok = monotone and slope >= 0.7
        report("C8 Sod L1 convergence", ok,
               f"errors {' '.join(f'{e:.3e}' for e in errs)}, monotone={monotone}, "
               f"global LS rate = {slope:.3f} (bar 0.7)")

    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    def test_near_vacuum_av_completes(self, variant):
        problem, semi = build("modified_sod_near_vacuum", variant, 3, 50)
        u, t, ctrl = evolve(semi, problem, 0.2)
        rho, _, p = euler.cons_to_prim(u)
        ok = t == pytest.approx(0.2) and rho.min() > 0 and p.min() > 0
        report(f"C8 near-vacuum AV completes [{variant}]", ok,
               f"t = {t:.3f}, min rho = {rho.min():.3e}, min p = {p.min():.3e}, "
               f"steps = {ctrl.n_accepted}")

    def test_near_vacuum_flux_diff_crashes(self):
        problem, semi = build("modified_sod_near_vacuum", "nodal", 3, 50,
                              scheme="flux_diff", vm="none")
        try:
            _, t, _ = evolve(semi, problem, 0.2, max_steps=20000)
            report("C8 near-vacuum flux-diff crashes", False, f"unexpectedly completed to t = {t}")
        except IntegrationFailure as exc:
            ok = exc.origin == "admissibility" and exc.time_reached < 0.2
            report("C8 near-vacuum flux-diff crashes", ok,
                   f"origin = {exc.origin}, t_reached = {exc.time_reached:.4f} < 0.2")


class TestC09SpectraOrdering:
    """Linearized spectra of the A=0.98 background evolved to T=2.0:
    max Re(AV) < max Re(EC) at all six resolutions (the acceptance bar);
    EC magnitudes within a factor of 3 of the reference values at >= 5 of 6
    and within a factor of 10 at all (the reference values themselves are
    snapshot-phase sensitive; see the history note in the repo docs)."""

    REFERENCE_EC = {(3, 8): 0.1349, (3, 16): 0.2560, (3, 32): 0.3883,
                    (7, 4): 0.0634, (7, 8): 0.1163, (7, 16): 0.1971}

    def _max_re(self, N, K, scheme, vm):
        problem, semi = build("density_wave", "nodal", N, K, scheme=scheme, vm=vm)
        u, _, _ = evolve(semi, problem, 2.0)
        return diagnostics.linearized_spectrum(semi.rhs, u).max_real

    def test_ordering_and_magnitudes(self):
        rows = []
        for (N, K), ref in self.REFERENCE_EC.items():
            ec = self._max_re(N, K, "flux_diff", "none")
            av = self._max_re(N, K, "weak_form", "elementwise")
            rows.append((N, K, ec, av, ref))
        ordering = all(av < ec for _, _, ec, av, _ in rows)
        in3 = sum(ref / 3 <= ec <= 3 * ref for _, _, ec, _, ref in rows)
        in10 = all(ref / 10 <= ec <= 10 * ref for _, _, ec, _, ref in rows)
        detail = "; ".join(
            f"N{N}K{K}: EC {ec:.3e} (ref {ref}), AV {av:.3e}" for N, K, ec, av, ref in rows)
        ok = ordering and in3 >= 5 and in10
        report("C9 spectra ordering", ok,
               f"AV<EC at all six = {ordering}, within x3 of reference at {in3}/6, "
               f"within x10 at all = {in10} | {detail}")


class TestC10LocalCorrectionParity:
    """At N=1 the mean-value and derivative corrections coincide (to 1e-11
    after coefficient absorption) and both cancel the per-element violation."""

    @pytest.mark.parametrize("variant", ("nodal", "modal"))
    def test_parity_and_dissipation(self, variant):
        worst_gap = worst_resid = 0.0
        for K in (2, 3, 4):
            cfg = cli.validate_config(cli.RunConfig(
                problem_kind="density_wave", disc_variant=variant, disc_N=1, disc_K=K,
                viscosity_mode="mv_correction"))
            problem, semi = cli.build_semidiscretization(cfg)
            disc = semi.disc

            def field(x):
                return euler.prim_to_cons(
                    1.0 + 0.4 * np.sin(2 * np.pi * x + 0.2),
                    1.5 * np.sin(2 * np.pi * x + 1.0),
                    2.0 + 0.5 * np.cos(2 * np.pi * x + 0.5))

            u = dg.project_initial(disc, field)
            proj = dg.compute_entropy_projection(disc, u)
            kmats = viscosity.element_kmatrices(disc, u)
            delta = viscosity.volume_entropy_residual(disc, u, proj)
            g1, _ = viscosity.local_correction_mv(disc, u, proj, delta, kmats)
            g2, _ = viscosity.local_correction_deriv(disc, u, proj, delta, kmats)
            worst_gap = max(worst_gap, np.max(np.abs(g1 - g2)) / max(1.0, np.max(np.abs(g1))))
            for g in (g1, g2):
                resid = delta - dg.elementwise_inner(disc, g, proj.v_vol)
                worst_resid = max(worst_resid, -resid.min() / max(1.0, np.max(np.abs(delta))))
        ok = worst_gap < 1e-11 and worst_resid < 1e-12
        report(f"C10 N=1 correction parity [{variant}]", ok,
               f"max relative gap = {worst_gap:.2e} (bar 1e-11), "
               f"worst residual = {worst_resid:.2e} (bar 1e-12)")


class TestC11GradientNullspace:
    """For N=2 on an even periodic mesh the assembled BR-1 gradient has a
    non-constant null mode annihilated by the operator to 1e-10."""

    def test_probe(self):
        m = mesh.make_mesh(0.0, 1.0, 8, "periodic")
        dim, modes, svals = diagnostics.gradient_nullspace(m, 2)
        disc = dg.nodal_discretization(m, 2)
        worst = 0.0
        for j in range(dim):
            v = np.repeat(modes[:, :, j][..., None], 3, axis=-1)
            vf = np.einsum("fp,kpc->kfc", disc.ops.Vfq, v)
            proj = dg.EntropyProjection(v, vf, None)
            theta = viscosity.br1_gradient(disc, proj, dg.periodic_bc())
            worst = max(worst, float(np.sqrt(np.sum(dg.elementwise_inner(disc, theta, theta)))))
        ok = dim >= 1 and worst < 1e-10
        report("C11 BR-1 null-space probe", ok,
               f"non-constant null dimension = {dim}, max ||Theta(mode)|| = {worst:.2e} (bar 1e-10)")
