#include <doctest.h>

#include <cmath>
#include <random>

#include "spmfit/config.hpp"
#include "spmfit/errors.hpp"
#include "spmfit/spm_model.hpp"

using namespace spmfit;

namespace {

ModelContext default_ctx()
{
    return ExperimentConfig::defaults().model_context();
}

double total_lithium(const ElectrodeState& e)
{
    // Volume-weighted sum, the solver's conserved quantity (up to flux).
    return bulk_soc(e) / 3.0;
}

// Quasi-steady constant-flux profile: c(x) = c0 + g x^2 / 2 sampled at shell
// centers. Closed form: surface value c0 + g/2, volume mean c0 + 3g/10.
ElectrodeState parabola_state(int n, double c0, double g)
{
    ElectrodeState e;
    const double dx = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const double xc = (i + 0.5) * dx;
        e.shells.push_back(c0 + 0.5 * g * xc * xc);
    }
    return e;
}

TimeSeries constant_current_profile(double amps, double duration_s, double dt)
{
    TimeSeries p;
    for (double t = 0.0; t <= duration_s + 1e-9; t += dt) p.rows.push_back({t, amps, 0.0});
    return p;
}

} // namespace

TEST_SUITE("spm_core")
{
    TEST_CASE("init_state is uniform at the initial stoichiometries")
    {
        const auto ctx = default_ctx();
        const CellState s = init_state(ctx.params, ctx.solver);
        CHECK(s.time_s == 0.0);
        for (double c : s.negative.shells) CHECK(c == doctest::Approx(0.9472).epsilon(1e-15));
        for (double c : s.positive.shells) CHECK(c == doctest::Approx(0.0188).epsilon(1e-15));

        GroupedParameters half = ctx.params;
        half.soc0_neg = half.soc0_pos = 0.5;
        const CellState s2 = init_state(half, ctx.solver);
        for (double c : s2.negative.shells) CHECK(c == 0.5);
        for (double c : s2.positive.shells) CHECK(c == 0.5);
    }

    TEST_CASE("init_state rejects out-of-range stoichiometry")
    {
        auto ctx = default_ctx();
        ctx.params.soc0_neg = 1.2;
        CHECK_THROWS_AS(init_state(ctx.params, ctx.solver), std::invalid_argument);
    }

    TEST_CASE("zero current conserves lithium to 1e-9 over 1000 steps")
    {
        const auto ctx = default_ctx();
        Simulator sim(ctx.params, ctx.solver);
        // Non-uniform starting profile.
        sim.mutable_state().negative = parabola_state(ctx.solver.n_radial_shells, 0.5, -0.3);
        sim.mutable_state().positive = parabola_state(ctx.solver.n_radial_shells, 0.4, 0.25);
        const double li_neg0 = total_lithium(sim.state().negative);
        const double li_pos0 = total_lithium(sim.state().positive);
        for (int k = 0; k < 1000; ++k) sim.advance(0.0, 1.0);
        CHECK(std::abs(total_lithium(sim.state().negative) - li_neg0) / li_neg0 < 1e-9);
        CHECK(std::abs(total_lithium(sim.state().positive) - li_pos0) / li_pos0 < 1e-9);
    }

    TEST_CASE("constant current moves bulk SOC by exactly I dt / Q")
    {
        const auto ctx = default_ctx();
        Simulator sim(ctx.params, ctx.solver);
        const double i = 2.0;
        const double t = 100.0;
        const double neg0 = sim.bulk_soc_neg();
        const double pos0 = sim.bulk_soc_pos();
        for (int k = 0; k < 100; ++k) sim.advance(i, t / 100.0);
        const double expect_neg = neg0 - i * t / ctx.params.q_neg;
        const double expect_pos = pos0 + i * t / ctx.params.q_pos;
        CHECK(sim.bulk_soc_neg() == doctest::Approx(expect_neg).epsilon(1e-3));
        CHECK(sim.bulk_soc_pos() == doctest::Approx(expect_pos).epsilon(1e-3));
        // The flux-form update makes it exact to round-off, far below 0.1%.
        CHECK(sim.bulk_soc_neg() == doctest::Approx(expect_neg).epsilon(1e-12));
    }

    TEST_CASE("zero-current relaxation reaches the fine-grid uniform limit")
    {
        const auto ctx = default_ctx();
        SolverConfig fine = ctx.solver;
        fine.n_radial_shells = 64;

        Simulator coarse(ctx.params, ctx.solver);
        coarse.mutable_state().negative = parabola_state(ctx.solver.n_radial_shells, 0.5, -0.3);
        Simulator ref(ctx.params, fine);
        ref.mutable_state().negative = parabola_state(64, 0.5, -0.3);

        for (int k = 0; k < 20000; ++k) coarse.advance(0.0, 1.0);
        for (int k = 0; k < 20000; ++k) ref.advance(0.0, 1.0);

        // Both relax to a uniform profile at their conserved mean.
        const double limit = ref.bulk_soc_neg();
        for (double c : coarse.state().negative.shells)
            CHECK(c == doctest::Approx(limit).epsilon(2e-3));
        const double spread = *std::max_element(coarse.state().negative.shells.begin(),
                                                coarse.state().negative.shells.end()) -
                              *std::min_element(coarse.state().negative.shells.begin(),
                                                coarse.state().negative.shells.end());
        CHECK(spread < 1e-9);
    }

    TEST_CASE("surface reconstruction on uniform and parabolic profiles")
    {
        ElectrodeState u;
        u.shells.assign(16, 0.5);
        CHECK(surface_stoichiometry(u) == doctest::Approx(0.5).epsilon(1e-15));

        const double c0 = 0.40, g = 0.30;
        const ElectrodeState p = parabola_state(16, c0, g);
        CHECK(surface_stoichiometry(p) == doctest::Approx(c0 + g / 2).epsilon(0.01));
        CHECK(bulk_soc(p) == doctest::Approx(c0 + 0.3 * g).epsilon(0.005));
    }

    TEST_CASE("bulk_soc of uniform profiles")
    {
        ElectrodeState e;
        e.shells.assign(16, 0.25);
        CHECK(bulk_soc(e) == doctest::Approx(0.25).epsilon(1e-12));
        e.shells.assign(16, 1.0);
        CHECK(bulk_soc(e) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("overpotential is zero at rest and odd in current")
    {
        const auto ctx = default_ctx();
        const PhysicalConstants k = ctx.consts;
        CHECK(overpotential(0.5, 0.0, ctx.params.q_neg, ctx.params.d_neg, k,
                            Electrode::Negative) == 0.0);
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> css(0.05, 0.95), amps(0.01, 6.0);
        for (int t = 0; t < 50; ++t) {
            const double c = css(rng), i = amps(rng);
            const double plus = overpotential(c, i, ctx.params.q_neg, ctx.params.d_neg, k,
                                              Electrode::Negative);
            const double minus = overpotential(c, -i, ctx.params.q_neg, ctx.params.d_neg, k,
                                               Electrode::Negative);
            CHECK(plus == doctest::Approx(-minus).epsilon(1e-12));
            CHECK(plus > 0.0);  // discharge raises the negative overpotential
        }
        // Positive electrode has the opposite sign under discharge.
        CHECK(overpotential(0.5, 1.0, ctx.params.q_pos, ctx.params.d_pos, k,
                            Electrode::Positive) < 0.0);
    }

    TEST_CASE("small-current overpotential matches the linearization")
    {
        const auto ctx = default_ctx();
        const double i = 1e-3;
        const double css = 0.37;
        const double exact = overpotential(css, i, ctx.params.q_neg, ctx.params.d_neg,
                                           ctx.consts, Electrode::Negative);
        const double lin = ctx.consts.thermal_voltage_2rt_f() * i /
                           (6.0 * ctx.params.q_neg * ctx.params.d_neg *
                            std::sqrt(css * (1.0 - css)));
        CHECK(exact == doctest::Approx(lin).epsilon(1e-4));
    }

    TEST_CASE("overpotential is singular at the stoichiometry limits")
    {
        const auto ctx = default_ctx();
        CHECK_THROWS_AS(overpotential(0.0, 1.0, ctx.params.q_neg, ctx.params.d_neg, ctx.consts,
                                      Electrode::Negative),
                        KineticSingularityError);
        CHECK_THROWS_AS(overpotential(1.0, 1.0, ctx.params.q_neg, ctx.params.d_neg, ctx.consts,
                                      Electrode::Negative),
                        KineticSingularityError);
    }

    TEST_CASE("rest voltage is the OCP difference")
    {
        const auto ctx = default_ctx();
        const CellState s = init_state(ctx.params, ctx.solver);
        const double v = terminal_voltage(s, 0.0, ctx.params, ctx.consts, ctx.ocp);
        const double expect = ctx.ocp.positive.evaluate(ctx.params.soc0_pos) -
                              ctx.ocp.negative.evaluate(ctx.params.soc0_neg);
        CHECK(v == doctest::Approx(expect).epsilon(1e-12));
    }

    TEST_CASE("discharge always drops the instantaneous voltage")
    {
        const auto ctx = default_ctx();
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> soc(0.15, 0.85), amps(0.05, 4.0);
        for (int t = 0; t < 100; ++t) {
            GroupedParameters p = ctx.params;
            p.soc0_neg = soc(rng);
            p.soc0_pos = soc(rng);
            const CellState s = init_state(p, ctx.solver);
            const double i = amps(rng);
            const double v0 = terminal_voltage(s, 0.0, p, ctx.consts, ctx.ocp);
            CHECK(terminal_voltage(s, i, p, ctx.consts, ctx.ocp) < v0);
            CHECK(terminal_voltage(s, -i, p, ctx.consts, ctx.ocp) > v0);
        }
    }

    TEST_CASE("ohmic resistance enters the voltage linearly")
    {
        const auto ctx = default_ctx();
        const CellState s = init_state(ctx.params, ctx.solver);
        const double i = 1.7;
        const double delta = 0.01;
        GroupedParameters bumped = ctx.params;
        bumped.r0 += delta;
        const double v1 = terminal_voltage(s, i, ctx.params, ctx.consts, ctx.ocp);
        const double v2 = terminal_voltage(s, i, bumped, ctx.consts, ctx.ocp);
        CHECK(v1 - v2 == doctest::Approx(delta * i).epsilon(1e-12));
    }

    TEST_CASE("draining an electrode raises an infeasibility with context")
    {
        const auto ctx = default_ctx();
        GroupedParameters p = ctx.params;
        p.soc0_neg = 0.05;  // nearly empty negative electrode
        Simulator sim(p, ctx.solver);
        bool thrown = false;
        try {
            for (int k = 0; k < 4000; ++k) sim.advance(2.9, 1.0);
        } catch (const InfeasibleStateError& e) {
            thrown = true;
            CHECK(e.electrode == Electrode::Negative);
            CHECK(e.time_s > 0.0);
        }
        CHECK(thrown);
    }

    TEST_CASE("grid refinement changes a 1C discharge trace by under 2 mV RMS")
    {
        const auto ctx = default_ctx();
        const TimeSeries profile = constant_current_profile(2.9, 2000.0, 1.0);

        ModelContext coarse = ctx;
        coarse.solver.n_radial_shells = 16;
        ModelContext fine = ctx;
        fine.solver.n_radial_shells = 32;

        const TimeSeries a = simulate(profile, coarse);
        const TimeSeries b = simulate(profile, fine);
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double e = a.rows[k].voltage_v - b.rows[k].voltage_v;
            acc += e * e;
        }
        CHECK(std::sqrt(acc / a.size()) < 0.002);
    }

    TEST_CASE("simulate is deterministic and flat at rest")
    {
        const auto ctx = default_ctx();
        const TimeSeries rest = constant_current_profile(0.0, 100.0, 1.0);
        const TimeSeries va = simulate(rest, ctx);
        const TimeSeries vb = simulate(rest, ctx);
        for (std::size_t k = 0; k < va.size(); ++k) {
            CHECK(va.rows[k].voltage_v == vb.rows[k].voltage_v);  // bit identical
            CHECK(va.rows[k].voltage_v == doctest::Approx(va.rows[0].voltage_v).epsilon(1e-12));
        }
    }

    TEST_CASE("step rejects mismatched shell counts and bad dt")
    {
        const auto ctx = default_ctx();
        CellState s = init_state(ctx.params, ctx.solver);
        SolverConfig other = ctx.solver;
        other.n_radial_shells = 8;
        CHECK_THROWS_AS(step(s, 1.0, 1.0, ctx.params, other), std::invalid_argument);
        CHECK_THROWS_AS(step(s, 1.0, -1.0, ctx.params, ctx.solver), std::invalid_argument);
    }
}
