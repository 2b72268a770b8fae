#include "spmfit/spm_model.hpp"

#include <algorithm>
#include <cmath>

namespace spmfit {

namespace {
constexpr double kStoichSlack = 1e-12;  // tolerate pure round-off at the bounds
}

CellState init_state(const GroupedParameters& params, const SolverConfig& config)
{
    params.validate();
    config.validate();
    CellState s;
    s.negative.shells.assign(static_cast<std::size_t>(config.n_radial_shells), params.soc0_neg);
    s.positive.shells.assign(static_cast<std::size_t>(config.n_radial_shells), params.soc0_pos);
    s.time_s = 0.0;
    return s;
}

double surface_stoichiometry(const ElectrodeState& e)
{
    const std::size_t n = e.shells.size();
    // Shell centers sit at (i + 1/2) dx; extrapolating the outer two to x = 1
    // gives 1.5 c_{n-1} - 0.5 c_{n-2}.
    return 1.5 * e.shells[n - 1] - 0.5 * e.shells[n - 2];
}

double bulk_soc(const ElectrodeState& e)
{
    const std::size_t n = e.shells.size();
    const double dx = 1.0 / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = static_cast<double>(i) * dx;
        const double x1 = static_cast<double>(i + 1) * dx;
        acc += e.shells[i] * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0;
    }
    return 3.0 * acc;
}

double overpotential(double surface_stoich, double current_a, double q_coulomb,
                     double d_kinetic, const PhysicalConstants& consts, Electrode electrode)
{
    if (!(surface_stoich > 0.0 && surface_stoich < 1.0))
        throw KineticSingularityError(electrode, surface_stoich);
    const double sign = (electrode == Electrode::Negative) ? 1.0 : -1.0;
    const double denom = 6.0 * q_coulomb * d_kinetic *
                         std::sqrt(surface_stoich * (1.0 - surface_stoich));
    return consts.thermal_voltage_2rt_f() * std::asinh(sign * current_a / denom);
}

double terminal_voltage(const CellState& state, double current_a, const GroupedParameters& params,
                        const PhysicalConstants& consts, const OcpPair& ocp)
{
    const double css_neg = surface_stoichiometry(state.negative);
    const double css_pos = surface_stoichiometry(state.positive);
    const double eta_neg = overpotential(css_neg, current_a, params.q_neg, params.d_neg, consts,
                                         Electrode::Negative);
    const double eta_pos = overpotential(css_pos, current_a, params.q_pos, params.d_pos, consts,
                                         Electrode::Positive);
    return ocp.positive.evaluate(css_pos) - ocp.negative.evaluate(css_neg) + eta_pos - eta_neg -
           params.r0 * current_a;
}

Simulator::ElectrodeGrid Simulator::make_grid(double alpha, double q, int n_shells, double safety)
{
    ElectrodeGrid g;
    g.alpha = alpha;
    g.q = q;
    g.inv_alpha = 1.0 / alpha;
    const auto n = static_cast<std::size_t>(n_shells);
    g.dx = 1.0 / static_cast<double>(n);
    g.face_x2.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) * g.dx;
        g.face_x2[i] = x * x;
    }
    g.inv_vol.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = static_cast<double>(i) * g.dx;
        const double x1 = static_cast<double>(i + 1) * g.dx;
        g.inv_vol[i] = 3.0 / (x1 * x1 * x1 - x0 * x0 * x0);
    }
    g.dt_stable = safety * alpha * g.dx * g.dx / 2.0;
    g.flux.assign(n + 1, 0.0);
    return g;
}

Simulator::Simulator(const GroupedParameters& params, const SolverConfig& config)
    : params_(params), config_(config)
{
    params_.validate();
    config_.validate();
    neg_ = make_grid(params_.alpha_neg, params_.q_neg, config_.n_radial_shells,
                     config_.stability_safety);
    pos_ = make_grid(params_.alpha_pos, params_.q_pos, config_.n_radial_shells,
                     config_.stability_safety);
    state_ = init_state(params_, config_);
}

void Simulator::reset()
{
    state_ = init_state(params_, config_);
}

void Simulator::advance_electrode(ElectrodeGrid& g, ElectrodeState& e, double surface_gradient,
                                  double dt, int n_sub, Electrode which)
{
    const std::size_t n = e.shells.size();
    const double dt_sub = dt / static_cast<double>(n_sub);
    const double inv_dx = 1.0 / g.dx;
    double* c = e.shells.data();
    for (int s = 0; s < n_sub; ++s) {
        g.flux[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i)
            g.flux[i] = g.face_x2[i] * (c[i] - c[i - 1]) * inv_dx;
        g.flux[n] = surface_gradient;  // face_x2[n] == 1
        const double k = dt_sub * g.inv_alpha;
        for (std::size_t i = 0; i < n; ++i)
            c[i] += k * (g.flux[i + 1] - g.flux[i]) * g.inv_vol[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(c[i] >= -kStoichSlack && c[i] <= 1.0 + kStoichSlack))
            throw InfeasibleStateError(which, state_.time_s + dt, c[i]);
    }
    const double css = surface_stoichiometry(e);
    if (!(css >= -kStoichSlack && css <= 1.0 + kStoichSlack))
        throw InfeasibleStateError(which, state_.time_s + dt, css);
}

void Simulator::advance(double current_a, double dt)
{
    if (!(dt > 0.0)) throw std::invalid_argument("Simulator::advance: dt must be > 0");
    const double dt_limit = std::min(neg_.dt_stable, pos_.dt_stable);
    const int n_sub = std::max(1, static_cast<int>(std::ceil(dt / dt_limit)));
    // Surface boundary flux x^2 dc/dx at x=1. Lithium bookkeeping under
    // current > 0 == discharge: the negative particle loses lithium, the
    // positive one gains it, d(bulk soc)/dt = -/+ I/Q.
    const double g_neg = -current_a * neg_.alpha / (3.0 * neg_.q);
    const double g_pos = +current_a * pos_.alpha / (3.0 * pos_.q);
    advance_electrode(neg_, state_.negative, g_neg, dt, n_sub, Electrode::Negative);
    advance_electrode(pos_, state_.positive, g_pos, dt, n_sub, Electrode::Positive);
    state_.time_s += dt;
}

double Simulator::voltage(double current_a, const PhysicalConstants& consts,
                          const OcpPair& ocp) const
{
    return terminal_voltage(state_, current_a, params_, consts, ocp);
}

CellState step(const CellState& state, double current_a, double dt,
               const GroupedParameters& params, const SolverConfig& config)
{
    if (state.negative.shells.size() != static_cast<std::size_t>(config.n_radial_shells) ||
        state.positive.shells.size() != static_cast<std::size_t>(config.n_radial_shells))
        throw std::invalid_argument("step: state shell count does not match config");
    Simulator sim(params, config);
    sim.mutable_state() = state;
    sim.advance(current_a, dt);
    return sim.state();
}

TimeSeries simulate(const TimeSeries& profile, const ModelContext& ctx)
{
    if (profile.empty()) throw std::invalid_argument("simulate: empty profile");
    Simulator sim(ctx.params, ctx.solver);

    // Row indices where the replay must re-initialize (independent base runs).
    std::vector<std::size_t> resets;
    for (const auto& m : profile.segment_marks)
        if (m.base_start) resets.push_back(m.row);
    std::sort(resets.begin(), resets.end());

    TimeSeries out;
    out.rows.reserve(profile.size());
    out.segment_marks = profile.segment_marks;
    out.designation = profile.designation;
    std::size_t next_reset = 0;
    for (std::size_t k = 0; k < profile.rows.size(); ++k) {
        if (next_reset < resets.size() && resets[next_reset] == k) {
            sim.reset();
            ++next_reset;
        }
        const auto& row = profile.rows[k];
        const double v = sim.voltage(row.current_a, ctx.consts, ctx.ocp);
        out.rows.push_back({row.time_s, row.current_a, v});
        if (k + 1 < profile.rows.size()) {
            const bool resets_next = next_reset < resets.size() && resets[next_reset] == k + 1;
            if (!resets_next) {
                const double dt = profile.rows[k + 1].time_s - row.time_s;
                sim.advance(row.current_a, dt);
            }
        }
    }
    return out;
}

} // namespace spmfit
