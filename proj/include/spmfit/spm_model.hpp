#pragma once

#include <vector>

#include "spmfit/errors.hpp"
#include "spmfit/ocp.hpp"
#include "spmfit/parameters.hpp"
#include "spmfit/time_series.hpp"

namespace spmfit {

/// Radial profile of normalized concentration in one representative particle,
/// one value per finite-volume shell on x = r/Rs in [0,1]. Values must stay
/// inside [0,1]; leaving the interval is an infeasibility signal, never
/// silently clamped.
struct ElectrodeState {
    std::vector<double> shells;
};

struct CellState {
    ElectrodeState negative;
    ElectrodeState positive;
    double time_s = 0.0;
};

/// Everything a simulation needs besides the state itself.
struct ModelContext {
    GroupedParameters params;
    PhysicalConstants consts;
    SolverConfig solver;
    OcpPair ocp;
};

/// Uniform profiles at the initial stoichiometries, t = 0.
CellState init_state(const GroupedParameters& params, const SolverConfig& config);

/// Surface stoichiometry, linearly extrapolated to x = 1 from the two
/// outermost shell centers.
double surface_stoichiometry(const ElectrodeState& e);

/// Volume-weighted mean stoichiometry, 3 * integral of c x^2 dx.
double bulk_soc(const ElectrodeState& e);

/// Butler-Volmer surface overpotential in asinh form,
///   eta = (2RT/F) asinh( s * I / (6 q d sqrt(css (1-css))) ),
/// with s = +1 for the negative electrode and s = -1 for the positive one
/// under the current > 0 == discharge convention.
double overpotential(double surface_stoich, double current_a, double q_coulomb,
                     double d_kinetic, const PhysicalConstants& consts, Electrode electrode);

/// V = OCP+(css+) - OCP-(css-) + eta+ - eta- - R0 I.
double terminal_voltage(const CellState& state, double current_a, const GroupedParameters& params,
                        const PhysicalConstants& consts, const OcpPair& ocp);

/// One conservative explicit finite-volume step of length dt, internally
/// substepped to satisfy the diffusion stability bound
///   dt_sub <= stability_safety * alpha * dx^2 / 2
/// for both electrodes. Throws InfeasibleStateError if any shell or the
/// reconstructed surface value leaves [0,1].
CellState step(const CellState& state, double current_a, double dt,
               const GroupedParameters& params, const SolverConfig& config);

/// In-place stepping engine used by the hot paths (protocol generation,
/// replay, objective evaluation). Single-threaded; instances are independent.
class Simulator {
public:
    Simulator(const GroupedParameters& params, const SolverConfig& config);

    void reset();  // back to the uniform soc0 profiles at t = 0
    void advance(double current_a, double dt);

    const CellState& state() const { return state_; }
    CellState& mutable_state() { return state_; }
    double time_s() const { return state_.time_s; }

    double voltage(double current_a, const PhysicalConstants& consts, const OcpPair& ocp) const;
    double bulk_soc_neg() const { return bulk_soc(state_.negative); }
    double bulk_soc_pos() const { return bulk_soc(state_.positive); }

    const GroupedParameters& params() const { return params_; }

private:
    struct ElectrodeGrid {
        double alpha;
        double q;
        double inv_alpha;
        double dx;
        std::vector<double> face_x2;   // x^2 at shell faces
        std::vector<double> inv_vol;   // 1 / shell volume
        double dt_stable;
        std::vector<double> flux;      // scratch
    };

    void advance_electrode(ElectrodeGrid& g, ElectrodeState& e, double surface_gradient,
                           double dt, int n_sub, Electrode which);
    static ElectrodeGrid make_grid(double alpha, double q, int n_shells, double safety);

    GroupedParameters params_;
    SolverConfig config_;
    ElectrodeGrid neg_;
    ElectrodeGrid pos_;
    CellState state_;
};

/// Replays a fixed current sequence through the model and returns the voltage
/// at every sample of `profile`. Sample k's current is held over
/// [t_k, t_{k+1}); the state re-initializes at marks flagged `base_start`.
/// Pure function of its inputs.
TimeSeries simulate(const TimeSeries& profile, const ModelContext& ctx);

} // namespace spmfit
