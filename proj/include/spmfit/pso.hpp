#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "spmfit/parameters.hpp"
#include "spmfit/spm_model.hpp"
#include "spmfit/time_series.hpp"

namespace spmfit {

/// Componentwise box the swarm searches. Lower bounds must themselves be
/// valid parameter vectors (positivity, SOC in (0,1)).
struct SearchSpace {
    GroupedParameters lower;
    GroupedParameters upper;

    void validate() const;

    /// Default box: each reference value scaled by [x0.2, x5], initial SOCs
    /// clamped to (0.001, 0.999).
    static SearchSpace defaults(const GroupedParameters& reference);
};

struct SwarmConfig {
    int n_particles = 50;
    int n_iterations = 300;
    double inertia = 0.729;
    double cognitive = 1.49445;
    double social = 1.49445;
    std::uint64_t rng_seed = 51;
    double penalty_fitness = 1e12;

    void validate() const;
};

struct EstimationResult {
    GroupedParameters theta_star;
    double best_fitness = 0.0;
    std::vector<double> history;  // best fitness after each iteration, non-increasing
    double t_opt_s = 0.0;         // wall clock, excluded from determinism checks
};

/// Sum of squared voltage residuals of the candidate over the dataset
/// (penalty_fitness when the candidate cannot simulate the profile).
double objective(const GroupedParameters& theta, const TimeSeries& dataset,
                 const ModelContext& ctx, double penalty_fitness);

/// Plain coordinate box for the generic swarm core (no parameter semantics).
struct Box9 {
    std::array<double, 9> lower;
    std::array<double, 9> upper;
};

struct MinimizeResult {
    std::array<double, 9> best;
    double best_fitness = 0.0;
    std::vector<double> history;
    double t_opt_s = 0.0;
};

/// Global-best PSO over an arbitrary boxed 9-dimensional objective.
/// Velocity update v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x); positions
/// clamp to the box with the velocity zeroed on the clamped component. All
/// random draws come from one central generator in particle order, so results
/// are identical for any worker count.
MinimizeResult minimize(const std::function<double(const std::array<double, 9>&)>& fn,
                        const Box9& box, const SwarmConfig& config, int n_workers = 1);

/// PSO fit of the nine grouped parameters against a voltage dataset. The
/// swarm works in log coordinates for the positive scale parameters (their
/// ranges are multiplicative); every evaluated point maps inside `space`.
EstimationResult estimate(const TimeSeries& dataset, const SearchSpace& space,
                          const SwarmConfig& config, const ModelContext& ctx,
                          int n_workers = 1);

} // namespace spmfit
