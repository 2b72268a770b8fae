#include "spmfit/pso.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "spmfit/errors.hpp"

namespace spmfit {

void SearchSpace::validate() const
{
    lower.validate();
    upper.validate();
    const auto lo = lower.as_array();
    const auto hi = upper.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d)
        if (!(lo[d] < hi[d]))
            throw std::invalid_argument(std::string("SearchSpace: lower must be < upper for ") +
                                        GroupedParameters::component_names()[d]);
}

SearchSpace SearchSpace::defaults(const GroupedParameters& reference)
{
    auto lo = reference.as_array();
    auto hi = reference.as_array();
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d) {
        lo[d] *= 0.2;
        hi[d] *= 5.0;
    }
    // Initial stoichiometries live in (0,1); clamp their box accordingly.
    for (std::size_t d : {6UL, 7UL}) {
        lo[d] = std::max(lo[d], 0.001);
        hi[d] = std::min(hi[d], 0.999);
    }
    SearchSpace s{GroupedParameters::from_array(lo), GroupedParameters::from_array(hi)};
    s.validate();
    return s;
}

void SwarmConfig::validate() const
{
    if (n_particles < 2) throw std::invalid_argument("SwarmConfig: n_particles must be >= 2");
    if (n_iterations < 1) throw std::invalid_argument("SwarmConfig: n_iterations must be >= 1");
    if (!(inertia > 0.0 && inertia <= 1.0))
        throw std::invalid_argument("SwarmConfig: inertia must be in (0,1]");
    if (!(cognitive > 0.0 && social > 0.0))
        throw std::invalid_argument("SwarmConfig: cognitive and social must be > 0");
    if (!(penalty_fitness > 0.0))
        throw std::invalid_argument("SwarmConfig: penalty_fitness must be > 0");
}

double objective(const GroupedParameters& theta, const TimeSeries& dataset,
                 const ModelContext& ctx, double penalty_fitness)
{
    ModelContext local = ctx;
    local.params = theta;
    try {
        const TimeSeries model = simulate(dataset, local);
        double acc = 0.0;
        for (std::size_t k = 0; k < dataset.rows.size(); ++k) {
            const double e = dataset.rows[k].voltage_v - model.rows[k].voltage_v;
            acc += e * e;
        }
        return acc;
    } catch (const SimulationInfeasible&) {
        return penalty_fitness;
    }
}

namespace {

constexpr std::size_t kDim = GroupedParameters::kDim;

void evaluate_all(const std::function<double(const std::array<double, 9>&)>& fn,
                  const std::vector<std::array<double, kDim>>& xs, std::vector<double>& out,
                  int n_workers)
{
    const std::size_t n = xs.size();
    out.resize(n);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(xs[i]);
        return;
    }
    const int workers = std::min<int>(n_workers, static_cast<int>(n));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = static_cast<std::size_t>(w); i < n;
                 i += static_cast<std::size_t>(workers))
                out[i] = fn(xs[i]);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

MinimizeResult minimize(const std::function<double(const std::array<double, 9>&)>& fn,
                        const Box9& box, const SwarmConfig& config, int n_workers)
{
    config.validate();
    for (std::size_t d = 0; d < kDim; ++d)
        if (!(box.lower[d] < box.upper[d]))
            throw std::invalid_argument("minimize: lower bound must be < upper bound");
    const auto t_start = std::chrono::steady_clock::now();

    const auto& lo = box.lower;
    const auto& hi = box.upper;
    const auto n = static_cast<std::size_t>(config.n_particles);

    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    std::vector<std::array<double, kDim>> x(n), v(n), pbest(n);
    std::vector<double> fitness(n), pbest_fit(n);

    // Positions uniform in the box; small random initial velocities so the
    // first iterations are driven by the pbest/gbest field rather than
    // ballistic motion.
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t d = 0; d < kDim; ++d) {
            const double span = hi[d] - lo[d];
            x[p][d] = lo[d] + u01(rng) * span;
            v[p][d] = (u01(rng) - 0.5) * 0.1 * span;
        }

    evaluate_all(fn, x, fitness, n_workers);
    pbest = x;
    pbest_fit = fitness;
    std::size_t g = static_cast<std::size_t>(
        std::min_element(pbest_fit.begin(), pbest_fit.end()) - pbest_fit.begin());
    std::array<double, kDim> gbest = pbest[g];
    double gbest_fit = pbest_fit[g];

    MinimizeResult result;
    result.history.reserve(static_cast<std::size_t>(config.n_iterations));

    for (int it = 0; it < config.n_iterations; ++it) {
        // Central draws in particle order, before any evaluation is dispatched.
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t d = 0; d < kDim; ++d) {
                const double r1 = u01(rng);
                const double r2 = u01(rng);
                v[p][d] = config.inertia * v[p][d] +
                          config.cognitive * r1 * (pbest[p][d] - x[p][d]) +
                          config.social * r2 * (gbest[d] - x[p][d]);
                x[p][d] += v[p][d];
                if (x[p][d] < lo[d]) {
                    x[p][d] = lo[d];
                    v[p][d] = 0.0;
                } else if (x[p][d] > hi[d]) {
                    x[p][d] = hi[d];
                    v[p][d] = 0.0;
                }
            }
        }
        evaluate_all(fn, x, fitness, n_workers);
        for (std::size_t p = 0; p < n; ++p) {
            if (fitness[p] < pbest_fit[p]) {
                pbest_fit[p] = fitness[p];
                pbest[p] = x[p];
            }
            if (fitness[p] < gbest_fit) {
                gbest_fit = fitness[p];
                gbest = x[p];
            }
        }
        result.history.push_back(gbest_fit);
    }

    result.best = gbest;
    result.best_fitness = gbest_fit;
    result.t_opt_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

EstimationResult estimate(const TimeSeries& dataset, const SearchSpace& space,
                          const SwarmConfig& config, const ModelContext& ctx, int n_workers)
{
    if (dataset.empty()) throw std::invalid_argument("estimate: empty dataset");
    space.validate();

    // The positive scale parameters span multiplicative ranges, so the swarm
    // works in their logarithms; the initial stoichiometries stay linear.
    // Every evaluated point still maps inside the requested box.
    std::array<bool, kDim> log_dim{};
    for (std::size_t d = 0; d < kDim; ++d) log_dim[d] = (d != 6 && d != 7);

    auto to_search = [&log_dim](std::array<double, kDim> raw) {
        for (std::size_t d = 0; d < kDim; ++d)
            if (log_dim[d]) raw[d] = std::log(raw[d]);
        return raw;
    };
    auto to_params = [&log_dim](std::array<double, kDim> u) {
        for (std::size_t d = 0; d < kDim; ++d)
            if (log_dim[d]) u[d] = std::exp(u[d]);
        return u;
    };

    const Box9 box{to_search(space.lower.as_array()), to_search(space.upper.as_array())};
    auto fn = [&](const std::array<double, kDim>& u) {
        return objective(GroupedParameters::from_array(to_params(u)), dataset, ctx,
                         config.penalty_fitness);
    };
    const MinimizeResult res = minimize(fn, box, config, n_workers);
    EstimationResult out;
    out.theta_star = GroupedParameters::from_array(to_params(res.best));
    out.best_fitness = res.best_fitness;
    out.history = res.history;
    out.t_opt_s = res.t_opt_s;
    return out;
}

} // namespace spmfit
