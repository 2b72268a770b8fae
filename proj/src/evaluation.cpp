#include "spmfit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "spmfit/errors.hpp"

namespace spmfit {

double rmse_of_residuals(const std::vector<double>& residuals)
{
    if (residuals.empty()) throw std::invalid_argument("rmse: empty residual set");
    double acc = 0.0;
    for (double e : residuals) acc += e * e;
    return std::sqrt(acc / static_cast<double>(residuals.size()));
}

double rmse(const TimeSeries& measured, const TimeSeries& model)
{
    if (measured.size() != model.size())
        throw std::invalid_argument("rmse: series lengths differ (" +
                                    std::to_string(measured.size()) + " vs " +
                                    std::to_string(model.size()) + ")");
    if (measured.empty()) throw std::invalid_argument("rmse: empty series");
    double acc = 0.0;
    for (std::size_t k = 0; k < measured.size(); ++k) {
        if (std::abs(measured.rows[k].time_s - model.rows[k].time_s) > 1e-6)
            throw std::invalid_argument("rmse: timestamp mismatch at row " + std::to_string(k));
        const double e = measured.rows[k].voltage_v - model.rows[k].voltage_v;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(measured.size()));
}

CompositionVerdict rmse_composition_check(const std::vector<std::vector<double>>& components)
{
    if (components.size() < 2)
        throw std::invalid_argument("rmse_composition_check: need at least two components");
    for (const auto& c : components)
        if (c.empty())
            throw std::invalid_argument("rmse_composition_check: empty component");

    std::vector<double> comp_rmse;
    std::vector<double> all;
    for (const auto& c : components) {
        comp_rmse.push_back(rmse_of_residuals(c));
        all.insert(all.end(), c.begin(), c.end());
    }
    CompositionVerdict v{};
    v.combined_rmse = rmse_of_residuals(all);
    v.min_component_rmse = *std::min_element(comp_rmse.begin(), comp_rmse.end());
    v.max_component_rmse = *std::max_element(comp_rmse.begin(), comp_rmse.end());
    const double tol = 1e-12;
    v.combined_within_bounds = v.combined_rmse >= v.min_component_rmse - tol &&
                               v.combined_rmse <= v.max_component_rmse + tol;

    // For every component A: RMSE(A) < RMSE(all) must hold exactly when
    // RMSE(A) < RMSE(rest of the partition), and likewise for >.
    v.ordering_consistent = true;
    for (std::size_t i = 0; i < components.size(); ++i) {
        std::vector<double> rest;
        for (std::size_t j = 0; j < components.size(); ++j)
            if (j != i) rest.insert(rest.end(), components[j].begin(), components[j].end());
        const double a = comp_rmse[i];
        const double r = rmse_of_residuals(rest);
        const double c = v.combined_rmse;
        if ((a < c - tol && !(a < r + tol)) || (a > c + tol && !(a > r - tol)))
            v.ordering_consistent = false;
    }
    return v;
}

void RmseMatrix::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("RmseMatrix: cannot write '" + path + "'");
    out << "case_id";
    for (int s : scenario_ids) out << ",s" << s;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < n_cases(); ++i) {
        out << case_ids[i];
        for (std::size_t j = 0; j < n_scenarios(); ++j) {
            if (flagged[i][j]) {
                out << ",NA";
            } else {
                std::snprintf(buf, sizeof buf, ",%.12g", values[i][j]);
                out << buf;
            }
        }
        out << "\n";
    }
}

RmseMatrix RmseMatrix::read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RmseMatrix: cannot open '" + path + "'");
    RmseMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("RmseMatrix: empty file " + path);
    {
        std::istringstream head(line);
        std::string cell;
        std::getline(head, cell, ',');  // "case_id"
        while (std::getline(head, cell, ',')) {
            if (cell.empty() || cell[0] != 's')
                throw std::runtime_error("RmseMatrix: bad column header '" + cell + "'");
            m.scenario_ids.push_back(std::stoi(cell.substr(1)));
        }
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        m.case_ids.push_back(std::stoi(cell));
        std::vector<double> vals;
        std::vector<bool> flags;
        while (std::getline(row, cell, ',')) {
            if (cell == "NA") {
                vals.push_back(std::numeric_limits<double>::quiet_NaN());
                flags.push_back(true);
            } else {
                vals.push_back(std::stod(cell));
                flags.push_back(false);
            }
        }
        if (vals.size() != m.scenario_ids.size())
            throw std::runtime_error("RmseMatrix: ragged row in " + path);
        m.values.push_back(std::move(vals));
        m.flagged.push_back(std::move(flags));
    }
    return m;
}

RmseMatrix cross_validate(const std::vector<CaseInput>& cases,
                          const std::vector<std::pair<int, TimeSeries>>& scenario_datasets,
                          const ModelContext& ctx, int n_workers)
{
    if (cases.empty() || scenario_datasets.empty())
        throw std::invalid_argument("cross_validate: empty cases or scenarios");
    RmseMatrix m;
    for (const auto& c : cases) m.case_ids.push_back(c.case_id);
    for (const auto& s : scenario_datasets) m.scenario_ids.push_back(s.first);
    m.values.assign(m.n_cases(), std::vector<double>(m.n_scenarios(), 0.0));
    m.flagged.assign(m.n_cases(), std::vector<bool>(m.n_scenarios(), false));

    const std::size_t total = m.n_cases() * m.n_scenarios();
    auto work = [&](std::size_t flat) {
        const std::size_t i = flat / m.n_scenarios();
        const std::size_t j = flat % m.n_scenarios();
        ModelContext local = ctx;
        local.params = cases[i].theta_star;
        try {
            const TimeSeries model = simulate(scenario_datasets[j].second, local);
            m.values[i][j] = rmse(scenario_datasets[j].second, model);
        } catch (const SimulationInfeasible&) {
            m.values[i][j] = std::numeric_limits<double>::quiet_NaN();
            m.flagged[i][j] = true;
        }
    };
    if (n_workers <= 1) {
        for (std::size_t f = 0; f < total; ++f) work(f);
    } else {
        const int workers = std::min<int>(n_workers, static_cast<int>(total));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w]() {
                for (std::size_t f = static_cast<std::size_t>(w); f < total;
                     f += static_cast<std::size_t>(workers))
                    work(f);
            });
        for (auto& t : pool) t.join();
    }
    return m;
}

ParamErrorReport param_errors(const GroupedParameters& theta_star,
                              const GroupedParameters& theta_true)
{
    const auto star = theta_star.as_array();
    const auto truth = theta_true.as_array();
    ParamErrorReport r{};
    double acc_pct = 0.0;
    double acc_sq = 0.0;
    for (std::size_t d = 0; d < GroupedParameters::kDim; ++d) {
        if (truth[d] == 0.0)
            throw std::invalid_argument(std::string("param_errors: true value of ") +
                                        GroupedParameters::component_names()[d] + " is zero");
        r.delta_theta_pct[d] = std::abs(star[d] - truth[d]) / std::abs(truth[d]) * 100.0;
        acc_pct += r.delta_theta_pct[d];
        acc_sq += (star[d] - truth[d]) * (star[d] - truth[d]);
    }
    r.mean_delta_pct = acc_pct / static_cast<double>(GroupedParameters::kDim);
    r.delta_dist = std::sqrt(acc_sq);
    return r;
}

std::vector<double> normalize_column(const std::vector<double>& values)
{
    if (values.size() < 2)
        throw std::invalid_argument("normalize_column: need at least two values");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo))
        throw std::invalid_argument("normalize_column: constant column, normalization degenerate");
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back((v - lo) / (hi - lo));
    return out;
}

void CostWeights::validate() const
{
    for (double w : {alpha, beta, gamma})
        if (!(w >= 0.0 && w <= 1.0))
            throw std::invalid_argument("CostWeights: weights must be in [0,1]");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-9)
        throw std::invalid_argument("CostWeights: weights must sum to 1");
}

const std::array<CostWeights, 7>& cost_options()
{
    static const std::array<CostWeights, 7> opts = {{
        {1.0, 0.0, 0.0},              // O1 output error
        {0.0, 1.0, 0.0},              // O2 parameter error
        {0.0, 0.0, 1.0},              // O3 time
        {0.5, 0.5, 0.0},              // O4 output + parameter
        {0.5, 0.0, 0.5},              // O5 output + time
        {0.0, 0.5, 0.5},              // O6 parameter + time
        {1.0 / 3, 1.0 / 3, 1.0 / 3},  // O7 balanced
    }};
    return opts;
}

CostTable cost_table(const std::vector<CaseMetrics>& metrics)
{
    if (metrics.size() < 2) throw std::invalid_argument("cost_table: need at least two cases");
    std::vector<double> ey, et, tt;
    for (const auto& m : metrics) {
        ey.push_back(m.e_y);
        et.push_back(m.e_theta);
        tt.push_back(m.t_total_h);
    }
    const auto ney = normalize_column(ey);
    const auto net = normalize_column(et);
    const auto ntt = normalize_column(tt);

    CostTable t;
    t.metrics = metrics;
    t.j_values.resize(metrics.size());
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        for (std::size_t o = 0; o < cost_options().size(); ++o) {
            const auto& w = cost_options()[o];
            t.j_values[i][o] = w.alpha * ney[i] + w.beta * net[i] + w.gamma * ntt[i];
        }
    }
    return t;
}

void CostTable::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("CostTable: cannot write '" + path + "'");
    out << "case_id,e_y_v,e_theta,t_total_h,O1,O2,O3,O4,O5,O6,O7\n";
    char buf[256];
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g", metrics[i].case_id,
                      metrics[i].e_y, metrics[i].e_theta, metrics[i].t_total_h);
        out << buf;
        for (double j : j_values[i]) {
            std::snprintf(buf, sizeof buf, ",%.12g", j);
            out << buf;
        }
        out << "\n";
    }
}

int select_optimal(const CostTable& table, int option_index)
{
    if (option_index < 0 || option_index >= 7)
        throw std::invalid_argument("select_optimal: option index out of range");
    if (table.metrics.empty()) throw std::invalid_argument("select_optimal: empty table");
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.metrics.size(); ++i) {
        const double ji = table.j_values[i][static_cast<std::size_t>(option_index)];
        const double jb = table.j_values[best][static_cast<std::size_t>(option_index)];
        if (ji < jb || (ji == jb && table.metrics[i].case_id < table.metrics[best].case_id))
            best = i;
    }
    return table.metrics[best].case_id;
}

namespace {

std::vector<std::string> set_difference_ordered(const std::vector<std::string>& a,
                                                const std::vector<std::string>& b)
{
    std::vector<std::string> out;
    for (const auto& x : a)
        if (std::find(b.begin(), b.end(), x) == b.end()) out.push_back(x);
    return out;
}

bool is_cc_rate(const std::string& d) { return d == "C/5" || d == "C/2" || d == "1C"; }
bool is_dynamic(const std::string& d) { return d == "P" || d == "DST"; }

} // namespace

LevelReport level_reports(const RmseMatrix& matrix,
                          const std::vector<std::vector<std::string>>& scenario_members, int k)
{
    if (matrix.n_cases() == 0 || matrix.n_scenarios() == 0)
        throw std::invalid_argument("level_reports: empty matrix");
    if (scenario_members.size() != matrix.n_scenarios())
        throw std::invalid_argument("level_reports: member list does not match scenario count");
    k = std::min(k, static_cast<int>(matrix.n_cases()));

    LevelReport rep;
    rep.global_min = {0, 0, std::numeric_limits<double>::infinity()};
    rep.diagonal_min = {0, 0, std::numeric_limits<double>::infinity()};

    for (std::size_t i = 0; i < matrix.n_cases(); ++i)
        for (std::size_t j = 0; j < matrix.n_scenarios(); ++j) {
            if (matrix.flagged[i][j]) continue;
            const double v = matrix.values[i][j];
            if (v < rep.global_min.value)
                rep.global_min = {matrix.case_ids[i], matrix.scenario_ids[j], v};
            if (matrix.case_ids[i] == matrix.scenario_ids[j] && v < rep.diagonal_min.value)
                rep.diagonal_min = {matrix.case_ids[i], matrix.scenario_ids[j], v};
        }

    for (std::size_t j = 0; j < matrix.n_scenarios(); ++j) {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < matrix.n_cases(); ++i)
            if (!matrix.flagged[i][j]) order.push_back(i);
        if (order.empty())
            throw std::invalid_argument("level_reports: scenario column " +
                                        std::to_string(matrix.scenario_ids[j]) +
                                        " has no valid entries");
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (matrix.values[a][j] != matrix.values[b][j])
                return matrix.values[a][j] < matrix.values[b][j];
            return matrix.case_ids[a] < matrix.case_ids[b];
        });

        rep.column_min.push_back(
            {matrix.case_ids[order.front()], matrix.scenario_ids[j], matrix.values[order.front()][j]});
        std::vector<LevelReport::Entry> smallest;
        for (int r = 0; r < k && r < static_cast<int>(order.size()); ++r)
            smallest.push_back({matrix.case_ids[order[static_cast<std::size_t>(r)]],
                                matrix.scenario_ids[j],
                                matrix.values[order[static_cast<std::size_t>(r)]][j]});
        rep.column_smallest.push_back(std::move(smallest));
        rep.column_max.push_back(
            {matrix.case_ids[order.back()], matrix.scenario_ids[j], matrix.values[order.back()][j]});

        // Dataset diff between the scenario's own members and the members of
        // the case minimizing its column. A swap is one member out and one in
        // within the same category (CC rate <-> CC rate, dynamic <-> dynamic).
        LevelReport::DatasetDiff diff;
        diff.scenario_id = matrix.scenario_ids[j];
        diff.min_case_id = matrix.case_ids[order.front()];
        const auto& ideal = scenario_members[j];
        // The minimizing case's member set: find it by its id in the scenario
        // member table (case ids and scenario ids share the table numbering).
        const std::vector<std::string>* min_members = nullptr;
        for (std::size_t q = 0; q < matrix.n_scenarios(); ++q)
            if (matrix.scenario_ids[q] == diff.min_case_id) min_members = &scenario_members[q];
        if (min_members == nullptr) {
            // Case id outside the scenario table: report raw sets only.
            diff.identical = false;
            rep.dataset_diffs.push_back(std::move(diff));
            continue;
        }
        auto added = set_difference_ordered(*min_members, ideal);
        auto excluded = set_difference_ordered(ideal, *min_members);
        if (added.size() == 1 && excluded.size() == 1 &&
            ((is_cc_rate(added[0]) && is_cc_rate(excluded[0])) ||
             (is_dynamic(added[0]) && is_dynamic(excluded[0])))) {
            diff.swapped.emplace_back(excluded[0], added[0]);
        } else {
            diff.added = std::move(added);
            diff.excluded = std::move(excluded);
        }
        diff.identical = diff.added.empty() && diff.excluded.empty() && diff.swapped.empty();
        rep.dataset_diffs.push_back(std::move(diff));
    }
    return rep;
}

std::string LevelReport::to_json() const
{
    nlohmann::ordered_json j;
    auto entry = [](const Entry& e) {
        return nlohmann::ordered_json{
            {"case_id", e.case_id}, {"scenario_id", e.scenario_id}, {"rmse_v", e.value}};
    };
    j["l1_global_min"] = entry(global_min);
    j["l2_diagonal_min"] = entry(diagonal_min);
    j["l3_column_min"] = nlohmann::ordered_json::array();
    for (const auto& e : column_min) j["l3_column_min"].push_back(entry(e));
    j["l4_column_smallest"] = nlohmann::ordered_json::array();
    for (const auto& col : column_smallest) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& e : col) arr.push_back(entry(e));
        j["l4_column_smallest"].push_back(arr);
    }
    j["l5_column_max"] = nlohmann::ordered_json::array();
    for (const auto& e : column_max) j["l5_column_max"].push_back(entry(e));
    j["dataset_diffs"] = nlohmann::ordered_json::array();
    for (const auto& d : dataset_diffs) {
        nlohmann::ordered_json swaps = nlohmann::ordered_json::array();
        for (const auto& s : d.swapped) swaps.push_back({{"removed", s.first}, {"added", s.second}});
        j["dataset_diffs"].push_back({{"scenario_id", d.scenario_id},
                                      {"min_case_id", d.min_case_id},
                                      {"added", d.added},
                                      {"excluded", d.excluded},
                                      {"swapped", swaps},
                                      {"identical", d.identical}});
    }
    // Swap classification is a reporting convention of this tool, flagged so
    // downstream consumers do not over-read it.
    j["notes"] = "swaps are reported only for one-out/one-in changes within the same "
                 "protocol category (CC rate or dynamic)";
    return j.dump(2);
}

} // namespace spmfit
