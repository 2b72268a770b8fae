#pragma once

#include <map>
#include <string>
#include <vector>

#include "spmfit/protocols.hpp"

namespace spmfit {

/// One of the 31 protocol combinations. Members are kept in canonical order:
/// CCCV profiles by ascending rate, then P, then DST last.
struct Scenario {
    int id;                            // 1..31
    std::vector<std::string> members;  // subset of {"C/5","C/2","1C","P","DST"}
    double duration_h;                 // sum of member base durations

    bool contains(const std::string& designation) const;
    std::string label() const;         // e.g. "C/2+1C"
};

/// The full 31-row combination table: size-descending blocks (5,4,3,2,1
/// members) with the fixed within-block ordering. Ids are stable.
/// `base_durations` maps each of the five designations to its duration in
/// hours; every scenario's duration is the exact sum over its members.
std::vector<Scenario> enumerate_scenarios(const std::map<std::string, double>& base_durations);

/// Cache of the five simulated base series so each protocol runs once per
/// campaign no matter how many scenarios reference it. Pulse and DST
/// definitions default to the shipped ones but can be overridden.
class BaseSeriesCache {
public:
    BaseSeriesCache(const ModelContext& ctx, const CyclerLimits& limits,
                    const PulseCycle& pulse = PulseCycle{},
                    const DstSchedule& dst = default_dst_schedule());

    const TimeSeries& get(const std::string& designation);
    std::map<std::string, double> measured_durations_h();

private:
    ModelContext ctx_;
    CyclerLimits limits_;
    PulseCycle pulse_;
    DstSchedule dst_;
    std::map<std::string, TimeSeries> cache_;
};

/// Builds the scenario's dataset by concatenating its members' base series.
TimeSeries build_dataset(const Scenario& scenario, BaseSeriesCache& cache);

/// JSON export of the scenario listing (id, members, duration_h).
std::string scenarios_to_json(const std::vector<Scenario>& scenarios);

} // namespace spmfit
