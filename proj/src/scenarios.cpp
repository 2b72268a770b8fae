#include "spmfit/scenarios.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

namespace spmfit {

bool Scenario::contains(const std::string& designation) const
{
    return std::find(members.begin(), members.end(), designation) != members.end();
}

std::string Scenario::label() const
{
    std::string s;
    for (const auto& m : members) {
        if (!s.empty()) s += "+";
        s += m;
    }
    return s;
}

namespace {

// Member sets in table order. Ids are hard-coded so every report cites the
// same numbering; they are not re-derived from a combinatorial scheme.
const std::vector<std::vector<std::string>>& member_table()
{
    static const std::vector<std::vector<std::string>> t = {
        {"C/5", "C/2", "1C", "P", "DST"},  // 1
        {"C/5", "C/2", "1C", "P"},         // 2
        {"C/5", "C/2", "1C", "DST"},       // 3
        {"C/5", "C/2", "P", "DST"},        // 4
        {"C/5", "1C", "P", "DST"},         // 5
        {"C/2", "1C", "P", "DST"},         // 6
        {"C/5", "C/2", "1C"},              // 7
        {"C/5", "C/2", "P"},               // 8
        {"C/5", "C/2", "DST"},             // 9
        {"C/5", "1C", "P"},                // 10
        {"C/5", "1C", "DST"},              // 11
        {"C/5", "P", "DST"},               // 12
        {"C/2", "1C", "P"},                // 13
        {"C/2", "1C", "DST"},              // 14
        {"C/2", "P", "DST"},               // 15
        {"1C", "P", "DST"},                // 16
        {"C/5", "C/2"},                    // 17
        {"C/5", "1C"},                     // 18
        {"C/5", "P"},                      // 19
        {"C/5", "DST"},                    // 20
        {"C/2", "1C"},                     // 21
        {"C/2", "P"},                      // 22
        {"C/2", "DST"},                    // 23
        {"1C", "P"},                       // 24
        {"1C", "DST"},                     // 25
        {"P", "DST"},                      // 26
        {"C/5"},                           // 27
        {"C/2"},                           // 28
        {"1C"},                            // 29
        {"P"},                             // 30
        {"DST"},                           // 31
    };
    return t;
}

} // namespace

std::vector<Scenario> enumerate_scenarios(const std::map<std::string, double>& base_durations)
{
    for (const char* d : {"C/5", "C/2", "1C", "P", "DST"})
        if (!base_durations.count(d))
            throw std::invalid_argument(std::string("enumerate_scenarios: missing duration for ") +
                                        d);
    std::vector<Scenario> out;
    out.reserve(31);
    int id = 1;
    for (const auto& members : member_table()) {
        double dur = 0.0;
        for (const auto& m : members) dur += base_durations.at(m);
        out.push_back({id++, members, dur});
    }
    return out;
}

BaseSeriesCache::BaseSeriesCache(const ModelContext& ctx, const CyclerLimits& limits,
                                 const PulseCycle& pulse, const DstSchedule& dst)
    : ctx_(ctx), limits_(limits), pulse_(pulse), dst_(dst)
{
}

const TimeSeries& BaseSeriesCache::get(const std::string& designation)
{
    auto it = cache_.find(designation);
    if (it == cache_.end()) {
        ProfileSpec spec = base_profile(designation);
        if (designation == "P") spec.variant = pulse_;
        if (designation == "DST") spec.variant = dst_;
        it = cache_.emplace(designation, run_protocol(spec, ctx_, limits_)).first;
    }
    return it->second;
}

std::map<std::string, double> BaseSeriesCache::measured_durations_h()
{
    std::map<std::string, double> d;
    for (const char* m : {"C/5", "C/2", "1C", "P", "DST"}) d[m] = get(m).duration_h();
    return d;
}

TimeSeries build_dataset(const Scenario& scenario, BaseSeriesCache& cache)
{
    if (scenario.members.empty())
        throw std::invalid_argument("build_dataset: scenario has no members");
    std::vector<TimeSeries> parts;
    parts.reserve(scenario.members.size());
    for (const auto& m : scenario.members) parts.push_back(cache.get(m));
    return concat_profiles(parts);
}

std::string scenarios_to_json(const std::vector<Scenario>& scenarios)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& s : scenarios)
        j.push_back({{"id", s.id}, {"members", s.members}, {"duration_h", s.duration_h}});
    return j.dump(2);
}

} // namespace spmfit
