#include <doctest.h>

#include <map>

#include "spmfit/config.hpp"
#include "spmfit/scenarios.hpp"

using namespace spmfit;

namespace {

std::map<std::string, double> table_durations()
{
    return {{"C/5", 10.1}, {"C/2", 4.4}, {"1C", 2.7}, {"P", 29.1}, {"DST", 4.0}};
}

} // namespace

TEST_SUITE("scenarios")
{
    TEST_CASE("thirty-one scenarios with the published member sets and durations")
    {
        const auto scenarios = enumerate_scenarios(table_durations());
        REQUIRE(scenarios.size() == 31);
        for (int i = 0; i < 31; ++i) CHECK(scenarios[i].id == i + 1);

        CHECK(scenarios[0].members == std::vector<std::string>{"C/5", "C/2", "1C", "P", "DST"});
        CHECK(scenarios[0].duration_h == doctest::Approx(50.3).epsilon(1e-12));
        CHECK(scenarios[13].members == std::vector<std::string>{"C/2", "1C", "DST"});
        CHECK(scenarios[13].duration_h == doctest::Approx(11.1).epsilon(1e-12));
        CHECK(scenarios[20].members == std::vector<std::string>{"C/2", "1C"});
        CHECK(scenarios[20].duration_h == doctest::Approx(7.1).epsilon(1e-12));
        CHECK(scenarios[25].members == std::vector<std::string>{"P", "DST"});
        CHECK(scenarios[28].members == std::vector<std::string>{"1C"});
        CHECK(scenarios[30].members == std::vector<std::string>{"DST"});
    }

    TEST_CASE("DST is terminal wherever it appears")
    {
        for (const auto& s : enumerate_scenarios(table_durations()))
            for (std::size_t i = 0; i < s.members.size(); ++i)
                if (s.members[i] == "DST") CHECK(i + 1 == s.members.size());
    }

    TEST_CASE("every duration is the exact sum of member durations")
    {
        const auto durations = table_durations();
        for (const auto& s : enumerate_scenarios(durations)) {
            double sum = 0.0;
            for (const auto& m : s.members) sum += durations.at(m);
            CHECK(s.duration_h == sum);
        }
    }

    TEST_CASE("missing base duration is rejected")
    {
        auto d = table_durations();
        d.erase("P");
        CHECK_THROWS_AS(enumerate_scenarios(d), std::invalid_argument);
    }

    TEST_CASE("json export carries id, members and duration")
    {
        const auto scenarios = enumerate_scenarios(table_durations());
        const std::string j = scenarios_to_json(scenarios);
        CHECK(j.find("\"id\": 21") != std::string::npos);
        CHECK(j.find("\"duration_h\": 7.1") != std::string::npos);
    }

    TEST_CASE("single-member dataset is the base series itself")
    {
        const auto ctx = ExperimentConfig::defaults().model_context();
        const CyclerLimits limits;
        BaseSeriesCache cache(ctx, limits);
        const auto scenarios = enumerate_scenarios(cache.measured_durations_h());

        const TimeSeries& one_c = cache.get("1C");
        const TimeSeries ds29 = build_dataset(scenarios[28], cache);
        REQUIRE(ds29.size() == one_c.size());
        for (std::size_t k = 0; k < ds29.size(); ++k)
            CHECK(ds29.rows[k].voltage_v == one_c.rows[k].voltage_v);

        // Scenario 26 = P then DST, with DST as the final base segment.
        const TimeSeries ds26 = build_dataset(scenarios[25], cache);
        std::vector<std::string> bases;
        for (const auto& m : ds26.segment_marks)
            if (m.base_start) bases.push_back(m.label);
        REQUIRE(bases.size() == 2);
        CHECK(bases[0] == "base:P");
        CHECK(bases[1] == "base:DST");
    }
}
