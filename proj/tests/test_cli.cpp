#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spmfit/campaign.hpp"
#include "spmfit/config.hpp"

#include <json.hpp>

using namespace spmfit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("spmfit_test_" + tag))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

ExperimentConfig small_config(const std::string& out)
{
    ExperimentConfig cfg = ExperimentConfig::defaults();
    cfg.output_dir = out;
    cfg.scenarios = {29, 31};
    cfg.cases = {29};
    cfg.workers = 2;
    return cfg;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("id list parsing")
    {
        CHECK(parse_id_list("1,4,7-9") == std::vector<int>{1, 4, 7, 8, 9});
        CHECK(parse_id_list("29") == std::vector<int>{29});
        CHECK_THROWS_AS(parse_id_list("9-7"), std::invalid_argument);
        CHECK_THROWS_AS(parse_id_list(""), std::invalid_argument);
    }

    TEST_CASE("config json round trip")
    {
        const TempDir dir("cfg");
        ExperimentConfig cfg = ExperimentConfig::defaults();
        cfg.swarm.rng_seed = 97;
        cfg.cases = {1, 2, 3};
        const std::string path = (dir.path / "config.json").string();
        cfg.save(path);
        const ExperimentConfig back = ExperimentConfig::load(path);
        CHECK(back.to_json() == cfg.to_json());
    }

    TEST_CASE("config validation rejects bad ids and empty subsets")
    {
        ExperimentConfig cfg = ExperimentConfig::defaults();
        cfg.cases = {77};
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = ExperimentConfig::defaults();
        cfg.scenarios.clear();
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = ExperimentConfig::defaults();
        cfg.workers = 0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }

    TEST_CASE("malformed config file reports a helpful error")
    {
        const TempDir dir("badcfg");
        const std::string path = (dir.path / "bad.json").string();
        std::ofstream(path) << "{ not json";
        CHECK_THROWS_AS(ExperimentConfig::load(path), std::invalid_argument);
        CHECK_THROWS_AS(ExperimentConfig::load((dir.path / "absent.json").string()),
                        std::invalid_argument);
    }

    TEST_CASE("synth writes a manifest and is checksum-deterministic")
    {
        const TempDir dir("synth");
        const ExperimentConfig cfg = small_config((dir.path / "out").string());
        campaign::run_synth(cfg);

        std::ifstream in(campaign::manifest_path(cfg.output_dir));
        REQUIRE(in.good());
        nlohmann::json manifest;
        in >> manifest;
        CHECK(manifest.at("bases").size() == 5);
        CHECK(manifest.at("scenarios").size() == 2);

        // Re-running must reproduce byte-identical datasets.
        std::vector<std::string> first;
        for (const auto& b : manifest.at("bases"))
            first.push_back(b.at("checksum").get<std::string>());
        campaign::run_synth(cfg);
        std::ifstream in2(campaign::manifest_path(cfg.output_dir));
        nlohmann::json manifest2;
        in2 >> manifest2;
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(manifest2.at("bases")[i].at("checksum").get<std::string>() == first[i]);
    }

    TEST_CASE("a seeded estimate re-run reproduces the parameters bit for bit")
    {
        const TempDir dir("estdet");
        ExperimentConfig cfg = small_config((dir.path / "out").string());
        cfg.swarm.n_particles = 8;
        cfg.swarm.n_iterations = 8;
        campaign::run_synth(cfg);

        auto read_theta = [&]() {
            std::ifstream in(campaign::case_json_path(cfg.output_dir, 29));
            nlohmann::json j;
            in >> j;
            return j.at("theta_star").dump() + "|" + j.at("best_fitness").dump();
        };
        campaign::run_estimate(cfg, {29});
        const std::string first = read_theta();
        campaign::run_estimate(cfg, {29});
        CHECK(read_theta() == first);
    }

    TEST_CASE("estimate fails with a missing-dataset message before synth ran")
    {
        const TempDir dir("noest");
        const ExperimentConfig cfg = small_config((dir.path / "out").string());
        try {
            campaign::run_estimate(cfg, {29});
            FAIL("expected an error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("missing") != std::string::npos);
        }
    }

    TEST_CASE("analyze from a metrics csv emits the cost table and optima")
    {
        const TempDir dir("analyze");
        ExperimentConfig cfg = ExperimentConfig::defaults();
        cfg.output_dir = (dir.path / "out").string();
        const std::string metrics = std::string(SPMFIT_DATA_DIR) + "/reference_metrics.csv";
        campaign::run_analyze(cfg, metrics);
        CHECK(fs::exists(campaign::cost_csv_path(cfg.output_dir)));
        CHECK(fs::exists(campaign::optima_json_path(cfg.output_dir)));

        std::ostringstream report;
        campaign::run_report(cfg, report);
        CHECK(report.str().find("Optimal case per objective") != std::string::npos);
    }

    TEST_CASE("shipped default config matches the built-in defaults")
    {
        const std::string path = std::string(SPMFIT_DATA_DIR) + "/default_config.json";
        REQUIRE(fs::exists(path));
        const ExperimentConfig shipped = ExperimentConfig::load(path);
        CHECK(shipped.to_json() == ExperimentConfig::defaults().to_json());
    }

    TEST_CASE("metrics csv loader enforces its header")
    {
        const TempDir dir("badmetrics");
        const std::string path = (dir.path / "m.csv").string();
        std::ofstream(path) << "id,a,b,c\n1,2,3,4\n";
        CHECK_THROWS_AS(campaign::read_metrics_csv(path), std::runtime_error);
    }
}
