#include <doctest.h>

#include <cstdio>
#include <algorithm>
#include <filesystem>

#include "spmfit/errors.hpp"
#include "spmfit/ocp.hpp"

using namespace spmfit;

TEST_SUITE("ocp")
{
    TEST_CASE("accepts a small decreasing table")
    {
        OcpCurve c("t", {{0.0, 1.5}, {0.3, 1.2}, {0.6, 0.9}, {1.0, 0.2}});
        CHECK(c.min_stoichiometry() == 0.0);
        CHECK(c.max_stoichiometry() == 1.0);
    }

    TEST_CASE("rejects repeated stoichiometry")
    {
        CHECK_THROWS_AS(OcpCurve("t", {{0.0, 1.5}, {0.3, 1.2}, {0.3, 1.1}, {1.0, 0.2}}),
                        std::invalid_argument);
    }

    TEST_CASE("rejects increasing potential")
    {
        CHECK_THROWS_AS(OcpCurve("t", {{0.0, 1.5}, {0.3, 1.2}, {0.6, 1.3}, {1.0, 0.2}}),
                        std::invalid_argument);
    }

    TEST_CASE("rejects fewer than four points")
    {
        CHECK_THROWS_AS(OcpCurve("t", {{0.0, 1.5}, {1.0, 0.2}}), std::invalid_argument);
    }

    TEST_CASE("evaluate reproduces knots and midpoints")
    {
        OcpCurve c("t", {{0.0, 1.5}, {0.4, 1.1}, {0.8, 0.7}, {1.0, 0.2}});
        CHECK(c.evaluate(0.4) == doctest::Approx(1.1).epsilon(1e-15));
        CHECK(c.evaluate(0.2) == doctest::Approx((1.5 + 1.1) / 2).epsilon(1e-12));
        CHECK(c.evaluate(0.9) == doctest::Approx((0.7 + 0.2) / 2).epsilon(1e-12));
    }

    TEST_CASE("no extrapolation outside the table")
    {
        OcpCurve c("t", {{0.1, 1.5}, {0.4, 1.1}, {0.8, 0.7}, {0.9, 0.2}});
        CHECK_THROWS_AS(c.evaluate(1.05), OcpDomainError);
        CHECK_THROWS_AS(c.evaluate(0.05), OcpDomainError);
    }

    TEST_CASE("default curves are valid and monotone under dense sampling")
    {
        for (const OcpCurve& c : {OcpCurve::default_graphite(), OcpCurve::default_nmc()}) {
            const double lo = c.min_stoichiometry(), hi = c.max_stoichiometry();
            double prev = c.evaluate(lo);
            for (int k = 1; k <= 5000; ++k) {
                const double x = std::min(lo + (hi - lo) * k / 5000.0, hi);
                const double u = c.evaluate(x);
                CHECK(u < prev);
                prev = u;
            }
        }
    }

    TEST_CASE("shipped CSV tables match the built-in curves")
    {
        const std::string dir = SPMFIT_DATA_DIR;
        struct Pair {
            OcpCurve curve;
            std::string file;
        };
        const Pair pairs[] = {{OcpCurve::default_graphite(), dir + "/ocp_graphite_default.csv"},
                              {OcpCurve::default_nmc(), dir + "/ocp_nmc_default.csv"}};
        for (const auto& p : pairs) {
            REQUIRE(std::filesystem::exists(p.file));
            const OcpCurve loaded = OcpCurve::load_csv(p.file);
            REQUIRE(loaded.points().size() == p.curve.points().size());
            for (std::size_t i = 0; i < loaded.points().size(); ++i) {
                CHECK(loaded.points()[i].stoichiometry ==
                      doctest::Approx(p.curve.points()[i].stoichiometry).epsilon(1e-12));
                CHECK(loaded.points()[i].potential_v ==
                      doctest::Approx(p.curve.points()[i].potential_v).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("csv round trip")
    {
        const OcpCurve c = OcpCurve::default_graphite();
        const std::string path = "/tmp/spmfit_test_ocp_roundtrip.csv";
        c.write_csv(path);
        const OcpCurve back = OcpCurve::load_csv(path);
        CHECK(back.points().size() == c.points().size());
        CHECK(back.evaluate(0.5) == doctest::Approx(c.evaluate(0.5)).epsilon(1e-12));
        std::remove(path.c_str());
    }
}
