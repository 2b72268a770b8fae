#pragma once

#include <string>
#include <vector>

namespace spmfit {

/// Tabulated open-circuit potential of one electrode vs Li/Li+.
/// Knots are strictly increasing in stoichiometry with strictly decreasing
/// potential; evaluation is piecewise linear with no extrapolation.
class OcpCurve {
public:
    struct Point {
        double stoichiometry;
        double potential_v;
    };

    OcpCurve(std::string name, std::vector<Point> points);

    /// Piecewise-linear interpolation. Throws OcpDomainError outside the
    /// tabulated range.
    double evaluate(double stoichiometry) const;

    double min_stoichiometry() const { return points_.front().stoichiometry; }
    double max_stoichiometry() const { return points_.back().stoichiometry; }
    const std::string& name() const { return name_; }
    const std::vector<Point>& points() const { return points_; }

    /// Parses a two-column CSV (`stoichiometry,potential_v`) and validates it.
    static OcpCurve load_csv(const std::string& path);
    void write_csv(const std::string& path) const;

    /// Built-in defaults, dense tables from standard half-cell fit forms
    /// tuned to this project's reference cell. Not measured data.
    static OcpCurve default_graphite();
    static OcpCurve default_nmc();

private:
    std::string name_;
    std::vector<Point> points_;
};

struct OcpPair {
    OcpCurve negative;
    OcpCurve positive;

    static OcpPair defaults()
    {
        return {OcpCurve::default_graphite(), OcpCurve::default_nmc()};
    }
};

} // namespace spmfit
