#include "spmfit/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spmfit/errors.hpp"

namespace spmfit {

namespace {

void validate_points(const std::string& name, const std::vector<OcpCurve::Point>& pts)
{
    if (pts.size() < 4)
        throw std::invalid_argument("OcpCurve '" + name + "': needs at least 4 points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        if (!(p.stoichiometry >= 0.0 && p.stoichiometry <= 1.0))
            throw std::invalid_argument("OcpCurve '" + name + "': stoichiometry " +
                                        std::to_string(p.stoichiometry) + " outside [0,1]");
        if (!std::isfinite(p.potential_v))
            throw std::invalid_argument("OcpCurve '" + name + "': non-finite potential");
        if (i > 0) {
            if (!(p.stoichiometry > pts[i - 1].stoichiometry))
                throw std::invalid_argument("OcpCurve '" + name +
                                            "': stoichiometries must be strictly increasing");
            if (!(p.potential_v < pts[i - 1].potential_v))
                throw std::invalid_argument("OcpCurve '" + name +
                                            "': potential must be strictly decreasing");
        }
    }
}

// Graphite half-cell fit (exponential low-x wall plus tanh plateaus).
double graphite_fit(double x)
{
    return 0.6379 + 0.5416 * std::exp(-305.5309 * x) +
           0.044 * std::tanh(-(x - 0.1958) / 0.1088) -
           0.1978 * std::tanh((x - 1.0571) / 0.0854) -
           0.6875 * std::tanh((x + 0.0117) / 0.0529) -
           0.0175 * std::tanh((x - 0.5692) / 0.0875);
}

// Layered-oxide half-cell fit: quintic backbone, a mild low-y exponential
// shoulder and an exponential high-y knee. The knee location sets the usable
// capacity window of the reference cell; the constant term is tuned so the
// reference charged state rests just below the 4.2 V charge limit.
constexpr double kNmcConstant = 4.23893;
constexpr double kNmcKneeSlope = 85.0;
constexpr double kNmcKneeCenter = 0.9120;

double nmc_fit(double y)
{
    const double y2 = y * y;
    const double y3 = y2 * y;
    const double y4 = y3 * y;
    const double y5 = y4 * y;
    return kNmcConstant - 1.6518 * y + 1.6225 * y2 - 2.0843 * y3 + 3.5146 * y4 -
           2.2166 * y5 + 0.08 * std::exp(-25.0 * y) -
           std::exp(kNmcKneeSlope * (y - kNmcKneeCenter));
}

// Sampling grid: dense near both edges and in a focus band so the
// piecewise-linear table tracks the steep regions to sub-millivolt error.
std::vector<double> sample_grid(double lo, double hi, double focus_lo, double focus_hi)
{
    std::vector<double> xs;
    auto push_range = [&xs, lo, hi](double a, double b, double step) {
        for (double x = a; x < b - 1e-12; x += step)
            if (x >= lo && x <= hi) xs.push_back(x);
    };
    push_range(lo, lo + 0.02, 0.0005);
    push_range(lo + 0.02, hi - 0.02, 0.004);
    push_range(focus_lo, focus_hi, 0.0005);
    push_range(hi - 0.02, hi, 0.0005);
    xs.push_back(hi);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double a, double b) { return b - a < 2.5e-4; }),
             xs.end());
    if (xs.back() < hi) xs.push_back(hi);
    return xs;
}

std::vector<OcpCurve::Point> tabulate(double (*fit)(double), double lo, double hi,
                                      double focus_lo, double focus_hi)
{
    std::vector<OcpCurve::Point> pts;
    for (double x : sample_grid(lo, hi, focus_lo, focus_hi)) pts.push_back({x, fit(x)});
    return pts;
}

} // namespace

OcpCurve::OcpCurve(std::string name, std::vector<Point> points)
    : name_(std::move(name)), points_(std::move(points))
{
    validate_points(name_, points_);
}

double OcpCurve::evaluate(double stoichiometry) const
{
    if (!(stoichiometry >= points_.front().stoichiometry &&
          stoichiometry <= points_.back().stoichiometry))
        throw OcpDomainError(name_, stoichiometry);
    auto it = std::upper_bound(points_.begin(), points_.end(), stoichiometry,
                               [](double v, const Point& p) { return v < p.stoichiometry; });
    if (it == points_.end()) return points_.back().potential_v;
    if (it == points_.begin()) return points_.front().potential_v;
    const Point& hi = *it;
    const Point& lo = *(it - 1);
    const double w = (stoichiometry - lo.stoichiometry) / (hi.stoichiometry - lo.stoichiometry);
    return lo.potential_v + w * (hi.potential_v - lo.potential_v);
}

OcpCurve OcpCurve::load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("OcpCurve: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("OcpCurve: empty file '" + path + "'");
    if (line.find("stoichiometry") == std::string::npos)
        throw std::invalid_argument("OcpCurve: '" + path +
                                    "' missing `stoichiometry,potential_v` header");
    std::vector<Point> pts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw std::invalid_argument("OcpCurve: malformed row '" + line + "' in " + path);
        pts.push_back({std::stod(a), std::stod(b)});
    }
    return OcpCurve(path, std::move(pts));
}

void OcpCurve::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("OcpCurve: cannot write '" + path + "'");
    out << "stoichiometry,potential_v\n";
    char buf[80];
    for (const auto& p : points_) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.stoichiometry, p.potential_v);
        out << buf;
    }
}

OcpCurve OcpCurve::default_graphite()
{
    return OcpCurve("graphite-default", tabulate(graphite_fit, 0.0005, 0.9995, 0.10, 0.30));
}

OcpCurve OcpCurve::default_nmc()
{
    // Table stops at 0.945: past the knee the fit has no physical meaning and
    // the cycler's voltage limits keep operation well inside.
    return OcpCurve("nmc-default", tabulate(nmc_fit, 0.0005, 0.945, 0.86, 0.945));
}

} // namespace spmfit
