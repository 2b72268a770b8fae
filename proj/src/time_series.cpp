#include "spmfit/time_series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace spmfit {

void TimeSeries::validate() const
{
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!std::isfinite(r.time_s) || !std::isfinite(r.current_a) || !std::isfinite(r.voltage_v))
            throw std::invalid_argument("TimeSeries: non-finite value at row " + std::to_string(i));
        if (i > 0 && !(r.time_s > rows[i - 1].time_s))
            throw std::invalid_argument("TimeSeries: time not strictly increasing at row " +
                                        std::to_string(i));
    }
    for (const auto& m : segment_marks)
        if (m.row >= rows.size())
            throw std::invalid_argument("TimeSeries: segment mark past end of data");
}

void TimeSeries::write_csv(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TimeSeries: cannot write '" + path + "'");
    out << "time_s,current_a,voltage_v\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", r.time_s, r.current_a, r.voltage_v);
        out << buf;
    }
    if (!out) throw std::runtime_error("TimeSeries: write failed for '" + path + "'");
}

TimeSeries TimeSeries::read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TimeSeries: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,current_a,voltage_v", 0) != 0)
        throw std::runtime_error("TimeSeries: '" + path + "' missing expected header");
    TimeSeries ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw std::runtime_error("TimeSeries: malformed row '" + line + "' in " + path);
        ts.rows.push_back({std::stod(a), std::stod(b), std::stod(c)});
    }
    ts.validate();
    return ts;
}

void TimeSeries::write_sidecar(const std::string& path) const
{
    nlohmann::ordered_json j;
    j["designation"] = designation;
    j["degenerate"] = degenerate;
    j["segments"] = nlohmann::ordered_json::array();
    for (const auto& m : segment_marks)
        j["segments"].push_back({{"row", m.row}, {"label", m.label}, {"base_start", m.base_start}});
    if (endpoints) {
        j["endpoints"] = {{"start_soc_neg", endpoints->start_soc_neg},
                          {"start_soc_pos", endpoints->start_soc_pos},
                          {"end_soc_neg", endpoints->end_soc_neg},
                          {"end_soc_pos", endpoints->end_soc_pos}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("TimeSeries: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

void TimeSeries::read_sidecar(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("TimeSeries: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;
    designation = j.value("designation", std::string{});
    degenerate = j.value("degenerate", false);
    segment_marks.clear();
    for (const auto& m : j.value("segments", nlohmann::json::array()))
        segment_marks.push_back(
            {m.at("row").get<std::size_t>(), m.at("label").get<std::string>(),
             m.value("base_start", false)});
    if (j.contains("endpoints")) {
        const auto& e = j["endpoints"];
        endpoints = Endpoints{e.at("start_soc_neg").get<double>(),
                              e.at("start_soc_pos").get<double>(),
                              e.at("end_soc_neg").get<double>(),
                              e.at("end_soc_pos").get<double>()};
    }
    validate();
}

std::string TimeSeries::sidecar_path(const std::string& csv_path)
{
    auto dot = csv_path.rfind(".csv");
    if (dot == csv_path.size() - 4) return csv_path.substr(0, dot) + ".segments.json";
    return csv_path + ".segments.json";
}

} // namespace spmfit
