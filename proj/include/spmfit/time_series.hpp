#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace spmfit {

/// Sampled (time, current, voltage) record of one protocol run or a
/// concatenation of several. Sign convention: current > 0 is discharge.
struct TimeSeries {
    struct Sample {
        double time_s;
        double current_a;
        double voltage_v;
    };

    /// Labeled boundary. `base_start` marks the first sample of an
    /// independent base-protocol run inside a concatenated series; model
    /// replays re-initialize their state there.
    struct SegmentMark {
        std::size_t row;
        std::string label;
        bool base_start = false;
    };

    /// Per-electrode bulk stoichiometry bookkeeping, filled in by the
    /// cycler so concatenation can check state continuity at joints.
    struct Endpoints {
        double start_soc_neg;
        double start_soc_pos;
        double end_soc_neg;
        double end_soc_pos;
    };

    std::vector<Sample> rows;
    std::vector<SegmentMark> segment_marks;
    std::optional<Endpoints> endpoints;
    std::string designation;      // e.g. "C/5", "1C", "P", "DST", or a composite label
    bool degenerate = false;      // protocol could not run (e.g. rest voltage below v_min)

    bool empty() const { return rows.empty(); }
    std::size_t size() const { return rows.size(); }

    double duration_s() const
    {
        return rows.empty() ? 0.0 : rows.back().time_s - rows.front().time_s;
    }
    double duration_h() const { return duration_s() / 3600.0; }

    void validate() const;  // strictly increasing time, finite values

    /// CSV with header `time_s,current_a,voltage_v`, >= 9 significant digits.
    void write_csv(const std::string& path) const;
    static TimeSeries read_csv(const std::string& path);

    /// Segment marks and metadata travel in a JSON sidecar next to the CSV.
    void write_sidecar(const std::string& path) const;
    void read_sidecar(const std::string& path);

    static std::string sidecar_path(const std::string& csv_path);
};

} // namespace spmfit
