#pragma once

#include <string>
#include <variant>
#include <vector>

#include "spmfit/spm_model.hpp"
#include "spmfit/time_series.hpp"

namespace spmfit {

/// CCCV discharge-charge cycle: CC discharge to v_min, CV hold, CC charge to
/// v_max, CV hold. Starts and ends fully charged.
struct CccvCycle {
    double c_rate;
};

/// Alternating discharge pulses and rests down to v_min, then mirrored charge
/// pulses up to v_max with a CV top-off. Starts and ends fully charged.
struct PulseCycle {
    double pulse_c_rate = 1.0 / 3.0;
    double on_s = 570.0;   // 9.5 min
    double off_s = 2100.0; // 35 min
};

/// Multi-rate signed schedule repeated from full charge until v_min or the
/// negative electrode runs empty. Ends discharged.
struct DstSchedule {
    struct Step {
        double c_rate;      // > 0 discharge, < 0 charge, 0 rest
        double duration_s;
    };
    std::vector<Step> steps;
};

struct ProfileSpec {
    std::variant<CccvCycle, PulseCycle, DstSchedule> variant;
    std::string designation;  // "C/5", "C/2", "1C", "P", "DST"

    void validate() const;
};

/// The five base protocols with their default parameters.
ProfileSpec base_profile(const std::string& designation);
DstSchedule default_dst_schedule();

struct CyclerLimits {
    double v_max = 4.2;
    double v_min = 2.5;
    double cv_cutoff_a = 0.050;
    double nominal_capacity_ah = 2.9;
    double cv_gain = 10.0;              // proportional gain, A per V of error
    double cv_rate_limit_a = 1.0;       // max current change per controller tick
    int cv_ticks_per_sample = 16;       // controller updates per output sample
    double max_duration_s = 200000.0;   // safety cap per protocol run

    void validate() const;

    double current_at(double c_rate) const { return c_rate * nominal_capacity_ah; }
};

/// Runs one protocol closed-loop against the model from the fully charged
/// state and returns the sampled series. Owns its own solver instance.
TimeSeries run_protocol(const ProfileSpec& spec, const ModelContext& ctx,
                        const CyclerLimits& limits);

/// ProfileSpec flavour of spmfit::simulate: generating a protocol is just a
/// closed-loop simulation, so this forwards to run_protocol.
inline TimeSeries simulate(const ProfileSpec& spec, const ModelContext& ctx,
                           const CyclerLimits& limits)
{
    return run_protocol(spec, ctx, limits);
}

/// Mean absolute current expressed as a C-rate on the given capacity.
double equivalent_c_rate(const TimeSeries& series, double capacity_ah);

/// Time-shifted concatenation. At most one DST series and it must come last;
/// joints must be SOC-continuous within 1% when endpoint metadata is present.
TimeSeries concat_profiles(const std::vector<TimeSeries>& series_list);

} // namespace spmfit
