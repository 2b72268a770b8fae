#include "spmfit/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spmfit {

void ProfileSpec::validate() const
{
    if (std::holds_alternative<CccvCycle>(variant)) {
        if (!(std::get<CccvCycle>(variant).c_rate > 0.0))
            throw std::invalid_argument("CccvCycle: c_rate must be > 0");
    } else if (std::holds_alternative<PulseCycle>(variant)) {
        const auto& p = std::get<PulseCycle>(variant);
        if (!(p.pulse_c_rate > 0.0 && p.on_s > 0.0 && p.off_s > 0.0))
            throw std::invalid_argument("PulseCycle: c_rate, on_s, off_s must be > 0");
    } else {
        const auto& d = std::get<DstSchedule>(variant);
        if (d.steps.empty()) throw std::invalid_argument("DstSchedule: empty step table");
        for (const auto& s : d.steps)
            if (!(s.duration_s > 0.0))
                throw std::invalid_argument("DstSchedule: step durations must be > 0");
    }
}

void CyclerLimits::validate() const
{
    if (!(v_max > v_min)) throw std::invalid_argument("CyclerLimits: v_max must exceed v_min");
    if (!(cv_cutoff_a > 0.0)) throw std::invalid_argument("CyclerLimits: cv_cutoff_a must be > 0");
    if (!(nominal_capacity_ah > 0.0))
        throw std::invalid_argument("CyclerLimits: nominal_capacity_ah must be > 0");
    if (!(cv_gain > 0.0)) throw std::invalid_argument("CyclerLimits: cv_gain must be > 0");
    if (!(cv_rate_limit_a > 0.0))
        throw std::invalid_argument("CyclerLimits: cv_rate_limit_a must be > 0");
    if (cv_ticks_per_sample < 1)
        throw std::invalid_argument("CyclerLimits: cv_ticks_per_sample must be >= 1");
    if (!(max_duration_s > 0.0))
        throw std::invalid_argument("CyclerLimits: max_duration_s must be > 0");
}

DstSchedule default_dst_schedule()
{
    // One 360 s cycle drawn from the {2C, 1C, C/2, C/5} rate set. Mean |I| is
    // C/3.0 and the net drain empties the usable window in about four hours;
    // maximum discharge step 2C, maximum charge step 1C.
    return DstSchedule{{
        {0.2, 59.0},    // C/5 discharge
        {0.5, 60.0},    // C/2 discharge
        {1.0, 30.0},    // 1C discharge
        {-1.0, 12.0},   // 1C regen charge
        {2.0, 15.0},    // 2C peak discharge
        {-0.5, 12.0},   // C/2 regen charge
        {0.0, 172.0},   // rest
    }};
}

ProfileSpec base_profile(const std::string& designation)
{
    if (designation == "C/5") return {CccvCycle{0.2}, "C/5"};
    if (designation == "C/2") return {CccvCycle{0.5}, "C/2"};
    if (designation == "1C") return {CccvCycle{1.0}, "1C"};
    if (designation == "P") return {PulseCycle{}, "P"};
    if (designation == "DST") return {default_dst_schedule(), "DST"};
    throw std::invalid_argument("base_profile: unknown designation '" + designation + "'");
}

namespace {

/// Closed-loop driver shared by all protocol variants. Row k's current is
/// held over [t_k, t_{k+1}); when a phase switch lands on an existing sample
/// time the row is rewritten with the new current so the record matches what
/// the model actually integrated.
class Cycler {
public:
    Cycler(const ModelContext& ctx, const CyclerLimits& limits)
        : ctx_(ctx), limits_(limits), sim_(ctx.params, ctx.solver)
    {
        out_.endpoints = TimeSeries::Endpoints{0.0, 0.0, 0.0, 0.0};
        out_.endpoints->start_soc_neg = sim_.bulk_soc_neg();
        out_.endpoints->start_soc_pos = sim_.bulk_soc_pos();
    }

    TimeSeries finish()
    {
        out_.endpoints->end_soc_neg = sim_.bulk_soc_neg();
        out_.endpoints->end_soc_pos = sim_.bulk_soc_pos();
        return std::move(out_);
    }

    double voltage(double current_a) const
    {
        return sim_.voltage(current_a, ctx_.consts, ctx_.ocp);
    }

    void mark(const std::string& label)
    {
        out_.segment_marks.push_back({out_.rows.size(), label, false});
    }

    void record(double current_a)
    {
        const double v = voltage(current_a);
        if (!out_.rows.empty() && out_.rows.back().time_s >= time_ - 1e-9) {
            // Phase switch at an already-recorded instant: the new current is
            // the one applied from here on, so it owns the row.
            for (auto& m : out_.segment_marks)
                if (m.row == out_.rows.size()) m.row = out_.rows.size() - 1;
            out_.rows.back() = {time_, current_a, v};
            return;
        }
        out_.rows.push_back({time_, current_a, v});
    }

    void advance(double current_a, double dt)
    {
        if (time_ + dt > limits_.max_duration_s) throw ProtocolTimeoutError(limits_.max_duration_s);
        sim_.advance(current_a, dt);
        time_ += dt;
    }

    /// Constant current until the voltage crosses `v_limit` in the direction
    /// of `limit_dir` (+1: stop once V >= limit, -1: stop once V <= limit,
    /// 0: no voltage termination), or until `max_phase_s` elapses (0 =
    /// unlimited). Crossings are located by bisection so the final recorded
    /// sample sits on the limit. Returns true iff the voltage limit ended
    /// the phase.
    bool cc_phase(double current_a, double v_limit, int limit_dir, double max_phase_s)
    {
        const double dt = ctx_.solver.dt_output_s;
        const double t_phase_start = time_;
        if (limit_dir != 0 && crossed(voltage(current_a), v_limit, limit_dir))
            return true;  // cannot run at this current without breaching the limit
        record(current_a);
        while (true) {
            double dt_step = dt;
            bool last_in_phase = false;
            if (max_phase_s > 0.0) {
                const double remaining = max_phase_s - (time_ - t_phase_start);
                if (remaining <= dt + 1e-9) {
                    dt_step = remaining;
                    last_in_phase = true;
                }
            }
            const CellState saved = sim_.state();
            const double t_saved = time_;
            advance(current_a, dt_step);
            if (limit_dir != 0 && crossed(voltage(current_a), v_limit, limit_dir)) {
                double lo = 0.0, hi = dt_step;
                for (int it = 0; it < 60 && (hi - lo) > 1e-6; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    sim_.mutable_state() = saved;
                    time_ = t_saved;
                    advance(current_a, mid);
                    if (crossed(voltage(current_a), v_limit, limit_dir))
                        hi = mid;
                    else
                        lo = mid;
                }
                sim_.mutable_state() = saved;
                time_ = t_saved;
                advance(current_a, hi);
                record(current_a);
                return true;
            }
            record(current_a);
            if (last_in_phase) return false;
        }
    }

    void rest_phase(double duration_s) { cc_phase(0.0, 0.0, 0, duration_s); }

    /// Charge step whose current magnitude is reduced whenever holding the
    /// requested current would push the voltage past v_max, the way a real
    /// cycler clips regenerative pulses near full charge. Rows are recorded
    /// at interval starts with the current actually applied over them; the
    /// phase-end sample belongs to the next phase.
    void clipped_charge_phase(double i_charge, double duration_s)
    {
        const double dt = ctx_.solver.dt_output_s;
        const double t_phase_start = time_;
        while (true) {
            double dt_step = dt;
            bool last_in_phase = false;
            const double remaining = duration_s - (time_ - t_phase_start);
            if (remaining <= dt + 1e-9) {
                dt_step = remaining;
                last_in_phase = true;
            }
            if (dt_step <= 0.0) return;
            const CellState saved = sim_.state();
            const double t_saved = time_;
            double applied = i_charge;
            advance(applied, dt_step);
            if (voltage(applied) > limits_.v_max) {
                // Find the strongest charge current that ends the step at or
                // below v_max. Zero current always qualifies.
                double lo = i_charge, hi = 0.0;  // lo breaches, hi safe
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    sim_.mutable_state() = saved;
                    time_ = t_saved;
                    advance(mid, dt_step);
                    if (voltage(mid) > limits_.v_max)
                        lo = mid;
                    else
                        hi = mid;
                }
                applied = hi;
            }
            sim_.mutable_state() = saved;
            time_ = t_saved;
            record(applied);
            advance(applied, dt_step);
            if (last_in_phase) return;
        }
    }

    /// Proportional-controller constant-voltage hold at v_set. The current
    /// starts from i_init, stays inside [i_lo, i_hi], and the hold ends at an
    /// output sample once |I| falls below the cutoff.
    void cv_phase(double v_set, double i_init, double i_lo, double i_hi)
    {
        const double dt = ctx_.solver.dt_output_s;
        const int ticks = limits_.cv_ticks_per_sample;
        const double dt_tick = dt / static_cast<double>(ticks);
        double current = i_init;
        while (true) {
            for (int k = 0; k < ticks; ++k) {
                advance(current, dt_tick);
                const double err = voltage(current) - v_set;
                double delta = limits_.cv_gain * err;
                delta = std::clamp(delta, -limits_.cv_rate_limit_a, limits_.cv_rate_limit_a);
                current = std::clamp(current + delta, i_lo, i_hi);
            }
            record(current);
            if (std::abs(current) < limits_.cv_cutoff_a) return;
        }
    }

    static bool crossed(double v, double limit, int dir)
    {
        if (dir > 0) return v >= limit;
        if (dir < 0) return v <= limit;
        return false;
    }

    const CyclerLimits& limits() const { return limits_; }
    double bulk_soc_neg() const { return sim_.bulk_soc_neg(); }
    void set_degenerate() { out_.degenerate = true; }
    void record_rest_sample() { record(0.0); }

private:
    const ModelContext& ctx_;
    const CyclerLimits& limits_;
    Simulator sim_;
    TimeSeries out_;
    double time_ = 0.0;
};

void run_cccv(Cycler& cy, double c_rate)
{
    const double i_cc = cy.limits().current_at(c_rate);
    cy.mark("cc_discharge");
    cy.cc_phase(i_cc, cy.limits().v_min, -1, 0.0);
    cy.mark("cv_hold_vmin");
    cy.cv_phase(cy.limits().v_min, i_cc, 0.0, i_cc);
    cy.mark("cc_charge");
    cy.cc_phase(-i_cc, cy.limits().v_max, +1, 0.0);
    cy.mark("cv_hold_vmax");
    cy.cv_phase(cy.limits().v_max, -i_cc, -i_cc, 0.0);
}

void run_pulse(Cycler& cy, const PulseCycle& p)
{
    const double i_pulse = cy.limits().current_at(p.pulse_c_rate);
    int k = 0;
    while (true) {
        ++k;
        cy.mark("pulse_discharge_" + std::to_string(k));
        const bool hit = cy.cc_phase(i_pulse, cy.limits().v_min, -1, p.on_s);
        cy.mark("rest_" + std::to_string(k));
        cy.rest_phase(p.off_s);
        if (hit) break;
    }
    k = 0;
    while (true) {
        ++k;
        cy.mark("pulse_charge_" + std::to_string(k));
        const bool hit = cy.cc_phase(-i_pulse, cy.limits().v_max, +1, p.on_s);
        cy.mark("rest_charge_" + std::to_string(k));
        cy.rest_phase(p.off_s);
        if (hit) break;
    }
    cy.mark("cv_topoff");
    cy.cv_phase(cy.limits().v_max, -i_pulse, -i_pulse, 0.0);
}

void run_dst(Cycler& cy, const DstSchedule& dst)
{
    int cycle = 0;
    while (true) {
        ++cycle;
        cy.mark("dst_cycle_" + std::to_string(cycle));
        for (const auto& step : dst.steps) {
            const double i = cy.limits().current_at(step.c_rate);
            if (step.c_rate > 0.0) {
                if (cy.cc_phase(i, cy.limits().v_min, -1, step.duration_s)) return;
            } else if (step.c_rate < 0.0) {
                cy.clipped_charge_phase(i, step.duration_s);
            } else {
                cy.rest_phase(step.duration_s);
            }
            if (cy.bulk_soc_neg() < 0.02) return;  // negative electrode exhausted
        }
    }
}

} // namespace

TimeSeries run_protocol(const ProfileSpec& spec, const ModelContext& ctx,
                        const CyclerLimits& limits)
{
    spec.validate();
    limits.validate();
    Cycler cy(ctx, limits);

    // A cell that rests at or below v_min cannot be cycled: produce a single
    // rest sample flagged degenerate instead of a runaway phase.
    const double v_rest = cy.voltage(0.0);
    if (v_rest <= limits.v_min) {
        cy.mark("degenerate");
        cy.record_rest_sample();
        cy.set_degenerate();
        TimeSeries out = cy.finish();
        out.designation = spec.designation;
        return out;
    }

    if (std::holds_alternative<CccvCycle>(spec.variant))
        run_cccv(cy, std::get<CccvCycle>(spec.variant).c_rate);
    else if (std::holds_alternative<PulseCycle>(spec.variant))
        run_pulse(cy, std::get<PulseCycle>(spec.variant));
    else
        run_dst(cy, std::get<DstSchedule>(spec.variant));

    TimeSeries out = cy.finish();
    out.designation = spec.designation;
    out.validate();
    return out;
}

double equivalent_c_rate(const TimeSeries& series, double capacity_ah)
{
    if (series.empty()) throw std::invalid_argument("equivalent_c_rate: empty series");
    if (!(capacity_ah > 0.0))
        throw std::invalid_argument("equivalent_c_rate: capacity must be > 0");
    double acc = 0.0;
    for (const auto& r : series.rows) acc += std::abs(r.current_a);
    return acc / static_cast<double>(series.size()) / capacity_ah;
}

TimeSeries concat_profiles(const std::vector<TimeSeries>& series_list)
{
    if (series_list.empty()) throw std::invalid_argument("concat_profiles: no series given");
    for (std::size_t i = 0; i < series_list.size(); ++i) {
        if (series_list[i].empty())
            throw std::invalid_argument("concat_profiles: series " + std::to_string(i) +
                                        " is empty");
        const bool is_dst = series_list[i].designation == "DST";
        if (is_dst && i + 1 != series_list.size())
            throw std::invalid_argument("concat_profiles: DST must be the terminal segment");
    }
    for (std::size_t i = 0; i + 1 < series_list.size(); ++i) {
        const auto& a = series_list[i].endpoints;
        const auto& b = series_list[i + 1].endpoints;
        if (a && b) {
            if (std::abs(a->end_soc_neg - b->start_soc_neg) > 0.01 ||
                std::abs(a->end_soc_pos - b->start_soc_pos) > 0.01)
                throw std::invalid_argument(
                    "concat_profiles: SOC discontinuity above 1% at joint " + std::to_string(i));
        }
    }

    TimeSeries out;
    double offset = 0.0;
    std::string label;
    for (std::size_t i = 0; i < series_list.size(); ++i) {
        const auto& s = series_list[i];
        const std::size_t row0 = out.rows.size();
        out.segment_marks.push_back({row0, "base:" + s.designation, true});
        for (const auto& m : s.segment_marks)
            out.segment_marks.push_back({row0 + m.row, m.label, false});
        for (const auto& r : s.rows)
            out.rows.push_back({r.time_s + offset, r.current_a, r.voltage_v});
        // The next series starts one nominal sample after this one ends.
        const double dt_nominal = s.rows.size() > 1 ? s.rows[1].time_s - s.rows[0].time_s : 1.0;
        offset = out.rows.back().time_s + dt_nominal;
        if (!label.empty()) label += "+";
        label += s.designation;
        out.degenerate = out.degenerate || s.degenerate;
    }
    if (series_list.front().endpoints && series_list.back().endpoints) {
        out.endpoints = TimeSeries::Endpoints{series_list.front().endpoints->start_soc_neg,
                                              series_list.front().endpoints->start_soc_pos,
                                              series_list.back().endpoints->end_soc_neg,
                                              series_list.back().endpoints->end_soc_pos};
    }
    out.designation = label;
    out.validate();
    return out;
}

} // namespace spmfit
