#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace spmfit {

/// The nine grouped cell parameters the whole pipeline estimates.
///
/// Each component collapses several physical constants that are not
/// individually identifiable from voltage data:
///   alpha  = Rs^2 / Ds              diffusion time constant        [s]
///   q      = F * A * L * eps * cmax electrode capacity             [C]
///   d      = reff * sqrt(ce) / (F * Rs)  grouped kinetic constant  [s mol^1/2 m^-5/2]
///   soc0   = initial bulk stoichiometry                            [-]
///   r0     = lumped ohmic resistance                               [Ohm]
struct GroupedParameters {
    double alpha_neg = 3105.3457;
    double alpha_pos = 1865.8674;
    double q_neg = 10765.6853;
    double q_pos = 11117.7742;
    double d_neg = 3.3407e-5;
    double d_pos = 7.3545e-4;
    double soc0_neg = 0.9472;
    double soc0_pos = 0.0188;
    double r0 = 0.0218;

    static constexpr std::size_t kDim = 9;

    std::array<double, kDim> as_array() const
    {
        return {alpha_neg, alpha_pos, q_neg, q_pos, d_neg, d_pos, soc0_neg, soc0_pos, r0};
    }

    static GroupedParameters from_array(const std::array<double, kDim>& v)
    {
        GroupedParameters p;
        p.alpha_neg = v[0];
        p.alpha_pos = v[1];
        p.q_neg = v[2];
        p.q_pos = v[3];
        p.d_neg = v[4];
        p.d_pos = v[5];
        p.soc0_neg = v[6];
        p.soc0_pos = v[7];
        p.r0 = v[8];
        return p;
    }

    static const std::array<const char*, kDim>& component_names()
    {
        static const std::array<const char*, kDim> names = {
            "alpha_neg", "alpha_pos", "q_neg", "q_pos", "d_neg",
            "d_pos",     "soc0_neg",  "soc0_pos", "r0"};
        return names;
    }

    /// Throws std::invalid_argument on any invariant violation.
    void validate() const
    {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0))
                throw std::invalid_argument(std::string("GroupedParameters: ") + name +
                                            " must be > 0, got " + std::to_string(v));
        };
        positive(alpha_neg, "alpha_neg");
        positive(alpha_pos, "alpha_pos");
        positive(q_neg, "q_neg");
        positive(q_pos, "q_pos");
        positive(d_neg, "d_neg");
        positive(d_pos, "d_pos");
        positive(r0, "r0");
        auto open_unit = [](double v, const char* name) {
            if (!(v > 0.0 && v < 1.0))
                throw std::invalid_argument(std::string("GroupedParameters: ") + name +
                                            " must be in (0,1), got " + std::to_string(v));
        };
        open_unit(soc0_neg, "soc0_neg");
        open_unit(soc0_pos, "soc0_pos");
    }
};

struct PhysicalConstants {
    double gas_constant = 8.314;    // J/(mol K)
    double faraday = 96485.33;      // C/mol
    double temperature = 298.15;    // K

    void validate() const
    {
        if (!(temperature > 0.0))
            throw std::invalid_argument("PhysicalConstants: temperature must be > 0 K");
    }

    /// 2RT/F, the overpotential prefactor.
    double thermal_voltage_2rt_f() const
    {
        return 2.0 * gas_constant * temperature / faraday;
    }
};

struct SolverConfig {
    int n_radial_shells = 16;
    double dt_output_s = 1.0;
    double stability_safety = 0.5;  // fraction of the explicit diffusion limit

    void validate() const
    {
        if (n_radial_shells < 4)
            throw std::invalid_argument("SolverConfig: n_radial_shells must be >= 4");
        if (!(dt_output_s > 0.0))
            throw std::invalid_argument("SolverConfig: dt_output_s must be > 0");
        if (!(stability_safety > 0.0 && stability_safety < 1.0))
            throw std::invalid_argument("SolverConfig: stability_safety must be in (0,1)");
    }
};

} // namespace spmfit
