#pragma once

#include <stdexcept>
#include <string>

namespace spmfit {

enum class Electrode { Negative, Positive };

inline const char* electrode_name(Electrode e)
{
    return e == Electrode::Negative ? "negative" : "positive";
}

/// Base class for every error that makes a simulation run infeasible.
/// The estimator maps these onto a penalty fitness instead of crashing.
class SimulationInfeasible : public std::runtime_error {
public:
    explicit SimulationInfeasible(const std::string& msg) : std::runtime_error(msg) {}
};

/// Stoichiometry left [0,1] somewhere in a particle. Carries which
/// electrode failed and the simulation time at which it happened.
class InfeasibleStateError : public SimulationInfeasible {
public:
    InfeasibleStateError(Electrode e, double time_s, double value)
        : SimulationInfeasible(std::string("infeasible state: ") + electrode_name(e) +
                               " electrode stoichiometry " + std::to_string(value) +
                               " outside [0,1] at t=" + std::to_string(time_s) + " s"),
          electrode(e), time_s(time_s), value(value)
    {
    }

    Electrode electrode;
    double time_s;
    double value;
};

/// Surface stoichiometry at 0 or 1 makes the exchange-current term singular.
class KineticSingularityError : public SimulationInfeasible {
public:
    KineticSingularityError(Electrode e, double surface_stoich)
        : SimulationInfeasible(std::string("kinetic singularity: ") + electrode_name(e) +
                               " surface stoichiometry " + std::to_string(surface_stoich)),
          electrode(e), surface_stoich(surface_stoich)
    {
    }

    Electrode electrode;
    double surface_stoich;
};

/// Query outside an OCP curve's tabulated domain (no extrapolation).
class OcpDomainError : public SimulationInfeasible {
public:
    OcpDomainError(const std::string& curve, double stoich)
        : SimulationInfeasible("OCP domain error: curve '" + curve + "' queried at " +
                               std::to_string(stoich)),
          curve(curve), stoich(stoich)
    {
    }

    std::string curve;
    double stoich;
};

/// Cycler safety cap hit before the protocol terminated on its own.
class ProtocolTimeoutError : public SimulationInfeasible {
public:
    explicit ProtocolTimeoutError(double limit_s)
        : SimulationInfeasible("protocol exceeded max_duration_s = " + std::to_string(limit_s)),
          limit_s(limit_s)
    {
    }

    double limit_s;
};

} // namespace spmfit
