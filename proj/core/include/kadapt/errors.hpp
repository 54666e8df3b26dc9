#pragma once

#include <stdexcept>
#include <string>

namespace kadapt {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInstance : public Error {
public:
    using Error::Error;
};

// Raised when a plan's weight vector does not match a scenario's beamlet count.
class DimensionMismatch : public Error {
public:
    DimensionMismatch(const std::string& what, int plan_id, int scenario_id)
        : Error(what), plan_id(plan_id), scenario_id(scenario_id) {}
    int plan_id;
    int scenario_id;
};

class InvalidPartition : public Error {
public:
    using Error::Error;
};

// A scenario with no feasible plan in the pool cannot be assigned.
class UnassignableScenario : public Error {
public:
    UnassignableScenario(const std::string& what, int scenario_id)
        : Error(what), scenario_id(scenario_id) {}
    int scenario_id;
};

// The worst-case threshold handed to the Pareto assignment step is below the
// true optimum, so no selection satisfies it.
class InfeasibleThreshold : public Error {
public:
    using Error::Error;
};

// Generation loop exceeded its iteration cap. Must never fire on valid inputs.
class TerminationGuard : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    explicit SolverFailure(const std::string& what, std::string log = {})
        : Error(what), log(std::move(log)) {}
    std::string log;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace kadapt
