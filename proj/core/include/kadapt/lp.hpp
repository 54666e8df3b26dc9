#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kadapt/types.hpp"

namespace kadapt::lp {

/// Relative optimality gap required of a robust subproblem solve.
inline constexpr double kOptTol = 1e-6;

/// The epigraph LP of the robust problem restricted to a scenario cluster:
/// minimize the worst-case objective over the cluster subject to every
/// scenario's constraints.
struct RobustSubproblem {
    const Instance* instance = nullptr;
    std::vector<int> cluster;      // scenario ids the plan must cover
    bool include_nominal = true;   // add instance->nominal_id to the cluster
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct Certificate {
    double gap = 0.0;              // |primal - dual| / max(1, |primal|)
    double dual_objective = 0.0;
    double max_violation = 0.0;    // worst primal constraint violation
    double dual_violation = 0.0;   // worst dual-feasibility violation
    std::vector<double> slacks;    // per row of the full formulation
    int rows_total = 0;
    int rows_generated = 0;
    long simplex_iterations = 0;
    std::string log;
};

struct LpSolution {
    std::vector<double> weights;
    double value = 0.0;  // optimal epigraph value (internal minimization units)
    SolveStatus status = SolveStatus::NumericalFailure;
    Certificate certificate;
};

/// Exact-to-tolerance solve of the cluster-restricted robust problem.
/// Row generation over a dense simplex: working rows grow until no row of the
/// full formulation is violated, so the dual bound of the working problem
/// certifies the full one. Beamlets with no influence on the objective or any
/// constraint are fixed to zero.
LpSolution solve_robust_subproblem(const RobustSubproblem& sub);

/// solve_robust_subproblem with cluster = {scenario_id}, nominal excluded.
LpSolution solve_single_scenario(const Instance& instance, int scenario_id);

/// Writes the full formulation in CPLEX LP text format for external checks.
void write_lp_format(const RobustSubproblem& sub, std::ostream& os);

}  // namespace kadapt::lp
