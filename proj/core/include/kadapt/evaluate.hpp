#pragma once

#include <cstdint>
#include <vector>

#include "kadapt/types.hpp"

namespace kadapt {

namespace io {
class ValueMatrixIo;
}

struct PlanEval {
    double value = 0.0;
    bool feasible = false;
};

/// Objective value of a dose vector under the instance's objective spec.
double objective_value(const std::vector<double>& dose, const Instance& instance);

/// Evaluates one plan on one scenario: value = f(D^s x) and the feasibility of
/// every constraint within the relative tolerance kFeasRelTol on each bound.
/// The value is computed (and returned) even when infeasible; consumers must
/// honor the flag.
PlanEval evaluate_plan(const PlanSolution& plan, const Scenario& scenario,
                       const Instance& instance);

/// Plans x scenarios table of objective values with a feasibility mask.
/// Entries are deterministic: recomputing any cell reproduces it bit-exactly.
class ValueMatrix {
public:
    ValueMatrix() = default;

    int plan_count() const { return static_cast<int>(plan_ids_.size()); }
    int scenario_count() const { return static_cast<int>(scenario_ids_.size()); }

    const std::vector<int>& plan_ids() const { return plan_ids_; }
    const std::vector<int>& scenario_ids() const { return scenario_ids_; }

    double value(int plan_index, int scenario_index) const {
        return values_[static_cast<size_t>(plan_index) * scenario_ids_.size() + scenario_index];
    }
    bool feasible(int plan_index, int scenario_index) const {
        return feasible_[static_cast<size_t>(plan_index) * scenario_ids_.size() + scenario_index] != 0;
    }

    int plan_index_of(int plan_id) const;

    /// Selects a subset of rows (by index) as a new matrix. Used for the
    /// local-pool heuristic variant.
    ValueMatrix select_rows(const std::vector<int>& row_indices) const;

    friend ValueMatrix build_value_matrix(const std::vector<PlanSolution>&, const Instance&,
                                          const ValueMatrix*, int);
    friend class io::ValueMatrixIo;

private:
    std::vector<int> plan_ids_;
    std::vector<int> scenario_ids_;
    std::vector<double> values_;        // row-major, plan-major
    std::vector<std::uint8_t> feasible_;
};

/// Evaluates every (plan, scenario) pair. When `previous` is given it must be
/// a prefix of `pool` (same plan ids in order); its rows are carried over
/// bit-identically and only new plans are evaluated. Cells are independent, so
/// `workers` > 1 fans evaluation out across threads without changing results.
ValueMatrix build_value_matrix(const std::vector<PlanSolution>& pool, const Instance& instance,
                               const ValueMatrix* previous = nullptr, int workers = 1);

}  // namespace kadapt
