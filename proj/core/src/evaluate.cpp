#include "kadapt/evaluate.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "kadapt/errors.hpp"

namespace kadapt {

double objective_value(const std::vector<double>& dose, const Instance& instance) {
    const std::vector<int>& target = instance.structure(instance.objective.target);
    if (instance.objective.kind == ObjectiveKind::MinDoseInTarget) {
        double mind = std::numeric_limits<double>::infinity();
        for (int v : target) mind = std::min(mind, dose[v]);
        return -mind;
    }
    double sum = 0.0;
    for (int v : target) sum += dose[v];
    return sum;
}

namespace {

bool constraints_satisfied(const std::vector<double>& dose, const Instance& instance) {
    for (const ConstraintSpec& c : instance.constraints) {
        const std::vector<int>& vox = instance.structure(c.structure);
        const double tol = kFeasRelTol * c.bound;
        switch (c.kind) {
            case ConstraintKind::MaxDose:
                for (int v : vox)
                    if (dose[v] > c.bound + tol) return false;
                break;
            case ConstraintKind::MeanDose: {
                double sum = 0.0;
                for (int v : vox) sum += dose[v];
                if (sum / static_cast<double>(vox.size()) > c.bound + tol) return false;
                break;
            }
            case ConstraintKind::MinDose:
                for (int v : vox)
                    if (dose[v] < c.bound - tol) return false;
                break;
        }
    }
    return true;
}

}  // namespace

PlanEval evaluate_plan(const PlanSolution& plan, const Scenario& scenario,
                       const Instance& instance) {
    if (static_cast<int>(plan.weights.size()) != scenario.dose.cols())
        throw DimensionMismatch("plan " + std::to_string(plan.id) + " has " +
                                    std::to_string(plan.weights.size()) +
                                    " weights but scenario " + std::to_string(scenario.id) +
                                    " expects " + std::to_string(scenario.dose.cols()),
                                plan.id, scenario.id);
    std::vector<double> dose;
    scenario.dose.multiply(plan.weights, dose);
    return {objective_value(dose, instance), constraints_satisfied(dose, instance)};
}

int ValueMatrix::plan_index_of(int plan_id) const {
    for (int i = 0; i < plan_count(); ++i)
        if (plan_ids_[i] == plan_id) return i;
    return -1;
}

ValueMatrix ValueMatrix::select_rows(const std::vector<int>& row_indices) const {
    ValueMatrix out;
    out.scenario_ids_ = scenario_ids_;
    const size_t t = scenario_ids_.size();
    for (int r : row_indices) {
        out.plan_ids_.push_back(plan_ids_[r]);
        out.values_.insert(out.values_.end(), values_.begin() + r * t,
                           values_.begin() + (r + 1) * t);
        out.feasible_.insert(out.feasible_.end(), feasible_.begin() + r * t,
                             feasible_.begin() + (r + 1) * t);
    }
    return out;
}

ValueMatrix build_value_matrix(const std::vector<PlanSolution>& pool, const Instance& instance,
                               const ValueMatrix* previous, int workers) {
    if (pool.empty()) throw InvalidInstance("build_value_matrix: empty plan pool");
    const int t = instance.scenario_count();
    ValueMatrix out;
    out.scenario_ids_.resize(t);
    for (int j = 0; j < t; ++j) out.scenario_ids_[j] = instance.scenarios[j].id;
    out.plan_ids_.reserve(pool.size());
    for (const PlanSolution& p : pool) out.plan_ids_.push_back(p.id);
    out.values_.resize(pool.size() * static_cast<size_t>(t));
    out.feasible_.resize(pool.size() * static_cast<size_t>(t));

    size_t first_new = 0;
    if (previous) {
        if (previous->scenario_count() != t)
            throw InvalidInstance("build_value_matrix: previous matrix scenario mismatch");
        first_new = previous->plan_ids_.size();
        if (first_new > pool.size())
            throw InvalidInstance("build_value_matrix: previous matrix larger than pool");
        for (size_t i = 0; i < first_new; ++i)
            if (previous->plan_ids_[i] != pool[i].id)
                throw InvalidInstance("build_value_matrix: previous matrix is not a prefix");
        std::copy(previous->values_.begin(), previous->values_.end(), out.values_.begin());
        std::copy(previous->feasible_.begin(), previous->feasible_.end(), out.feasible_.begin());
    }

    auto fill_row = [&](size_t i) {
        for (int j = 0; j < t; ++j) {
            PlanEval e = evaluate_plan(pool[i], instance.scenarios[j], instance);
            out.values_[i * t + j] = e.value;
            out.feasible_[i * t + j] = e.feasible ? 1 : 0;
        }
    };

    const size_t n_new = pool.size() - first_new;
    if (workers > 1 && n_new > 1) {
        std::vector<std::thread> threads;
        const int nw = std::min<size_t>(workers, n_new);
        for (int w = 0; w < nw; ++w) {
            threads.emplace_back([&, w] {
                for (size_t i = first_new + w; i < pool.size(); i += nw) fill_row(i);
            });
        }
        for (auto& th : threads) th.join();
    } else {
        for (size_t i = first_new; i < pool.size(); ++i) fill_row(i);
    }
    return out;
}

}  // namespace kadapt
