#include "kadapt/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kadapt/errors.hpp"
#include "kadapt/subset_select.hpp"

namespace kadapt::assign {

namespace {

struct DenseView {
    std::vector<double> values;
    std::vector<std::uint8_t> usable;
    int rows = 0, cols = 0;
};

DenseView dense_view(const ValueMatrix& vm) {
    DenseView d;
    d.rows = vm.plan_count();
    d.cols = vm.scenario_count();
    d.values.resize(static_cast<size_t>(d.rows) * d.cols);
    d.usable.resize(static_cast<size_t>(d.rows) * d.cols);
    for (int i = 0; i < d.rows; ++i)
        for (int j = 0; j < d.cols; ++j) {
            d.values[static_cast<size_t>(i) * d.cols + j] = vm.value(i, j);
            d.usable[static_cast<size_t>(i) * d.cols + j] = vm.feasible(i, j) ? 1 : 0;
        }
    return d;
}

void check_columns_assignable(const ValueMatrix& vm) {
    for (int j = 0; j < vm.scenario_count(); ++j) {
        bool any = false;
        for (int i = 0; i < vm.plan_count() && !any; ++i) any = vm.feasible(i, j);
        if (!any) {
            const int sid = vm.scenario_ids()[j];
            throw UnassignableScenario(
                "scenario " + std::to_string(sid) + " has no feasible plan in the pool", sid);
        }
    }
}

AssignmentResult result_from_selection(const ValueMatrix& vm, const std::vector<int>& rows,
                                       const std::vector<int>& assignment_rows) {
    AssignmentResult res;
    res.assignment.resize(vm.scenario_count());
    res.worst_case = -std::numeric_limits<double>::infinity();
    res.avg_sum = 0.0;
    std::vector<std::vector<int>> clusters(vm.plan_count());
    for (int j = 0; j < vm.scenario_count(); ++j) {
        const int r = assignment_rows[j];
        res.assignment[j] = vm.plan_ids()[r];
        const double v = vm.value(r, j);
        res.worst_case = std::max(res.worst_case, v);
        res.avg_sum += v;
        clusters[r].push_back(vm.scenario_ids()[j]);
    }
    for (int r : rows)
        if (!clusters[r].empty()) res.selected.push_back(vm.plan_ids()[r]);
    std::sort(res.selected.begin(), res.selected.end());
    Partition blocks;
    for (const auto& c : clusters)
        if (!c.empty()) blocks.push_back(c);
    res.partition = canonicalize_partition(blocks, vm.scenario_count());
    return res;
}

}  // namespace

AssignmentResult solve_assignment_worst_case(const ValueMatrix& values, int K) {
    if (K < 1) throw InvalidInstance("K must be >= 1");
    check_columns_assignable(values);
    DenseView d = dense_view(values);
    detail::SelectionProblem p;
    p.rows = d.rows;
    p.cols = d.cols;
    p.value = d.values.data();
    p.usable = d.usable.data();
    p.max_rows = K;
    const double w_star = detail::solve_min_max(p);

    // One optimal witness: the min-sum cover restricted to cells <= w*. This
    // keeps the provisional partition deterministic; the Pareto step is the
    // authoritative refinement.
    std::vector<std::uint8_t> usable_at(d.usable.size());
    for (size_t k = 0; k < usable_at.size(); ++k)
        usable_at[k] = d.usable[k] && d.values[k] <= w_star;
    p.usable = usable_at.data();
    detail::SelectionResult sel = detail::solve_min_sum(p);
    AssignmentResult res = result_from_selection(values, sel.chosen, sel.assignment);
    res.worst_case = w_star;
    return res;
}

AssignmentResult solve_assignment_pareto_avg(const ValueMatrix& values, int K, double w_star) {
    if (K < 1) throw InvalidInstance("K must be >= 1");
    check_columns_assignable(values);
    DenseView d = dense_view(values);
    std::vector<std::uint8_t> usable_at(d.usable.size());
    for (size_t k = 0; k < usable_at.size(); ++k)
        usable_at[k] = d.usable[k] && d.values[k] <= w_star + kValueTol;
    detail::SelectionProblem p;
    p.rows = d.rows;
    p.cols = d.cols;
    p.value = d.values.data();
    p.usable = usable_at.data();
    p.max_rows = K;
    for (int j = 0; j < d.cols; ++j) {
        bool any = false;
        for (int i = 0; i < d.rows && !any; ++i)
            any = usable_at[static_cast<size_t>(i) * d.cols + j] != 0;
        if (!any)
            throw InfeasibleThreshold("threshold " + std::to_string(w_star) +
                                      " is below the attainable worst case for scenario " +
                                      std::to_string(values.scenario_ids()[j]));
    }
    if (!detail::cover_feasible(p))
        throw InfeasibleThreshold("no selection of " + std::to_string(K) +
                                  " plans meets the worst-case threshold");
    detail::SelectionResult sel = detail::solve_min_sum(p);
    return result_from_selection(values, sel.chosen, sel.assignment);
}

DistanceMatrix build_distance_matrix(const Instance& instance) {
    const int t = instance.scenario_count();
    DistanceMatrix dm;
    dm.size = t;
    dm.d.assign(static_cast<size_t>(t) * t, 0.0);
    for (int a = 0; a < t; ++a)
        for (int b = a + 1; b < t; ++b) {
            const double v =
                CsrMatrix::frobenius_distance(instance.scenarios[a].dose,
                                              instance.scenarios[b].dose);
            dm.d[static_cast<size_t>(a) * t + b] = v;
            dm.d[static_cast<size_t>(b) * t + a] = v;
        }
    return dm;
}

KMedoidsResult solve_k_medoids(const DistanceMatrix& dist, int K) {
    if (K < 1) throw InvalidInstance("K must be >= 1");
    const int t = dist.size;
    std::vector<std::uint8_t> usable(static_cast<size_t>(t) * t, 1);
    detail::SelectionProblem p;
    p.rows = t;
    p.cols = t;
    p.value = dist.d.data();
    p.usable = usable.data();
    p.max_rows = std::min(K, t);
    p.self_tiebreak = true;
    detail::SelectionResult sel = detail::solve_min_sum(p);
    KMedoidsResult res;
    res.medoids = sel.chosen;
    res.assignment = sel.assignment;
    res.total_cost = sel.total;
    return res;
}

}  // namespace kadapt::assign
