#pragma once

#include <vector>

#include "kadapt/evaluate.hpp"
#include "kadapt/partition.hpp"
#include "kadapt/types.hpp"

namespace kadapt::assign {

/// Result of the scenario-to-plan assignment MIPs over a value matrix.
struct AssignmentResult {
    std::vector<int> selected;    // plan ids receiving >= 1 scenario, sorted
    std::vector<int> assignment;  // scenario position -> plan id
    double worst_case = 0.0;      // max over scenarios of the assigned value
    double avg_sum = 0.0;         // sum over scenarios of the assigned value
    Partition partition;          // induced clusters, canonical
};

/// Exact optimum of: choose <= K plans minimizing the worst assigned value,
/// infeasible (masked) cells forbidden. The worst-case value is exact; the
/// returned selection/partition is one optimal witness (the Pareto step
/// refines it). Threshold search over the distinct cell values with an exact
/// set-cover decision per threshold.
AssignmentResult solve_assignment_worst_case(const ValueMatrix& values, int K);

/// Exact optimum of MIP (6): among selections whose worst assigned value is
/// <= w_star + kValueTol, minimize the scenario sum. Ties break to the
/// lexicographically smallest selected-id set, then assignment vector.
AssignmentResult solve_assignment_pareto_avg(const ValueMatrix& values, int K, double w_star);

/// Symmetric scenario-distance matrix, L_ab = ||D_a - D_b||_2 (elementwise).
struct DistanceMatrix {
    int size = 0;
    std::vector<double> d;  // row-major size x size
    double at(int a, int b) const { return d[static_cast<size_t>(a) * size + b]; }
};

DistanceMatrix build_distance_matrix(const Instance& instance);

struct KMedoidsResult {
    std::vector<int> medoids;     // sorted scenario ids, <= K
    std::vector<int> assignment;  // scenario -> medoid (self when selected)
    double total_cost = 0.0;
};

/// Exact p-median optimum over the scenarios themselves; deterministic
/// tie-break = lexicographically smallest medoid set.
KMedoidsResult solve_k_medoids(const DistanceMatrix& dist, int K);

}  // namespace kadapt::assign
