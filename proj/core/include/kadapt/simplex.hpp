#pragma once

#include <utility>
#include <vector>

namespace kadapt::lp {

/// minimize c^T z  subject to  a_i^T z <= b_i for every row,  z >= 0.
struct DenseLp {
    int num_vars = 0;
    std::vector<double> objective;
    struct Row {
        std::vector<std::pair<int, double>> coeffs;  // (var, coefficient)
        double rhs = 0.0;
    };
    std::vector<Row> rows;
};

struct SimplexOutcome {
    enum class Status { Optimal, Infeasible, Unbounded, IterLimit };
    Status status = Status::IterLimit;
    std::vector<double> solution;  // length num_vars
    /// Lagrangian multipliers y >= 0, one per row: for any feasible z,
    /// c^T z >= -y^T b when c + A^T y >= 0. Populated when Optimal.
    std::vector<double> duals;
    /// Unbounded descent ray over the variables (z + mu*ray stays feasible for
    /// the rows given, objective -> -inf). Populated when Unbounded.
    std::vector<double> ray;
    double objective = 0.0;
    long iterations = 0;
};

/// Two-phase dense primal simplex. Deterministic: fixed pricing and ratio
/// tie-breaking, Bland's rule after a stall threshold.
SimplexOutcome solve_dense_simplex(const DenseLp& lp);

}  // namespace kadapt::lp
