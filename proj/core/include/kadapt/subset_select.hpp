#pragma once

#include <cstdint>
#include <vector>

namespace kadapt::detail {

/// Exact solvers for the subset-selection form shared by the assignment MIPs
/// and the K-medoids MIP: choose at most K rows of a value table; every column
/// takes its best usable selected row.
///
/// Columns are scenarios. Rows are plans (or medoid candidates). A masked
/// (unusable) cell can never receive an assignment.
struct SelectionProblem {
    int rows = 0;
    int cols = 0;
    const double* value = nullptr;        // row-major rows x cols
    const std::uint8_t* usable = nullptr; // row-major rows x cols
    int max_rows = 1;                     // K
    /// Assignment tie rule: prefer row index == column index (medoids assign
    /// scenarios to themselves at distance zero) before the lowest row index.
    bool self_tiebreak = false;
    double value_tol = 1e-9;
};

/// Decision: can <= K rows cover every column (a row covers the columns where
/// it is usable)? Exact DFS with subset-domination pruning.
bool cover_feasible(const SelectionProblem& p);

/// Exact minimum over selections S (|S| <= K, S covers all columns) of
/// max_j min_{i in S} value(i,j). Returns the optimal value; every attained
/// optimum is a cell value. Throws UnassignableScenario if some column has no
/// usable row at all.
double solve_min_max(const SelectionProblem& p);

struct SelectionResult {
    std::vector<int> chosen;      // rows receiving >= 1 column, sorted
    std::vector<int> assignment;  // per column, the assigned row
    double total = 0.0;           // sum over columns of assigned values
};

/// Exact minimum of sum_j min_{i in S} value(i,j) over coverings S with
/// |S| <= K. Ties on the sum (within value_tol) break to the lexicographically
/// smallest chosen-row set, then the lexicographically smallest assignment
/// vector. Branch and bound; exact.
SelectionResult solve_min_sum(const SelectionProblem& p);

}  // namespace kadapt::detail
