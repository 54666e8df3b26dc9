#include "kadapt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kadapt::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kReducedCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;

// Dense tableau over [structural | slack | artificial] columns plus rhs.
struct Tableau {
    int n = 0;       // structural
    int m = 0;       // rows
    int n_art = 0;   // artificials
    int width = 0;   // total columns excluding rhs
    std::vector<double> a;     // (m) x (width+1), row-major; last col = rhs
    std::vector<double> cost;  // reduced-cost row, width+1 (last = -objective)
    std::vector<int> basis;    // var index basic in each row
    std::vector<char> redundant;

    double& at(int r, int c) { return a[static_cast<size_t>(r) * (width + 1) + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * (width + 1) + c]; }
    int rhs_col() const { return width; }

    void pivot(int row, int col) {
        const double p = at(row, col);
        const double inv = 1.0 / p;
        for (int c = 0; c <= width; ++c) at(row, c) *= inv;
        at(row, col) = 1.0;
        for (int r = 0; r < m; ++r) {
            if (r == row) continue;
            const double f = at(r, col);
            if (f == 0.0) continue;
            for (int c = 0; c <= width; ++c) at(r, c) -= f * at(row, c);
            at(r, col) = 0.0;
        }
        const double f = cost[col];
        if (f != 0.0) {
            for (int c = 0; c <= width; ++c) cost[c] -= f * at(row, c);
            cost[col] = 0.0;
        }
        basis[row] = col;
    }
};

enum class IterResult { Optimal, Unbounded, IterLimit };

IterResult run_iterations(Tableau& t, const std::vector<char>& allowed, long& iterations,
                          long max_iterations, int* unbounded_col) {
    const long bland_after = 50 + 5L * (t.m + t.width);
    long stall = 0;
    double last_obj = std::numeric_limits<double>::infinity();
    while (true) {
        if (iterations >= max_iterations) return IterResult::IterLimit;

        // Pricing: most negative reduced cost; Bland's rule once stalled.
        const bool bland = stall > bland_after;
        int enter = -1;
        double best = -kReducedCostTol;
        for (int c = 0; c < t.width; ++c) {
            if (!allowed[c]) continue;
            const double rc = t.cost[c];
            if (rc < best) {
                enter = c;
                if (bland) break;
                best = rc;
            }
        }
        if (enter < 0) return IterResult::Optimal;

        // Ratio test over non-redundant rows.
        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        double best_pivot = 0.0;
        for (int r = 0; r < t.m; ++r) {
            if (t.redundant[r]) continue;
            const double alpha = t.at(r, enter);
            if (alpha <= kPivotTol) continue;
            const double ratio = t.at(r, t.rhs_col()) / alpha;
            bool better;
            if (ratio < best_ratio - 1e-12) {
                better = true;
            } else if (ratio <= best_ratio + 1e-12) {
                better = bland ? (t.basis[r] < t.basis[leave])
                               : (alpha > best_pivot ||
                                  (alpha == best_pivot && t.basis[r] < t.basis[leave]));
            } else {
                better = false;
            }
            if (better) {
                leave = r;
                best_ratio = std::min(best_ratio, ratio);
                best_pivot = alpha;
            }
        }
        if (leave < 0) {
            if (unbounded_col) *unbounded_col = enter;
            return IterResult::Unbounded;
        }
        t.pivot(leave, enter);
        ++iterations;

        const double obj = -t.cost[t.rhs_col()];
        if (obj < last_obj - 1e-12) {
            stall = 0;
            last_obj = obj;
        } else {
            ++stall;
        }
    }
}

void price_out_basis(Tableau& t, const std::vector<double>& var_cost) {
    t.cost.assign(t.width + 1, 0.0);
    for (int c = 0; c < t.width; ++c)
        t.cost[c] = c < static_cast<int>(var_cost.size()) ? var_cost[c] : 0.0;
    for (int r = 0; r < t.m; ++r) {
        const int b = t.basis[r];
        const double cb = b < static_cast<int>(var_cost.size()) ? var_cost[b] : 0.0;
        if (cb == 0.0) continue;
        for (int c = 0; c <= t.width; ++c) t.cost[c] -= cb * t.at(r, c);
        t.cost[b] = 0.0;
    }
}

}  // namespace

SimplexOutcome solve_dense_simplex(const DenseLp& lp) {
    const int n = lp.num_vars;
    const int m = static_cast<int>(lp.rows.size());
    SimplexOutcome out;

    // Rows with negative rhs are scaled by -1 and given an artificial; the
    // dual read-off below is invariant to the flip.
    std::vector<int> art_row;
    for (int r = 0; r < m; ++r)
        if (lp.rows[r].rhs < 0.0) art_row.push_back(r);
    const int n_art = static_cast<int>(art_row.size());

    Tableau t;
    t.n = n;
    t.m = m;
    t.n_art = n_art;
    t.width = n + m + n_art;
    t.a.assign(static_cast<size_t>(m) * (t.width + 1), 0.0);
    t.basis.assign(m, -1);
    t.redundant.assign(m, 0);

    {
        int next_art = 0;
        for (int r = 0; r < m; ++r) {
            const bool flip = lp.rows[r].rhs < 0.0;
            const double f = flip ? -1.0 : 1.0;
            for (const auto& [c, v] : lp.rows[r].coeffs) t.at(r, c) += f * v;
            t.at(r, n + r) = f;  // slack
            t.at(r, t.rhs_col()) = f * lp.rows[r].rhs;
            if (flip) {
                const int ac = n + m + next_art++;
                t.at(r, ac) = 1.0;
                t.basis[r] = ac;
            } else {
                t.basis[r] = n + r;
            }
        }
    }

    std::vector<char> allowed(t.width, 1);
    const long max_iterations = 5000 + 500L * (m + n);

    if (n_art > 0) {
        std::vector<double> phase1_cost(t.width, 0.0);
        for (int k = 0; k < n_art; ++k) phase1_cost[n + m + k] = 1.0;
        price_out_basis(t, phase1_cost);
        IterResult res = run_iterations(t, allowed, out.iterations, max_iterations, nullptr);
        if (res == IterResult::IterLimit) {
            out.status = SimplexOutcome::Status::IterLimit;
            return out;
        }
        const double phase1_obj = -t.cost[t.rhs_col()];
        if (phase1_obj > kPhase1Tol) {
            out.status = SimplexOutcome::Status::Infeasible;
            return out;
        }
        // Drive remaining artificials out of the basis; rows that cannot
        // pivot are numerically redundant and excluded from now on.
        for (int r = 0; r < m; ++r) {
            if (t.basis[r] < n + m) continue;
            int col = -1;
            double best = kPivotTol;
            for (int c = 0; c < n + m; ++c) {
                const double v = std::abs(t.at(r, c));
                if (v > best) {
                    best = v;
                    col = c;
                }
            }
            if (col >= 0) {
                t.pivot(r, col);
                ++out.iterations;
            } else {
                t.redundant[r] = 1;
            }
        }
        for (int k = 0; k < n_art; ++k) allowed[n + m + k] = 0;
    }

    std::vector<double> phase2_cost(t.width, 0.0);
    for (int c = 0; c < n; ++c) phase2_cost[c] = lp.objective[c];
    price_out_basis(t, phase2_cost);

    int unbounded_col = -1;
    IterResult res = run_iterations(t, allowed, out.iterations, max_iterations, &unbounded_col);
    if (res == IterResult::IterLimit) {
        out.status = SimplexOutcome::Status::IterLimit;
        return out;
    }
    if (res == IterResult::Unbounded) {
        out.status = SimplexOutcome::Status::Unbounded;
        out.ray.assign(n, 0.0);
        if (unbounded_col < n) out.ray[unbounded_col] = 1.0;
        for (int r = 0; r < m; ++r) {
            if (t.redundant[r]) continue;
            const int b = t.basis[r];
            if (b < n) out.ray[b] = std::max(0.0, -t.at(r, unbounded_col));
        }
        return out;
    }

    out.status = SimplexOutcome::Status::Optimal;
    out.solution.assign(n, 0.0);
    for (int r = 0; r < m; ++r) {
        const int b = t.basis[r];
        if (b < n) out.solution[b] = std::max(0.0, t.at(r, t.rhs_col()));
    }
    out.objective = 0.0;
    for (int c = 0; c < n; ++c) out.objective += lp.objective[c] * out.solution[c];
    // Duals: reduced cost under each slack column (0 for redundant rows).
    out.duals.assign(m, 0.0);
    for (int r = 0; r < m; ++r)
        if (!t.redundant[r]) out.duals[r] = std::max(0.0, t.cost[n + r]);
    return out;
}

}  // namespace kadapt::lp
