#include "kadapt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "kadapt/errors.hpp"
#include "kadapt/evaluate.hpp"
#include "kadapt/format.hpp"
#include "kadapt/simplex.hpp"

namespace kadapt::lp {

namespace {

constexpr double kRowGenTol = 1e-9;
constexpr int kMaxRounds = 400;

struct RowRef {
    enum class Kind { Epigraph, Max, Mean, Min };
    Kind kind;
    int scenario_pos;    // index into the effective cluster
    int constraint_idx;  // -1 for epigraph rows
    int voxel;           // -1 for aggregated (Mean / SumDose epigraph) rows
};

// Assembled formulation for one subproblem: effective cluster, active
// beamlet columns, and the deterministic full row list.
struct Formulation {
    const Instance* inst = nullptr;
    std::vector<int> cluster;       // effective scenario ids, sorted unique
    std::vector<int> active_cols;   // beamlet ids with any influence
    std::vector<int> col_map;       // beamlet id -> active index (-1 if fixed)
    std::vector<RowRef> rows;
    int tp = 0, tm = 0;             // t = tp - tm

    int n_lp_vars() const { return static_cast<int>(active_cols.size()) + 2; }

    const Scenario& scenario(int pos) const { return inst->scenarios[cluster[pos]]; }
};

Formulation build_formulation(const RobustSubproblem& sub) {
    Formulation f;
    f.inst = sub.instance;
    const Instance& inst = *sub.instance;

    std::set<int> ids(sub.cluster.begin(), sub.cluster.end());
    if (ids.empty()) throw InvalidInstance("robust subproblem: empty cluster");
    if (sub.include_nominal && inst.nominal_id) ids.insert(*inst.nominal_id);
    for (int id : ids)
        if (id < 0 || id >= inst.scenario_count())
            throw InvalidInstance("robust subproblem: scenario id out of range");
    f.cluster.assign(ids.begin(), ids.end());

    // Voxels that matter: the objective target plus all constraint structures.
    std::vector<char> relevant(inst.voxel_count(), 0);
    for (int v : inst.structure(inst.objective.target)) relevant[v] = 1;
    for (const ConstraintSpec& c : inst.constraints)
        for (int v : inst.structure(c.structure)) relevant[v] = 1;

    // Beamlets with no entry in any relevant row of any cluster scenario have
    // no influence; they are fixed to zero.
    std::vector<char> active(inst.beamlet_count(), 0);
    for (int id : f.cluster) {
        const CsrMatrix& d = inst.scenarios[id].dose;
        for (int v = 0; v < d.rows(); ++v) {
            if (!relevant[v]) continue;
            auto cols = d.row_cols(v);
            auto vals = d.row_vals(v);
            for (size_t k = 0; k < cols.size(); ++k)
                if (vals[k] != 0.0) active[cols[k]] = 1;
        }
    }
    f.col_map.assign(inst.beamlet_count(), -1);
    for (int j = 0; j < inst.beamlet_count(); ++j) {
        if (active[j]) {
            f.col_map[j] = static_cast<int>(f.active_cols.size());
            f.active_cols.push_back(j);
        }
    }
    f.tp = static_cast<int>(f.active_cols.size());
    f.tm = f.tp + 1;

    const std::vector<int>& target = inst.structure(inst.objective.target);
    for (int pos = 0; pos < static_cast<int>(f.cluster.size()); ++pos) {
        if (inst.objective.kind == ObjectiveKind::MinDoseInTarget) {
            for (int v : target)
                f.rows.push_back({RowRef::Kind::Epigraph, pos, -1, v});
        } else {
            f.rows.push_back({RowRef::Kind::Epigraph, pos, -1, -1});
        }
        for (int k = 0; k < static_cast<int>(inst.constraints.size()); ++k) {
            const ConstraintSpec& c = inst.constraints[k];
            const std::vector<int>& vox = inst.structure(c.structure);
            switch (c.kind) {
                case ConstraintKind::MaxDose:
                    for (int v : vox) f.rows.push_back({RowRef::Kind::Max, pos, k, v});
                    break;
                case ConstraintKind::MeanDose:
                    f.rows.push_back({RowRef::Kind::Mean, pos, k, -1});
                    break;
                case ConstraintKind::MinDose:
                    for (int v : vox) f.rows.push_back({RowRef::Kind::Min, pos, k, v});
                    break;
            }
        }
    }
    return f;
}

// Sparse LP coefficients of one row over the active columns (+ t split).
DenseLp::Row materialize_row(const Formulation& f, const RowRef& ref) {
    const Instance& inst = *f.inst;
    const CsrMatrix& d = f.scenario(ref.scenario_pos).dose;
    DenseLp::Row row;
    auto add_voxel_row = [&](int v, double scale) {
        auto cols = d.row_cols(v);
        auto vals = d.row_vals(v);
        for (size_t k = 0; k < cols.size(); ++k) {
            const int c = f.col_map[cols[k]];
            if (c >= 0 && vals[k] != 0.0) row.coeffs.emplace_back(c, scale * vals[k]);
        }
    };
    auto add_aggregate = [&](const std::vector<int>& vox, double scale) {
        std::vector<double> acc(f.active_cols.size(), 0.0);
        for (int v : vox) {
            auto cols = d.row_cols(v);
            auto vals = d.row_vals(v);
            for (size_t k = 0; k < cols.size(); ++k) {
                const int c = f.col_map[cols[k]];
                if (c >= 0) acc[c] += vals[k];
            }
        }
        for (size_t c = 0; c < acc.size(); ++c)
            if (acc[c] != 0.0) row.coeffs.emplace_back(static_cast<int>(c), scale * acc[c]);
    };

    switch (ref.kind) {
        case RowRef::Kind::Epigraph:
            if (ref.voxel >= 0) {
                add_voxel_row(ref.voxel, -1.0);
            } else {
                add_aggregate(inst.structure(inst.objective.target), 1.0);
            }
            row.coeffs.emplace_back(f.tp, -1.0);
            row.coeffs.emplace_back(f.tm, 1.0);
            row.rhs = 0.0;
            break;
        case RowRef::Kind::Max:
            add_voxel_row(ref.voxel, 1.0);
            row.rhs = inst.constraints[ref.constraint_idx].bound;
            break;
        case RowRef::Kind::Mean: {
            const auto& vox = inst.structure(inst.constraints[ref.constraint_idx].structure);
            add_aggregate(vox, 1.0 / static_cast<double>(vox.size()));
            row.rhs = inst.constraints[ref.constraint_idx].bound;
            break;
        }
        case RowRef::Kind::Min:
            add_voxel_row(ref.voxel, -1.0);
            row.rhs = -inst.constraints[ref.constraint_idx].bound;
            break;
    }
    return row;
}

double row_rhs(const Formulation& f, const RowRef& ref) {
    switch (ref.kind) {
        case RowRef::Kind::Epigraph: return 0.0;
        case RowRef::Kind::Max:
        case RowRef::Kind::Mean: return f.inst->constraints[ref.constraint_idx].bound;
        case RowRef::Kind::Min: return -f.inst->constraints[ref.constraint_idx].bound;
    }
    return 0.0;
}

// lhs - rhs given per-scenario dose vectors and the epigraph value.
double row_violation(const Formulation& f, const RowRef& ref,
                     const std::vector<std::vector<double>>& doses, double t) {
    const Instance& inst = *f.inst;
    const std::vector<double>& d = doses[ref.scenario_pos];
    switch (ref.kind) {
        case RowRef::Kind::Epigraph: {
            if (ref.voxel >= 0) return -d[ref.voxel] - t;
            double sum = 0.0;
            for (int v : inst.structure(inst.objective.target)) sum += d[v];
            return sum - t;
        }
        case RowRef::Kind::Max:
            return d[ref.voxel] - inst.constraints[ref.constraint_idx].bound;
        case RowRef::Kind::Mean: {
            const auto& vox = inst.structure(inst.constraints[ref.constraint_idx].structure);
            double sum = 0.0;
            for (int v : vox) sum += d[v];
            return sum / static_cast<double>(vox.size()) -
                   inst.constraints[ref.constraint_idx].bound;
        }
        case RowRef::Kind::Min:
            return inst.constraints[ref.constraint_idx].bound - d[ref.voxel];
    }
    return 0.0;
}

// Growth rate of a row's lhs along a ray (dose_rays = D^s r, dt = ray's t).
double row_rate(const Formulation& f, const RowRef& ref,
                const std::vector<std::vector<double>>& dose_rays, double dt) {
    const Instance& inst = *f.inst;
    const std::vector<double>& d = dose_rays[ref.scenario_pos];
    switch (ref.kind) {
        case RowRef::Kind::Epigraph: {
            if (ref.voxel >= 0) return -d[ref.voxel] - dt;
            double sum = 0.0;
            for (int v : inst.structure(inst.objective.target)) sum += d[v];
            return sum - dt;
        }
        case RowRef::Kind::Max:
            return d[ref.voxel];
        case RowRef::Kind::Mean: {
            const auto& vox = inst.structure(inst.constraints[ref.constraint_idx].structure);
            double sum = 0.0;
            for (int v : vox) sum += d[v];
            return sum / static_cast<double>(vox.size());
        }
        case RowRef::Kind::Min:
            return -d[ref.voxel];
    }
    return 0.0;
}

std::vector<double> expand_weights(const Formulation& f, const std::vector<double>& z) {
    std::vector<double> w(f.inst->beamlet_count(), 0.0);
    for (size_t k = 0; k < f.active_cols.size(); ++k) w[f.active_cols[k]] = std::max(0.0, z[k]);
    return w;
}

}  // namespace

LpSolution solve_robust_subproblem(const RobustSubproblem& sub) {
    if (!sub.instance) throw InvalidInstance("robust subproblem: null instance");
    const Instance& inst = *sub.instance;
    Formulation f = build_formulation(sub);
    const int n_rows = static_cast<int>(f.rows.size());
    const int n_scen = static_cast<int>(f.cluster.size());

    LpSolution sol;
    std::ostringstream log;

    // Working set, seeded with one epigraph row per scenario.
    std::vector<int> working;
    std::vector<char> in_working(n_rows, 0);
    {
        int r = 0;
        for (int pos = 0; pos < n_scen; ++pos) {
            while (r < n_rows && f.rows[r].scenario_pos < pos) ++r;
            // first row of each scenario block is an epigraph row by construction
            working.push_back(r);
            in_working[r] = 1;
            while (r < n_rows && f.rows[r].scenario_pos == pos) ++r;
        }
    }

    std::vector<DenseLp::Row> cached_rows(n_rows);
    std::vector<char> cached(n_rows, 0);
    auto row_of = [&](int idx) -> const DenseLp::Row& {
        if (!cached[idx]) {
            cached_rows[idx] = materialize_row(f, f.rows[idx]);
            cached[idx] = 1;
        }
        return cached_rows[idx];
    };

    std::vector<std::vector<double>> doses(n_scen);
    std::vector<double> weights;
    double t_lp = 0.0;
    SimplexOutcome last;
    long total_iters = 0;

    bool converged = false;
    for (int round = 1; round <= kMaxRounds; ++round) {
        DenseLp dlp;
        dlp.num_vars = f.n_lp_vars();
        dlp.objective.assign(dlp.num_vars, 0.0);
        dlp.objective[f.tp] = 1.0;
        dlp.objective[f.tm] = -1.0;
        dlp.rows.reserve(working.size());
        for (int idx : working) dlp.rows.push_back(row_of(idx));

        last = solve_dense_simplex(dlp);
        total_iters += last.iterations;

        if (last.status == SimplexOutcome::Status::Infeasible) {
            // A row subset can only be infeasible if the full problem is;
            // generated instances guarantee feasibility, so this is internal.
            throw SolverFailure("robust subproblem reported infeasible (contract violation)",
                                log.str());
        }
        if (last.status == SimplexOutcome::Status::IterLimit) {
            log << "simplex iteration limit in round " << round << "\n";
            sol.status = SolveStatus::NumericalFailure;
            sol.certificate.log = log.str();
            return sol;
        }
        if (last.status == SimplexOutcome::Status::Unbounded) {
            // Probe the descent ray against rows not yet in the working set;
            // whichever binds first per (scenario, constraint) enters.
            std::vector<double> ray_w = expand_weights(f, last.ray);
            const double dt = last.ray[f.tp] - last.ray[f.tm];
            std::vector<std::vector<double>> dose_rays(n_scen);
            for (int pos = 0; pos < n_scen; ++pos)
                f.scenario(pos).dose.multiply(ray_w, dose_rays[pos]);
            int added = 0;
            int best_per_group = -1;
            double best_rate = 1e-12;
            int last_group_scen = -1, last_group_con = -2;
            auto flush = [&]() {
                if (best_per_group >= 0 && !in_working[best_per_group]) {
                    working.push_back(best_per_group);
                    in_working[best_per_group] = 1;
                    ++added;
                }
                best_per_group = -1;
                best_rate = 1e-12;
            };
            for (int idx = 0; idx < n_rows; ++idx) {
                const RowRef& ref = f.rows[idx];
                if (ref.scenario_pos != last_group_scen || ref.constraint_idx != last_group_con) {
                    flush();
                    last_group_scen = ref.scenario_pos;
                    last_group_con = ref.constraint_idx;
                }
                if (in_working[idx]) continue;
                const double rate = row_rate(f, ref, dose_rays, dt);
                if (rate > best_rate) {
                    best_rate = rate;
                    best_per_group = idx;
                }
            }
            flush();
            if (added == 0) {
                throw SolverFailure(
                    "robust subproblem is unbounded: a beamlet influences the objective "
                    "but no constraint bounds it",
                    log.str());
            }
            log << "round " << round << ": unbounded ray, added " << added << " rows\n";
            continue;
        }

        // Optimal for the working set: scan the full row list for violations.
        weights = expand_weights(f, last.solution);
        t_lp = last.solution[f.tp] - last.solution[f.tm];
        for (int pos = 0; pos < n_scen; ++pos)
            f.scenario(pos).dose.multiply(weights, doses[pos]);
        int added = 0;
        for (int idx = 0; idx < n_rows; ++idx) {
            if (in_working[idx]) continue;
            const double viol = row_violation(f, f.rows[idx], doses, t_lp);
            const double rhs_scale = std::max(1.0, std::abs(row_rhs(f, f.rows[idx])));
            if (viol > kRowGenTol * rhs_scale) {
                working.push_back(idx);
                in_working[idx] = 1;
                ++added;
            }
        }
        if (added == 0) {
            converged = true;
            break;
        }
        log << "round " << round << ": added " << added << " violated rows\n";
    }

    if (!converged) {
        log << "row generation did not converge within " << kMaxRounds << " rounds\n";
        sol.status = SolveStatus::NumericalFailure;
        sol.certificate.log = log.str();
        return sol;
    }

    // Report the epigraph value recomputed from the weights so it matches
    // evaluate_plan bit-for-bit.
    double value = -std::numeric_limits<double>::infinity();
    for (int pos = 0; pos < n_scen; ++pos)
        value = std::max(value, objective_value(doses[pos], inst));

    Certificate& cert = sol.certificate;
    cert.rows_total = n_rows;
    cert.rows_generated = static_cast<int>(working.size());
    cert.simplex_iterations = total_iters;
    cert.slacks.resize(n_rows);
    cert.max_violation = 0.0;
    for (int idx = 0; idx < n_rows; ++idx) {
        const double viol = row_violation(f, f.rows[idx], doses, t_lp);
        cert.slacks[idx] = -viol;
        cert.max_violation = std::max(cert.max_violation, viol);
    }
    // Dual bound: working-row multipliers extend to the full problem with
    // zeros, so -y^T b bounds the full optimum from below.
    cert.dual_objective = 0.0;
    std::vector<double> reduced(f.n_lp_vars(), 0.0);
    reduced[f.tp] = 1.0;
    reduced[f.tm] = -1.0;
    for (size_t w = 0; w < working.size(); ++w) {
        const double y = last.duals[w];
        const DenseLp::Row& row = row_of(working[w]);
        cert.dual_objective -= y * row.rhs;
        if (y != 0.0)
            for (const auto& [c, v] : row.coeffs) reduced[c] += y * v;
    }
    cert.dual_violation = 0.0;
    for (double rc : reduced) cert.dual_violation = std::max(cert.dual_violation, -rc);
    cert.gap = std::abs(value - cert.dual_objective) / std::max(1.0, std::abs(value));
    cert.log = log.str();

    sol.weights = std::move(weights);
    sol.value = value;
    sol.status = SolveStatus::Optimal;
    return sol;
}

LpSolution solve_single_scenario(const Instance& instance, int scenario_id) {
    RobustSubproblem sub;
    sub.instance = &instance;
    sub.cluster = {scenario_id};
    sub.include_nominal = false;
    return solve_robust_subproblem(sub);
}

void write_lp_format(const RobustSubproblem& sub, std::ostream& os) {
    Formulation f = build_formulation(sub);
    auto term = [&](double coef, const std::string& name, bool first) {
        std::string s;
        if (coef < 0) {
            s += first ? "-" : "- ";
        } else if (!first) {
            s += "+ ";
        }
        const double mag = std::abs(coef);
        if (mag != 1.0) {
            s += format_double(mag);
            s += ' ';
        }
        s += name;
        s += ' ';
        return s;
    };

    os << "\\ cluster-robust epigraph subproblem";
    os << " (scenarios:";
    for (int id : f.cluster) os << ' ' << id;
    os << ")\n";
    os << "\\ beamlets with no objective or constraint influence are fixed to 0\n";
    os << "Minimize\n obj: t\nSubject To\n";
    for (size_t idx = 0; idx < f.rows.size(); ++idx) {
        const RowRef& ref = f.rows[idx];
        DenseLp::Row row = materialize_row(f, ref);
        std::string name;
        switch (ref.kind) {
            case RowRef::Kind::Epigraph: name = "epi"; break;
            case RowRef::Kind::Max: name = "max"; break;
            case RowRef::Kind::Mean: name = "mean"; break;
            case RowRef::Kind::Min: name = "min"; break;
        }
        name += "_s" + std::to_string(f.cluster[ref.scenario_pos]);
        if (ref.constraint_idx >= 0) name += "_c" + std::to_string(ref.constraint_idx);
        if (ref.voxel >= 0) name += "_v" + std::to_string(ref.voxel);
        os << ' ' << name << ": ";
        bool first = true;
        for (const auto& [c, v] : row.coeffs) {
            std::string var;
            if (c == f.tp) {
                var = "t";
            } else if (c == f.tm) {
                continue;  // t is written once, unsplit
            } else {
                var = "x" + std::to_string(f.active_cols[c]);
            }
            os << term(v, var, first);
            first = false;
        }
        if (first) os << "0 x" << (f.active_cols.empty() ? 0 : f.active_cols[0]) << ' ';
        os << "<= " << format_double(row.rhs) << "\n";
    }
    os << "Bounds\n t free\nEnd\n";
}

}  // namespace kadapt::lp
