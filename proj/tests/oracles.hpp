// Test-side oracles: independent brute-force references for the exact solvers.
// These deliberately use plain loops (no branch and bound, no threshold
// search) so they share no code path with the implementations they check.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <tuple>
#include <vector>

#include "kadapt/evaluate.hpp"
#include "kadapt/lp.hpp"
#include "kadapt/types.hpp"

namespace oracles {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DenseValues {
    int rows = 0, cols = 0;
    std::vector<double> v;
    std::vector<std::uint8_t> ok;
    double value(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
    bool usable(int i, int j) const { return ok[static_cast<size_t>(i) * cols + j] != 0; }
};

inline DenseValues dense_of(const kadapt::ValueMatrix& vm) {
    DenseValues d;
    d.rows = vm.plan_count();
    d.cols = vm.scenario_count();
    for (int i = 0; i < d.rows; ++i)
        for (int j = 0; j < d.cols; ++j) {
            d.v.push_back(vm.value(i, j));
            d.ok.push_back(vm.feasible(i, j) ? 1 : 0);
        }
    return d;
}

// Worst-case assignment MIP by full subset enumeration.
inline double enumerate_worst_case(const DenseValues& d, int K) {
    double best = kInf;
    for (std::uint32_t mask = 1; mask < (1u << d.rows); ++mask) {
        if (std::popcount(mask) > K) continue;
        double worst = -kInf;
        bool valid = true;
        for (int j = 0; j < d.cols && valid; ++j) {
            double m = kInf;
            for (int i = 0; i < d.rows; ++i)
                if ((mask & (1u << i)) && d.usable(i, j)) m = std::min(m, d.value(i, j));
            if (m == kInf)
                valid = false;
            else
                worst = std::max(worst, m);
        }
        if (valid) best = std::min(best, worst);
    }
    return best;
}

struct ParetoCandidate {
    double sum = kInf;
    std::vector<int> used;
    std::vector<int> assignment;
    bool valid = false;
};

// Pareto assignment MIP by full subset enumeration with the documented tie
// rule: smallest sum, then lexicographically smallest used-plan set, then
// lexicographically smallest assignment vector.
inline ParetoCandidate enumerate_pareto(const DenseValues& d, int K, double w_star,
                                        double tol = 1e-9) {
    ParetoCandidate best;
    for (std::uint32_t mask = 1; mask < (1u << d.rows); ++mask) {
        if (std::popcount(mask) > K) continue;
        ParetoCandidate cand;
        cand.sum = 0.0;
        cand.assignment.assign(d.cols, -1);
        bool valid = true;
        for (int j = 0; j < d.cols && valid; ++j) {
            double m = kInf;
            int arg = -1;
            for (int i = 0; i < d.rows; ++i) {
                if (!(mask & (1u << i)) || !d.usable(i, j)) continue;
                if (d.value(i, j) < m) {
                    m = d.value(i, j);
                    arg = i;
                }
            }
            if (arg < 0 || m > w_star + tol) {
                valid = false;
            } else {
                cand.sum += m;
                cand.assignment[j] = arg;
            }
        }
        if (!valid) continue;
        cand.valid = true;
        cand.used = cand.assignment;
        std::sort(cand.used.begin(), cand.used.end());
        cand.used.erase(std::unique(cand.used.begin(), cand.used.end()), cand.used.end());
        bool better;
        if (!best.valid) {
            better = true;
        } else if (cand.sum < best.sum - tol) {
            better = true;
        } else if (cand.sum > best.sum + tol) {
            better = false;
        } else if (cand.used != best.used) {
            better = cand.used < best.used;
        } else {
            better = cand.assignment < best.assignment;
        }
        if (better) best = cand;
    }
    return best;
}

struct MedoidsCandidate {
    double cost = kInf;
    std::vector<int> medoids;
    bool valid = false;
};

inline MedoidsCandidate enumerate_k_medoids(const std::vector<double>& dist, int t, int K,
                                            double tol = 1e-9) {
    MedoidsCandidate best;
    for (std::uint32_t mask = 1; mask < (1u << t); ++mask) {
        if (std::popcount(mask) > K) continue;
        double cost = 0.0;
        for (int b = 0; b < t; ++b) {
            double m = kInf;
            for (int a = 0; a < t; ++a)
                if (mask & (1u << a)) m = std::min(m, dist[static_cast<size_t>(a) * t + b]);
            cost += m;
        }
        std::vector<int> meds;
        for (int a = 0; a < t; ++a)
            if (mask & (1u << a)) meds.push_back(a);
        bool better;
        if (!best.valid) {
            better = true;
        } else if (cost < best.cost - tol) {
            better = true;
        } else if (cost > best.cost + tol) {
            better = false;
        } else {
            better = meds < best.medoids;
        }
        if (better) {
            best.valid = true;
            best.cost = cost;
            best.medoids = meds;
        }
    }
    return best;
}

// Exact min-max-min by enumerating scenario partitions into <= K clusters and
// solving each cluster to optimality.
inline double partition_exact_min_max_min(const kadapt::Instance& inst, int K,
                                          bool include_nominal) {
    const int t = inst.scenario_count();
    std::vector<double> cluster_value(1 << t, kInf);
    for (int mask = 1; mask < (1 << t); ++mask) {
        kadapt::lp::RobustSubproblem sub;
        sub.instance = &inst;
        sub.include_nominal = include_nominal;
        for (int j = 0; j < t; ++j)
            if (mask & (1 << j)) sub.cluster.push_back(j);
        cluster_value[mask] = kadapt::lp::solve_robust_subproblem(sub).value;
    }
    double best = kInf;
    std::vector<int> blocks;
    auto rec = [&](auto&& self, int assigned_mask, double worst) -> void {
        if (worst >= best) return;
        if (assigned_mask == (1 << t) - 1) {
            best = std::min(best, worst);
            return;
        }
        if (static_cast<int>(blocks.size()) == K) return;
        // extend with a block containing the lowest unassigned scenario
        const int rest = ((1 << t) - 1) ^ assigned_mask;
        const int low = rest & -rest;
        for (int sub = rest; sub; sub = (sub - 1) & rest) {
            if (!(sub & low)) continue;
            blocks.push_back(sub);
            self(self, assigned_mask | sub, std::max(worst, cluster_value[sub]));
            blocks.pop_back();
        }
    };
    rec(rec, 0, -kInf);
    return best;
}

// Dense grid search over <= 2 beamlets: minimize the worst-case objective over
// feasible weight boxes, step = 1e-3 of the box edge.
inline double grid_search_robust(const kadapt::Instance& inst,
                                 const std::vector<int>& cluster, int steps = 1000) {
    const int n = inst.beamlet_count();
    std::vector<double> hi(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double bound = kInf;
        for (int sid : cluster) {
            const kadapt::Scenario& s = inst.scenarios[sid];
            for (const kadapt::ConstraintSpec& c : inst.constraints) {
                if (c.kind == kadapt::ConstraintKind::MinDose) continue;
                for (int v : inst.structure(c.structure)) {
                    const double coef = s.dose.at(v, j);
                    if (coef > 1e-12) bound = std::min(bound, c.bound / coef);
                }
            }
        }
        hi[j] = bound == kInf ? 100.0 : bound;
    }
    kadapt::PlanSolution plan;
    plan.id = -1;
    plan.weights.assign(n, 0.0);
    double best = kInf;
    auto eval_point = [&]() {
        double worst = -kInf;
        for (int sid : cluster) {
            kadapt::PlanEval e = kadapt::evaluate_plan(plan, inst.scenarios[sid], inst);
            if (!e.feasible) return;
            worst = std::max(worst, e.value);
        }
        best = std::min(best, worst);
    };
    if (n == 1) {
        for (int a = 0; a <= steps; ++a) {
            plan.weights[0] = hi[0] * a / steps;
            eval_point();
        }
    } else {
        for (int a = 0; a <= steps; ++a)
            for (int b = 0; b <= steps; ++b) {
                plan.weights[0] = hi[0] * a / steps;
                plan.weights[1] = hi[1] * b / steps;
                eval_point();
            }
    }
    return best;
}

// Random tiny overdose-only instance. Values are drawn from a coarse discrete
// set so float ties in the solvers are exact.
inline kadapt::Instance random_tiny_instance(std::mt19937_64& eng, int t, int voxels,
                                             int beamlets) {
    auto uniform = [&eng] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    kadapt::Instance inst;
    for (int s = 0; s < t; ++s) {
        std::vector<std::tuple<int, int, double>> trip;
        for (int v = 0; v < voxels; ++v)
            for (int b = 0; b < beamlets; ++b) {
                const double u = uniform();
                if (u < 0.7) {
                    const double val = 0.25 * (1 + static_cast<int>(uniform() * 8));
                    trip.emplace_back(v, b, val);
                }
            }
        // every beamlet needs some constraint influence so the LP is bounded:
        // voxel 0 (always in the target, which carries a max-dose bound) gets
        // a guaranteed entry.
        for (int b = 0; b < beamlets; ++b) trip.emplace_back(0, b, 0.5);
        kadapt::Scenario sc;
        sc.id = s;
        sc.dose = kadapt::CsrMatrix::from_triplets(voxels, beamlets, std::move(trip));
        sc.label = "rand" + std::to_string(s);
        inst.scenarios.push_back(std::move(sc));
    }
    std::vector<int> target;
    const int target_size = std::max(1, voxels / 2);
    for (int v = 0; v < target_size; ++v) target.push_back(v);
    inst.structures["target"] = target;
    if (voxels > target_size) {
        std::vector<int> oar;
        for (int v = target_size; v < voxels; ++v) oar.push_back(v);
        inst.structures["oar"] = oar;
        inst.constraints.push_back({"oar", kadapt::ConstraintKind::MeanDose, 8.0});
    }
    inst.objective = {kadapt::ObjectiveKind::MinDoseInTarget, "target"};
    inst.constraints.push_back({"target", kadapt::ConstraintKind::MaxDose, 10.0});
    inst.metadata_json = "{\"family\":\"random_tiny\"}";
    inst.validate();
    return inst;
}

// Instance with one target voxel, one beamlet, per-scenario dose rates, and a
// max-dose bound: everything about it is analytic.
inline kadapt::Instance single_cell_instance(const std::vector<double>& rates, double bound) {
    kadapt::Instance inst;
    for (size_t s = 0; s < rates.size(); ++s) {
        kadapt::Scenario sc;
        sc.id = static_cast<int>(s);
        sc.dose = kadapt::CsrMatrix::from_dense({{rates[s]}});
        sc.label = "rate=" + std::to_string(rates[s]);
        inst.scenarios.push_back(std::move(sc));
    }
    inst.structures["target"] = {0};
    inst.objective = {kadapt::ObjectiveKind::MinDoseInTarget, "target"};
    inst.constraints = {{"target", kadapt::ConstraintKind::MaxDose, bound}};
    inst.metadata_json = "{\"family\":\"single_cell\"}";
    inst.validate();
    return inst;
}

}  // namespace oracles
