#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kadapt/assign.hpp"
#include "kadapt/evaluate.hpp"
#include "kadapt/partition.hpp"
#include "kadapt/types.hpp"

namespace kadapt::heur {

enum class Method { Main, Lsp, Aosg, KMedoids };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

enum class GenOrder { Descending, Ascending };
enum class PoolMode { Global, Local };
enum class Timing { Real, Zero };

struct RunConfig {
    /// Merge the nominal scenario into every cluster solve. Defaults to true
    /// when the instance declares a nominal scenario.
    std::optional<bool> include_nominal;
    int workers = 1;
    long iteration_cap = 1000;  // per-K guard; must never fire on valid input
    Timing timing = Timing::Real;
    std::ostream* run_log = nullptr;  // JSON-lines iteration log
};

struct IterationTrace {
    int iteration = 0;
    double w = 0.0;              // worst-case value of this iteration's assignment
    Partition partition;         // canonical clusters
    int worst_cluster_size = 0;  // size of the cluster holding the worst scenario
    int new_plans = 0;
    long solver_calls_total = 0; // cumulative robust solves at this point
    double elapsed_s = 0.0;
};

struct KRecord {
    int k = 0;
    std::vector<int> best_plans;  // X*_K (redistribution; own plans for K-medoids)
    double w_star = 0.0;
    std::vector<IterationTrace> generation_trace;
    long solver_calls = 0;        // robust solves attributed to this K
    double wall_time_s = 0.0;
};

struct HeuristicRun {
    Method method = Method::Main;
    std::vector<KRecord> records;  // index K-1, every K = 1..T exactly once
    std::vector<PlanSolution> pool;
    ValueMatrix values;  // complete over the pool
    std::map<int, std::vector<Partition>> partition_history;  // per K, visit order
    long init_solver_calls = 0;    // the per-scenario warm-up solves
    long total_solver_calls = 0;
    double total_wall_time_s = 0.0;
};

struct GenerationOutput {
    std::vector<PlanSolution> pool;
    ValueMatrix values;
    std::vector<KRecord> records;  // generation-phase traces; w_star = last iteration w
    std::map<int, std::vector<Partition>> partition_history;
    long init_solver_calls = 0;
    long total_solver_calls = 0;
    double wall_time_s = 0.0;
};

/// Phase 1: iterative solution generation. Seeds the pool with per-scenario
/// optima, then for each K (in the given order) alternates the two assignment
/// MIPs with cluster-robust solves until a partition repeats. Local pool mode
/// restarts each K from the initial solutions while still accumulating
/// everything globally. Robust solves are memoized by canonical cluster.
GenerationOutput run_generation_phase(const Instance& instance, GenOrder order,
                                      PoolMode pool_mode, const RunConfig& config = {});

/// Phase 2: for each K re-select the best K plans from the full pool.
std::vector<KRecord> run_redistribution_phase(const GenerationOutput& generation,
                                              const Instance& instance,
                                              const RunConfig& config = {});

HeuristicRun run_main(const Instance& instance, const RunConfig& config = {});
HeuristicRun run_lsp(const Instance& instance, const RunConfig& config = {});
HeuristicRun run_aosg(const Instance& instance, const RunConfig& config = {});

/// Baseline: exact K-medoids clusters in dose-matrix space, one robust plan
/// per cluster, each scenario evaluated on its best feasible plan of the K.
/// No redistribution across K values.
HeuristicRun run_kmedoids_pipeline(const Instance& instance, const RunConfig& config = {});

HeuristicRun run_method(const Instance& instance, Method method, const RunConfig& config = {});

}  // namespace kadapt::heur
