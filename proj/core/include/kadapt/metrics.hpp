#pragma once

#include <string>
#include <vector>

#include "kadapt/heuristics.hpp"
#include "kadapt/types.hpp"

namespace kadapt::bench {

struct KRow {
    int k = 0;
    double w_star = 0.0;    // internal (minimization) value
    double reported = 0.0;  // presentation scale: -w_star for min-dose objectives
    bool sum_flag = false;  // K counted in the sum metric
    bool saturation_flag = false;
    long solver_calls = 0;
    double wall_time_s = 0.0;
    int worst_cluster_size = 0;
};

struct MetricsRow {
    std::string method;
    std::string instance;
    std::string value_label;  // "worst_case_Dmin" or "objective"
    int t = 0;
    double sum_1_to_10 = 0.0;
    int saturation_k = 0;
    long total_solver_calls = 0;
    double total_wall_time_s = 0.0;
    std::vector<KRow> per_k;
};

/// Reduces a heuristic run to the evaluation metrics: the reported-value sum
/// over K = 1..min(10,T) and the saturation K (smallest K whose value matches
/// K = T within tolerance), plus the per-K trace columns.
MetricsRow compute_metrics(const heur::HeuristicRun& run, const Instance& instance,
                           const std::string& instance_name = "");

/// CSV schema:
/// method,K,w_star,reported,sum_flag,saturation_flag,solver_calls,wall_time_s,worst_cluster_size
std::string to_csv(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_csv(const std::string& text);

std::string summary_to_json(const std::vector<MetricsRow>& rows, const std::string& instance_name,
                            int t, const std::string& value_label);

struct RunPaths {
    std::string csv;
    std::string summary;
    std::vector<std::string> logs;
};

/// Runs the given methods on one instance and writes results.csv,
/// summary.json, and run_<method>.log.jsonl under out_dir.
RunPaths run_and_write(const Instance& instance, const std::string& instance_name,
                       const std::vector<heur::Method>& methods, const std::string& out_dir,
                       const heur::RunConfig& config);

struct BenchConfig {
    std::vector<std::string> instance_paths;
    std::vector<heur::Method> methods;
    std::string out_dir;
    int workers = 1;  // fan-out across (instance, method) pairs
    heur::RunConfig run;
};

/// Benchmark protocol: every (instance, method) pair, one output directory per
/// instance, plus a merged bench_summary.json. Returns a process exit code
/// (nonzero on any solver failure).
int run_benchmark(const BenchConfig& config);

/// Exact min-max-min value for K plans by enumerating scenario partitions
/// into at most K clusters (each cluster solved to optimality). Desk scale
/// only; refuses T > 10.
double exact_min_max_min(const Instance& instance, int K, const heur::RunConfig& config = {});

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Instance-level invariant suite: evaluator/LP consistency, monotonicity,
/// homogeneity, certificate quality; grid-search oracle at tiny scale; the
/// hitting-set iff when the instance is from that family. `quick` skips the
/// exhaustive parts.
std::vector<PropertyResult> verify_instance(const Instance& instance, bool quick,
                                            const heur::RunConfig& config = {});

}  // namespace kadapt::bench
