#include "kadapt/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kadapt/errors.hpp"
#include "kadapt/evaluate.hpp"
#include "kadapt/format.hpp"
#include "kadapt/instgen.hpp"
#include "kadapt/io.hpp"
#include "kadapt/lp.hpp"
#include "kadapt/partition.hpp"

namespace kadapt::bench {

using nlohmann::json;

namespace {

std::string value_label_for(const Instance& instance) {
    return instance.objective.kind == ObjectiveKind::MinDoseInTarget ? "worst_case_Dmin"
                                                                     : "objective";
}

double reported_value(const Instance& instance, double w) {
    return instance.objective.kind == ObjectiveKind::MinDoseInTarget ? -w : w;
}

}  // namespace

MetricsRow compute_metrics(const heur::HeuristicRun& run, const Instance& instance,
                           const std::string& instance_name) {
    const int t = instance.scenario_count();
    if (static_cast<int>(run.records.size()) != t)
        throw InvalidInstance("compute_metrics: run does not cover K = 1..T");
    MetricsRow row;
    row.method = heur::method_name(run.method);
    row.instance = instance_name;
    row.value_label = value_label_for(instance);
    row.t = t;
    row.total_solver_calls = run.total_solver_calls;
    row.total_wall_time_s = run.total_wall_time_s;

    const double w_final = run.records[t - 1].w_star;
    int saturation = t;
    for (int k = 1; k <= t; ++k) {
        if (std::abs(run.records[k - 1].w_star - w_final) <= kValueTol) {
            saturation = k;
            break;
        }
    }
    row.saturation_k = saturation;

    const int sum_upto = std::min(10, t);
    row.sum_1_to_10 = 0.0;
    for (int k = 1; k <= t; ++k) {
        const heur::KRecord& rec = run.records[k - 1];
        KRow kr;
        kr.k = k;
        kr.w_star = rec.w_star;
        kr.reported = reported_value(instance, rec.w_star);
        kr.sum_flag = k <= sum_upto;
        kr.saturation_flag = k == saturation;
        kr.solver_calls = rec.solver_calls;
        kr.wall_time_s = rec.wall_time_s;
        kr.worst_cluster_size =
            rec.generation_trace.empty() ? 0 : rec.generation_trace.back().worst_cluster_size;
        if (kr.sum_flag) row.sum_1_to_10 += kr.reported;
        row.per_k.push_back(kr);
    }
    return row;
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "method,K,w_star,reported,sum_flag,saturation_flag,solver_calls,wall_time_s,"
        "worst_cluster_size\n";
    for (const MetricsRow& row : rows) {
        for (const KRow& k : row.per_k) {
            out += row.method;
            out += ',';
            out += std::to_string(k.k);
            out += ',';
            out += format_double(k.w_star);
            out += ',';
            out += format_double(k.reported);
            out += ',';
            out += k.sum_flag ? '1' : '0';
            out += ',';
            out += k.saturation_flag ? '1' : '0';
            out += ',';
            out += std::to_string(k.solver_calls);
            out += ',';
            out += format_double(k.wall_time_s);
            out += ',';
            out += std::to_string(k.worst_cluster_size);
            out += '\n';
        }
    }
    return out;
}

std::vector<MetricsRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV");
    if (line != "method,K,w_star,reported,sum_flag,saturation_flag,solver_calls,wall_time_s,"
                "worst_cluster_size")
        throw IoError("unexpected CSV header: " + line);
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) f.push_back(field);
        if (f.size() != 9) throw IoError("bad CSV row: " + line);
        if (rows.empty() || rows.back().method != f[0]) {
            rows.emplace_back();
            rows.back().method = f[0];
        }
        KRow k;
        k.k = std::stoi(f[1]);
        k.w_star = std::stod(f[2]);
        k.reported = std::stod(f[3]);
        k.sum_flag = f[4] == "1";
        k.saturation_flag = f[5] == "1";
        k.solver_calls = std::stol(f[6]);
        k.wall_time_s = std::stod(f[7]);
        k.worst_cluster_size = std::stoi(f[8]);
        rows.back().per_k.push_back(k);
    }
    for (MetricsRow& row : rows) {
        row.t = static_cast<int>(row.per_k.size());
        row.sum_1_to_10 = 0.0;
        for (const KRow& k : row.per_k) {
            if (k.sum_flag) row.sum_1_to_10 += k.reported;
            if (k.saturation_flag) row.saturation_k = k.k;
        }
    }
    return rows;
}

std::string summary_to_json(const std::vector<MetricsRow>& rows, const std::string& instance_name,
                            int t, const std::string& value_label) {
    json j;
    j["format"] = "kadapt-run-summary";
    j["version"] = 1;
    j["instance"] = instance_name;
    j["t"] = t;
    j["value_label"] = value_label;
    json methods = json::array();
    for (const MetricsRow& row : rows) {
        json m;
        m["method"] = row.method;
        m["sum_1_to_10"] = row.sum_1_to_10;
        m["saturation_k"] = row.saturation_k;
        m["total_solver_calls"] = row.total_solver_calls;
        m["total_wall_time_s"] = row.total_wall_time_s;
        json per_k = json::array();
        for (const KRow& k : row.per_k) {
            per_k.push_back({{"k", k.k},
                             {"w_star", k.w_star},
                             {"reported", k.reported},
                             {"solver_calls", k.solver_calls},
                             {"wall_time_s", k.wall_time_s},
                             {"worst_cluster_size", k.worst_cluster_size}});
        }
        m["per_k"] = per_k;
        methods.push_back(std::move(m));
    }
    j["methods"] = methods;
    return j.dump(1);
}

RunPaths run_and_write(const Instance& instance, const std::string& instance_name,
                       const std::vector<heur::Method>& methods, const std::string& out_dir,
                       const heur::RunConfig& config) {
    if (methods.empty()) throw InvalidInstance("no methods selected");
    std::filesystem::create_directories(out_dir);
    std::vector<MetricsRow> rows;
    RunPaths paths;
    for (heur::Method m : methods) {
        std::ostringstream log;
        heur::RunConfig cfg = config;
        cfg.run_log = &log;
        heur::HeuristicRun run = heur::run_method(instance, m, cfg);
        rows.push_back(compute_metrics(run, instance, instance_name));
        const std::string log_path =
            out_dir + "/run_" + heur::method_name(m) + ".log.jsonl";
        io::write_file(log_path, log.str());
        paths.logs.push_back(log_path);
    }
    paths.csv = out_dir + "/results.csv";
    paths.summary = out_dir + "/summary.json";
    io::write_file(paths.csv, to_csv(rows));
    io::write_file(paths.summary,
                   summary_to_json(rows, instance_name, instance.scenario_count(),
                                   value_label_for(instance)) +
                       "\n");
    return paths;
}

int run_benchmark(const BenchConfig& config) {
    if (config.methods.empty()) {
        std::cerr << "no methods selected\n";
        return 2;
    }
    if (config.instance_paths.empty()) {
        std::cerr << "no instances given\n";
        return 2;
    }
    struct Job {
        std::string path;
        std::string name;
        heur::Method method;
        MetricsRow row;
        std::string log;
        std::string error;
    };
    std::vector<Job> jobs;
    std::map<std::string, Instance> instances;
    for (const std::string& path : config.instance_paths) {
        Instance inst = io::read_instance(path);
        const std::string name = std::filesystem::path(path).stem().string();
        instances.emplace(path, std::move(inst));
        for (heur::Method m : config.methods) jobs.push_back({path, name, m, {}, {}, {}});
    }

    auto run_job = [&](Job& job) {
        try {
            std::ostringstream log;
            heur::RunConfig cfg = config.run;
            cfg.run_log = &log;
            heur::HeuristicRun run = heur::run_method(instances.at(job.path), job.method, cfg);
            job.row = compute_metrics(run, instances.at(job.path), job.name);
            job.log = log.str();
        } catch (const std::exception& e) {
            job.error = e.what();
        }
    };

    const int workers = std::max(1, config.workers);
    if (workers > 1 && jobs.size() > 1) {
        std::vector<std::thread> threads;
        const int nw = std::min<size_t>(workers, jobs.size());
        std::atomic<size_t> next{0};
        for (int w = 0; w < nw; ++w)
            threads.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                    run_job(jobs[i]);
            });
        for (auto& th : threads) th.join();
    } else {
        for (Job& job : jobs) run_job(job);
    }

    bool failed = false;
    std::filesystem::create_directories(config.out_dir);
    json merged;
    merged["format"] = "kadapt-bench-summary";
    merged["version"] = 1;
    json inst_list = json::array();
    for (const std::string& path : config.instance_paths) {
        const std::string name = std::filesystem::path(path).stem().string();
        const std::string dir = config.out_dir + "/" + name;
        std::filesystem::create_directories(dir);
        std::vector<MetricsRow> rows;
        for (Job& job : jobs) {
            if (job.path != path) continue;
            if (!job.error.empty()) {
                std::cerr << "solver failure on " << name << "/" << heur::method_name(job.method)
                          << ": " << job.error << "\n";
                failed = true;
                continue;
            }
            rows.push_back(job.row);
            io::write_file(dir + "/run_" + heur::method_name(job.method) + ".log.jsonl", job.log);
        }
        if (!rows.empty()) {
            const Instance& inst = instances.at(path);
            io::write_file(dir + "/results.csv", to_csv(rows));
            io::write_file(dir + "/summary.json",
                           summary_to_json(rows, name, inst.scenario_count(),
                                           value_label_for(inst)) +
                               "\n");
            json entry;
            entry["instance"] = name;
            json per_method = json::array();
            for (const MetricsRow& row : rows) {
                per_method.push_back({{"method", row.method},
                                      {"sum_1_to_10", row.sum_1_to_10},
                                      {"saturation_k", row.saturation_k},
                                      {"total_solver_calls", row.total_solver_calls},
                                      {"total_wall_time_s", row.total_wall_time_s}});
            }
            entry["methods"] = per_method;
            inst_list.push_back(std::move(entry));
        }
    }
    merged["instances"] = inst_list;
    io::write_file(config.out_dir + "/bench_summary.json", merged.dump(1) + "\n");
    return failed ? 1 : 0;
}

double exact_min_max_min(const Instance& instance, int K, const heur::RunConfig& config) {
    const int t = instance.scenario_count();
    if (t > 10) throw InvalidInstance("exact_min_max_min: T > 10 refused");
    if (K < 1) throw InvalidInstance("exact_min_max_min: K must be >= 1");
    const bool include_nominal =
        config.include_nominal.value_or(instance.nominal_id.has_value());

    // All 2^T - 1 cluster-robust values, then a min-max DP over set partitions.
    const int full = (1 << t) - 1;
    std::vector<double> cluster_value(full + 1, 0.0);
    for (int mask = 1; mask <= full; ++mask) {
        lp::RobustSubproblem sub;
        sub.instance = &instance;
        sub.include_nominal = include_nominal;
        for (int j = 0; j < t; ++j)
            if (mask & (1 << j)) sub.cluster.push_back(j);
        lp::LpSolution sol = lp::solve_robust_subproblem(sub);
        if (sol.status != lp::SolveStatus::Optimal)
            throw SolverFailure("exact_min_max_min: cluster solve failed");
        cluster_value[mask] = sol.value;
    }

    const double inf = std::numeric_limits<double>::infinity();
    const int k_cap = std::min(K, t);
    std::vector<std::vector<double>> memo(full + 1, std::vector<double>(k_cap + 1, inf));
    for (int k = 0; k <= k_cap; ++k) memo[0][k] = -inf;
    for (int mask = 1; mask <= full; ++mask) {
        const int low = mask & -mask;
        for (int k = 1; k <= k_cap; ++k) {
            double best = inf;
            // submasks of mask containing the lowest set bit
            for (int sub = mask; sub; sub = (sub - 1) & mask) {
                if (!(sub & low)) continue;
                const double rest = memo[mask ^ sub][k - 1];
                const double v = std::max(cluster_value[sub], rest);
                best = std::min(best, v);
            }
            memo[mask][k] = best;
        }
    }
    return memo[full][k_cap];
}

namespace {

PropertyResult check(const std::string& name, bool pass, const std::string& detail) {
    return {name, pass, detail};
}

}  // namespace

std::vector<PropertyResult> verify_instance(const Instance& instance, bool quick,
                                            const heur::RunConfig& config) {
    std::vector<PropertyResult> out;
    instance.validate();
    const int t = instance.scenario_count();
    const bool include_nominal =
        config.include_nominal.value_or(instance.nominal_id.has_value());

    // Zero plan feasibility (overdose-only families).
    if (instance.overdose_only()) {
        PlanSolution zero;
        zero.id = -1;
        zero.weights.assign(instance.beamlet_count(), 0.0);
        bool ok = true;
        std::string detail;
        for (const Scenario& s : instance.scenarios) {
            PlanEval e = evaluate_plan(zero, s, instance);
            if (!e.feasible || e.value != 0.0) {
                ok = false;
                detail = "scenario " + std::to_string(s.id);
                break;
            }
        }
        out.push_back(check("zero_plan_feasible", ok, detail));
    } else {
        out.push_back(check("zero_plan_feasible", true, "not applicable (underdose family)"));
    }

    // Partition canonicalization is order-independent.
    {
        Partition p;
        for (int j = 0; j < t; ++j) {
            if (j % 2 == 0 || p.empty())
                p.push_back({j});
            else
                p.back().push_back(j);
        }
        Partition shuffled = p;
        std::reverse(shuffled.begin(), shuffled.end());
        for (auto& b : shuffled) std::reverse(b.begin(), b.end());
        const bool ok = canonicalize_partition(p, t) == canonicalize_partition(shuffled, t);
        out.push_back(check("canonical_partition_shuffle_invariance", ok, ""));
    }

    // Full-set robust solve: certificate and evaluator agreement.
    lp::RobustSubproblem full;
    full.instance = &instance;
    full.include_nominal = include_nominal;
    for (int j = 0; j < t; ++j) full.cluster.push_back(j);
    lp::LpSolution sol = lp::solve_robust_subproblem(full);
    {
        const bool ok = sol.status == lp::SolveStatus::Optimal &&
                        sol.certificate.gap <= lp::kOptTol;
        out.push_back(check("lp_certificate_gap", ok,
                            "gap=" + format_double(sol.certificate.gap)));
    }
    {
        PlanSolution plan;
        plan.id = -1;
        plan.weights = sol.weights;
        bool feas_ok = true;
        double worst = -std::numeric_limits<double>::infinity();
        for (const Scenario& s : instance.scenarios) {
            PlanEval e = evaluate_plan(plan, s, instance);
            feas_ok = feas_ok && e.feasible;
            worst = std::max(worst, e.value);
        }
        const bool ok = feas_ok && std::abs(worst - sol.value) <= kValueTol;
        out.push_back(check("lp_evaluator_agreement", ok,
                            "worst=" + format_double(worst) +
                                " t*=" + format_double(sol.value)));
    }

    // Monotonicity over nested clusters.
    {
        lp::RobustSubproblem half = full;
        half.cluster.resize(std::max<size_t>(1, full.cluster.size() / 2));
        lp::RobustSubproblem single = full;
        single.cluster = {0};
        const double v1 = lp::solve_robust_subproblem(single).value;
        const double vh = lp::solve_robust_subproblem(half).value;
        const bool ok = v1 <= vh + kValueTol && vh <= sol.value + kValueTol;
        out.push_back(check("lp_cluster_monotonicity", ok,
                            format_double(v1) + " <= " + format_double(vh) +
                                " <= " + format_double(sol.value)));
    }

    // Positive homogeneity: scaling every bound by 2 scales the value by 2.
    {
        Instance scaled = instance;
        for (ConstraintSpec& c : scaled.constraints) c.bound *= 2.0;
        lp::RobustSubproblem sub = full;
        sub.instance = &scaled;
        const double v2 = lp::solve_robust_subproblem(sub).value;
        const double rel =
            std::abs(v2 - 2.0 * sol.value) / std::max(1.0, std::abs(2.0 * sol.value));
        out.push_back(check("lp_homogeneity", rel <= lp::kOptTol, "rel=" + format_double(rel)));
    }

    // Dense grid-search oracle at tiny scale.
    if (!quick && instance.beamlet_count() <= 2) {
        const double diff = [&] {
            const int n = instance.beamlet_count();
            std::vector<double> hi(n, 0.0);
            for (int j = 0; j < n; ++j) {
                double bound = std::numeric_limits<double>::infinity();
                for (const Scenario& s : instance.scenarios) {
                    for (const ConstraintSpec& c : instance.constraints) {
                        if (c.kind == ConstraintKind::MinDose) continue;
                        for (int v : instance.structure(c.structure)) {
                            const double coef = s.dose.at(v, j);
                            if (coef > 1e-12) bound = std::min(bound, c.bound / coef);
                        }
                    }
                }
                hi[j] = std::min(bound, 1e4);
                if (!instance.overdose_only()) hi[j] = std::min(2.0 * hi[j] + 2.0, 1e4);
            }
            const int steps = 1000;
            PlanSolution plan;
            plan.id = -1;
            plan.weights.assign(n, 0.0);
            double best = std::numeric_limits<double>::infinity();
            auto eval_point = [&]() {
                double worst = -std::numeric_limits<double>::infinity();
                for (const Scenario& s : instance.scenarios) {
                    PlanEval e = evaluate_plan(plan, s, instance);
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
            return std::abs(best - sol.value);
        }();
        out.push_back(check("lp_grid_oracle", diff <= 1e-2, "diff=" + format_double(diff)));
    }

    // The hitting-set reduction iff, for that family at desk scale.
    if (!quick) {
        try {
            json meta = json::parse(instance.metadata_json);
            if (meta.value("family", "") == "hitting_set" && instance.beamlet_count() <= 8 &&
                t <= 6) {
                gen::HittingSetSpec spec;
                spec.n_items = meta.at("n_items").get<int>();
                spec.k_query = meta.at("k_query").get<int>();
                spec.sets = meta.at("sets").get<std::vector<std::vector<int>>>();
                const bool yes = gen::hitting_set_oracle(spec);
                const double value = exact_min_max_min(instance, spec.k_query, config);
                const bool is_zero = std::abs(value) <= 1e-6;
                out.push_back(check("hitting_set_iff", yes == is_zero,
                                    "value=" + format_double(value) +
                                        " oracle=" + (yes ? std::string("yes") : "no")));
            }
        } catch (const json::exception&) {
            // no usable metadata; skip the family check
        }
    }
    return out;
}

}  // namespace kadapt::bench
