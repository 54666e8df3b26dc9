#include "kadapt/heuristics.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

#include "kadapt/errors.hpp"
#include "kadapt/format.hpp"
#include "kadapt/lp.hpp"

namespace kadapt::heur {

std::string method_name(Method m) {
    switch (m) {
        case Method::Main: return "main";
        case Method::Lsp: return "lsp";
        case Method::Aosg: return "aosg";
        case Method::KMedoids: return "kmedoids";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "main") return Method::Main;
    if (name == "lsp") return Method::Lsp;
    if (name == "aosg") return Method::Aosg;
    if (name == "kmedoids") return Method::KMedoids;
    return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start, Timing timing) {
    if (timing == Timing::Zero) return 0.0;
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string cluster_key(const std::vector<int>& sorted_ids) {
    std::string key;
    for (size_t i = 0; i < sorted_ids.size(); ++i) {
        if (i) key += ',';
        key += std::to_string(sorted_ids[i]);
    }
    return key;
}

// Shared solve state: the global pool, its value matrix, and the
// cluster-keyed memo of robust solves.
struct SolveState {
    const Instance* inst = nullptr;
    bool include_nominal = true;
    int workers = 1;
    std::vector<PlanSolution> pool;
    ValueMatrix values;
    std::map<std::string, int> cluster_plan;  // effective-cluster key -> plan id
    long solver_calls = 0;

    std::vector<int> effective_cluster(const std::vector<int>& raw) const {
        std::set<int> ids(raw.begin(), raw.end());
        if (include_nominal && inst->nominal_id) ids.insert(*inst->nominal_id);
        return {ids.begin(), ids.end()};
    }

    // Plans for a batch of clusters; unseen clusters are solved (in parallel
    // when configured) and appended to the pool in batch order. Returns plan
    // ids aligned with `clusters` and the number of fresh solves.
    std::pair<std::vector<int>, int> plans_for_clusters(
        const std::vector<std::vector<int>>& clusters, PhaseTag tag, int at_k) {
        std::vector<int> ids(clusters.size(), -1);
        std::vector<std::pair<int, std::vector<int>>> missing;  // batch pos, effective
        std::set<std::string> batch_seen;
        for (size_t c = 0; c < clusters.size(); ++c) {
            std::vector<int> eff = effective_cluster(clusters[c]);
            const std::string key = cluster_key(eff);
            auto it = cluster_plan.find(key);
            if (it != cluster_plan.end()) {
                ids[c] = it->second;
            } else if (batch_seen.insert(key).second) {
                missing.emplace_back(static_cast<int>(c), std::move(eff));
            }
        }
        std::vector<lp::LpSolution> solved(missing.size());
        auto solve_one = [&](size_t m) {
            lp::RobustSubproblem sub;
            sub.instance = inst;
            sub.cluster = missing[m].second;
            sub.include_nominal = false;  // already merged
            solved[m] = lp::solve_robust_subproblem(sub);
        };
        if (workers > 1 && missing.size() > 1) {
            std::vector<std::thread> threads;
            const int nw = std::min<size_t>(workers, missing.size());
            for (int w = 0; w < nw; ++w)
                threads.emplace_back([&, w] {
                    for (size_t m = w; m < missing.size(); m += nw) solve_one(m);
                });
            for (auto& th : threads) th.join();
        } else {
            for (size_t m = 0; m < missing.size(); ++m) solve_one(m);
        }
        for (size_t m = 0; m < missing.size(); ++m) {
            if (solved[m].status != lp::SolveStatus::Optimal)
                throw SolverFailure("robust subproblem failed on cluster " +
                                        cluster_key(missing[m].second),
                                    solved[m].certificate.log);
            PlanSolution plan;
            plan.id = static_cast<int>(pool.size());
            plan.weights = std::move(solved[m].weights);
            plan.origin = missing[m].second;
            plan.phase = tag;
            plan.generated_at_k = at_k;
            cluster_plan[cluster_key(missing[m].second)] = plan.id;
            ids[missing[m].first] = plan.id;
            pool.push_back(std::move(plan));
            ++solver_calls;
        }
        // Batch-duplicate clusters (same effective set) resolve via the memo.
        for (size_t c = 0; c < clusters.size(); ++c) {
            if (ids[c] < 0)
                ids[c] = cluster_plan.at(cluster_key(effective_cluster(clusters[c])));
        }
        refresh_values();
        return {ids, static_cast<int>(missing.size())};
    }

    void refresh_values() {
        if (pool.empty()) return;
        if (values.plan_count() == static_cast<int>(pool.size())) return;
        values = build_value_matrix(pool, *inst, values.plan_count() ? &values : nullptr,
                                    workers);
    }
};

SolveState make_state(const Instance& instance, const RunConfig& cfg) {
    instance.validate();
    SolveState st;
    st.inst = &instance;
    st.include_nominal = cfg.include_nominal.value_or(instance.nominal_id.has_value());
    st.workers = std::max(1, cfg.workers);
    return st;
}

// The scenario attaining the worst assigned value (lowest id on ties) and the
// size of its cluster.
int worst_cluster_size(const assign::AssignmentResult& res, const ValueMatrix& vm) {
    int worst_j = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < vm.scenario_count(); ++j) {
        const int row = vm.plan_index_of(res.assignment[j]);
        const double v = vm.value(row, j);
        if (v > worst + kValueTol) {
            worst = v;
            worst_j = j;
        }
    }
    const int sid = vm.scenario_ids()[worst_j];
    for (const auto& block : res.partition)
        if (std::binary_search(block.begin(), block.end(), sid))
            return static_cast<int>(block.size());
    return 0;
}

void log_iteration(std::ostream* os, Method method, int k, const IterationTrace& tr) {
    if (!os) return;
    *os << "{\"method\":\"" << method_name(method) << "\",\"k\":" << k
        << ",\"iteration\":" << tr.iteration << ",\"w\":" << format_double(tr.w)
        << ",\"partition\":\"" << partition_key(tr.partition) << "\""
        << ",\"worst_cluster_size\":" << tr.worst_cluster_size
        << ",\"new_plans\":" << tr.new_plans << ",\"solver_calls\":" << tr.solver_calls_total
        << ",\"elapsed_s\":" << format_double(tr.elapsed_s) << "}\n";
}

GenerationOutput generation_phase(const Instance& instance, GenOrder order, PoolMode pool_mode,
                                  const RunConfig& cfg, Method method_for_log) {
    const auto t0 = Clock::now();
    SolveState st = make_state(instance, cfg);
    const int t = instance.scenario_count();

    GenerationOutput out;
    out.records.resize(t);

    // X_int: one optimal plan per scenario.
    {
        std::vector<std::vector<int>> singletons(t);
        for (int j = 0; j < t; ++j) singletons[j] = {j};
        st.plans_for_clusters(singletons, PhaseTag::Init, -1);
        out.init_solver_calls = st.solver_calls;
    }
    const std::vector<int> init_rows = [&] {
        std::vector<int> rows(st.pool.size());
        for (size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
        return rows;
    }();

    std::vector<int> k_order(t);
    for (int i = 0; i < t; ++i)
        k_order[i] = order == GenOrder::Descending ? t - i : i + 1;

    for (int k : k_order) {
        const auto k_start = Clock::now();
        const long calls_before = st.solver_calls;
        KRecord& rec = out.records[k - 1];
        rec.k = k;

        std::set<std::string> seen;  // the partition pool P for this K
        std::vector<int> local_rows = init_rows;  // used in Local mode only
        std::set<int> local_set(init_rows.begin(), init_rows.end());

        long iter = 0;
        while (true) {
            ++iter;
            if (iter > cfg.iteration_cap)
                throw TerminationGuard("generation loop exceeded " +
                                       std::to_string(cfg.iteration_cap) +
                                       " iterations at K=" + std::to_string(k));

            const ValueMatrix vm = pool_mode == PoolMode::Global
                                       ? st.values
                                       : st.values.select_rows(local_rows);
            assign::AssignmentResult wc = assign::solve_assignment_worst_case(vm, k);
            assign::AssignmentResult res =
                assign::solve_assignment_pareto_avg(vm, k, wc.worst_case);

            auto [plan_ids, fresh] =
                st.plans_for_clusters(res.partition, PhaseTag::Generated, k);
            if (pool_mode == PoolMode::Local) {
                for (int id : plan_ids)
                    if (local_set.insert(id).second) local_rows.push_back(id);
                std::sort(local_rows.begin(), local_rows.end());
            }

            IterationTrace tr;
            tr.iteration = static_cast<int>(iter);
            tr.w = res.worst_case;
            tr.partition = res.partition;
            tr.worst_cluster_size = worst_cluster_size(res, vm);
            tr.new_plans = fresh;
            tr.solver_calls_total = st.solver_calls;
            tr.elapsed_s = seconds_since(t0, cfg.timing);
            log_iteration(cfg.run_log, method_for_log, k, tr);
            rec.generation_trace.push_back(std::move(tr));

            const std::string key = partition_key(res.partition);
            if (seen.count(key)) break;
            seen.insert(key);
            out.partition_history[k].push_back(res.partition);
        }

        rec.w_star = rec.generation_trace.back().w;
        rec.solver_calls = st.solver_calls - calls_before;
        rec.wall_time_s = seconds_since(k_start, cfg.timing);
    }

    out.pool = std::move(st.pool);
    out.values = std::move(st.values);
    out.total_solver_calls = st.solver_calls;
    out.wall_time_s = seconds_since(t0, cfg.timing);
    return out;
}

}  // namespace

GenerationOutput run_generation_phase(const Instance& instance, GenOrder order,
                                      PoolMode pool_mode, const RunConfig& config) {
    return generation_phase(instance, order, pool_mode, config, Method::Main);
}

std::vector<KRecord> run_redistribution_phase(const GenerationOutput& generation,
                                              const Instance& instance,
                                              const RunConfig& config) {
    if (generation.pool.empty()) throw InvalidInstance("redistribution: empty pool");
    if (generation.values.plan_count() != static_cast<int>(generation.pool.size()))
        throw InvalidInstance("redistribution: value matrix incomplete");
    const int t = instance.scenario_count();
    std::vector<KRecord> records(t);
    for (int k = 1; k <= t; ++k) {
        const auto k_start = Clock::now();
        assign::AssignmentResult wc = assign::solve_assignment_worst_case(generation.values, k);
        assign::AssignmentResult res =
            assign::solve_assignment_pareto_avg(generation.values, k, wc.worst_case);
        KRecord& rec = records[k - 1];
        rec.k = k;
        rec.best_plans = res.selected;
        rec.w_star = res.worst_case;
        rec.wall_time_s = seconds_since(k_start, config.timing);
    }
    return records;
}

namespace {

HeuristicRun run_two_phase(const Instance& instance, Method method, GenOrder order,
                           PoolMode pool_mode, const RunConfig& cfg) {
    const auto t0 = Clock::now();
    GenerationOutput gen = generation_phase(instance, order, pool_mode, cfg, method);
    std::vector<KRecord> redist = run_redistribution_phase(gen, instance, cfg);

    HeuristicRun run;
    run.method = method;
    run.records.resize(instance.scenario_count());
    for (int k = 1; k <= instance.scenario_count(); ++k) {
        KRecord& rec = run.records[k - 1];
        rec = gen.records[k - 1];
        rec.best_plans = redist[k - 1].best_plans;
        rec.w_star = redist[k - 1].w_star;
        rec.wall_time_s += redist[k - 1].wall_time_s;
    }
    run.pool = std::move(gen.pool);
    run.values = std::move(gen.values);
    run.partition_history = std::move(gen.partition_history);
    run.init_solver_calls = gen.init_solver_calls;
    run.total_solver_calls = gen.total_solver_calls;
    run.total_wall_time_s = seconds_since(t0, cfg.timing);
    return run;
}

}  // namespace

HeuristicRun run_main(const Instance& instance, const RunConfig& config) {
    return run_two_phase(instance, Method::Main, GenOrder::Descending, PoolMode::Global, config);
}

HeuristicRun run_lsp(const Instance& instance, const RunConfig& config) {
    return run_two_phase(instance, Method::Lsp, GenOrder::Descending, PoolMode::Local, config);
}

HeuristicRun run_aosg(const Instance& instance, const RunConfig& config) {
    return run_two_phase(instance, Method::Aosg, GenOrder::Ascending, PoolMode::Global, config);
}

HeuristicRun run_kmedoids_pipeline(const Instance& instance, const RunConfig& config) {
    const auto t0 = Clock::now();
    SolveState st = make_state(instance, config);
    const int t = instance.scenario_count();
    assign::DistanceMatrix dist = assign::build_distance_matrix(instance);

    HeuristicRun run;
    run.method = Method::KMedoids;
    run.records.resize(t);

    for (int k = 1; k <= t; ++k) {
        const auto k_start = Clock::now();
        const long calls_before = st.solver_calls;
        assign::KMedoidsResult med = assign::solve_k_medoids(dist, k);

        std::vector<std::vector<int>> blocks(t);
        for (int j = 0; j < t; ++j) blocks[med.assignment[j]].push_back(j);
        Partition raw;
        for (auto& b : blocks)
            if (!b.empty()) raw.push_back(std::move(b));
        Partition partition = canonicalize_partition(raw, t);

        auto [plan_ids, fresh] = st.plans_for_clusters(partition, PhaseTag::Generated, k);
        std::vector<int> plans(plan_ids.begin(), plan_ids.end());
        std::sort(plans.begin(), plans.end());
        plans.erase(std::unique(plans.begin(), plans.end()), plans.end());

        // Each scenario takes its best feasible plan among the K (the
        // worst-case MIP with the selection fixed).
        double w = -std::numeric_limits<double>::infinity();
        int worst_scenario = -1;
        for (int j = 0; j < t; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (int id : plans) {
                const int row = st.values.plan_index_of(id);
                if (st.values.feasible(row, j)) best = std::min(best, st.values.value(row, j));
            }
            if (best > w + kValueTol) {
                w = best;
                worst_scenario = j;
            }
        }
        int wc_size = 0;
        for (const auto& block : partition)
            if (std::binary_search(block.begin(), block.end(), worst_scenario))
                wc_size = static_cast<int>(block.size());

        KRecord& rec = run.records[k - 1];
        rec.k = k;
        rec.best_plans = plans;
        rec.w_star = w;
        rec.solver_calls = st.solver_calls - calls_before;
        rec.wall_time_s = seconds_since(k_start, config.timing);
        IterationTrace tr;
        tr.iteration = 1;
        tr.w = w;
        tr.partition = partition;
        tr.worst_cluster_size = wc_size;
        tr.new_plans = fresh;
        tr.solver_calls_total = st.solver_calls;
        tr.elapsed_s = seconds_since(t0, config.timing);
        log_iteration(config.run_log, Method::KMedoids, k, tr);
        rec.generation_trace.push_back(std::move(tr));
        run.partition_history[k].push_back(std::move(partition));
    }

    run.pool = std::move(st.pool);
    run.values = std::move(st.values);
    run.total_solver_calls = st.solver_calls;
    run.total_wall_time_s = seconds_since(t0, config.timing);
    return run;
}

HeuristicRun run_method(const Instance& instance, Method method, const RunConfig& config) {
    switch (method) {
        case Method::Main: return run_main(instance, config);
        case Method::Lsp: return run_lsp(instance, config);
        case Method::Aosg: return run_aosg(instance, config);
        case Method::KMedoids: return run_kmedoids_pipeline(instance, config);
    }
    throw InvalidInstance("unknown method");
}

}  // namespace kadapt::heur
