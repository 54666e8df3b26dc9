#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kadapt/errors.hpp"
#include "kadapt/heuristics.hpp"
#include "kadapt/instgen.hpp"
#include "kadapt/io.hpp"
#include "kadapt/lp.hpp"
#include "kadapt/metrics.hpp"

namespace {

using nlohmann::json;

int env_workers() {
    if (const char* w = std::getenv("KADAPT_WORKERS")) {
        const int n = std::atoi(w);
        if (n > 0) return n;
    }
    return 1;
}

struct CommonOpts {
    std::string config_path;
    int workers = env_workers();
    std::string timing = "zero";  // zero timing keeps outputs byte-deterministic
    std::optional<bool> include_nominal;
};

void add_common(CLI::App* app, CommonOpts& c) {
    app->add_option("--config", c.config_path, "JSON config file (flags override it)");
    app->add_option("--workers", c.workers, "worker threads (env KADAPT_WORKERS)");
    app->add_option("--timing", c.timing, "wall-time columns: zero|real")
        ->check(CLI::IsMember({"zero", "real"}));
    app->add_flag_callback("--include-nominal",
                           [&c] { c.include_nominal = true; },
                           "force nominal scenario into every cluster solve");
    app->add_flag_callback("--no-include-nominal",
                           [&c] { c.include_nominal = false; },
                           "solve clusters without merging the nominal scenario");
}

void apply_config_file(const std::string& path, CommonOpts& c, const CLI::App* app) {
    if (path.empty()) return;
    json j = json::parse(kadapt::io::read_file(path));
    if (j.contains("workers") && app->count("--workers") == 0) c.workers = j["workers"].get<int>();
    if (j.contains("timing") && app->count("--timing") == 0)
        c.timing = j["timing"].get<std::string>();
    if (j.contains("include_nominal") && !c.include_nominal)
        c.include_nominal = j["include_nominal"].get<bool>();
}

kadapt::heur::RunConfig run_config_from(const CommonOpts& c) {
    kadapt::heur::RunConfig cfg;
    cfg.workers = c.workers;
    cfg.timing = c.timing == "real" ? kadapt::heur::Timing::Real : kadapt::heur::Timing::Zero;
    cfg.include_nominal = c.include_nominal;
    return cfg;
}

std::vector<kadapt::heur::Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<kadapt::heur::Method> methods;
    for (const std::string& n : names) {
        auto m = kadapt::heur::method_from_name(n);
        if (!m) throw kadapt::Error("unknown method: " + n);
        methods.push_back(*m);
    }
    if (methods.empty())
        methods = {kadapt::heur::Method::Main, kadapt::heur::Method::Lsp,
                   kadapt::heur::Method::Aosg, kadapt::heur::Method::KMedoids};
    return methods;
}

kadapt::gen::Box parse_box(const std::string& text) {
    kadapt::gen::Box b;
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(std::stoi(tok));
    if (parts.size() == 2) {
        b = {parts[0], parts[1], 0, 1};
    } else if (parts.size() == 4) {
        b = {parts[0], parts[1], parts[2], parts[3]};
    } else {
        throw kadapt::Error("box must be x0:x1 or x0:x1:y0:y1");
    }
    return b;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"K-adaptability solver and benchmark harness for discrete-uncertainty "
                 "robust planning"};
    app.require_subcommand(1);

    // --- gen ---
    CLI::App* gen = app.add_subcommand("gen", "generate instance files");
    gen->require_subcommand(1);

    CLI::App* gen_phantom = gen->add_subcommand("phantom", "synthetic phantom instance");
    kadapt::gen::PhantomParams pp;
    std::string grid_spec = "40", target_spec, out_path;
    std::vector<std::string> shift_tokens;
    std::vector<double> ranges;
    gen_phantom->add_option("--grid", grid_spec, "grid size: X or XxY");
    gen_phantom->add_option("--beamlets", pp.n_beamlets, "number of beamlets");
    gen_phantom->add_option("--target", target_spec, "target box x0:x1[:y0:y1]");
    gen_phantom->add_option("--rind-margin", pp.rind_margin, "rind band width (voxels)");
    gen_phantom->add_option("--shifts", shift_tokens,
                            "shift directions (none,+x,-x,+y,-y,+x+y,...)");
    gen_phantom->add_option("--shift-magnitude", pp.shift_magnitude, "shift size in voxels");
    gen_phantom->add_option("--ranges", ranges, "range factors, e.g. -0.03 0 0.03");
    gen_phantom->add_option("--target-max", pp.target_max_dose, "target max-dose bound (Gy)");
    gen_phantom->add_option("--rind-max", pp.rind_max_dose, "rind max-dose bound (Gy)");
    gen_phantom->add_option("--seed", pp.seed, "generator seed");
    gen_phantom->add_option("-o,--out", out_path, "output instance path")->required();

    CLI::App* gen_hs = gen->add_subcommand("hitting-set", "hitting-set reduction instance");
    kadapt::gen::HittingSetSpec hs;
    std::string sets_path;
    gen_hs->add_option("--n", hs.n_items, "number of items")->required();
    gen_hs->add_option("--sets", sets_path, "JSON file: array of item arrays (1-based)")
        ->required();
    gen_hs->add_option("--k", hs.k_query, "hitting-set budget K")->required();
    gen_hs->add_option("-o,--out", out_path, "output instance path")->required();

    // --- run ---
    CLI::App* run = app.add_subcommand("run", "run methods on one instance");
    CommonOpts run_opts;
    std::string run_instance, run_out = "out";
    std::vector<std::string> run_methods;
    std::string dump_values_path, dump_lp_path;
    run->add_option("--instance", run_instance, "instance JSON path")->required();
    run->add_option("--method", run_methods, "main|lsp|aosg|kmedoids (repeatable; default all)");
    run->add_option("--out", run_out, "output directory");
    run->add_option("--dump-values", dump_values_path,
                    "also write the pool value-matrix cache here");
    run->add_option("--dump-lp", dump_lp_path,
                    "write the full-uncertainty robust LP in LP-format here");
    add_common(run, run_opts);

    // --- bench ---
    CLI::App* bench = app.add_subcommand("bench", "run the benchmark suite");
    CommonOpts bench_opts;
    std::string suite_dir, bench_out = "bench_out";
    std::vector<std::string> bench_methods;
    bench->add_option("--suite", suite_dir, "directory of instance JSON files")->required();
    bench->add_option("--method", bench_methods, "methods (default all)");
    bench->add_option("--out", bench_out, "output directory");
    add_common(bench, bench_opts);

    // --- verify ---
    CLI::App* verify = app.add_subcommand("verify", "run the invariant suite on an instance");
    CommonOpts verify_opts;
    std::string verify_instance;
    bool verify_quick = false;
    verify->add_option("--instance", verify_instance, "instance JSON path")->required();
    verify->add_flag("--quick", verify_quick, "skip the exhaustive checks");
    add_common(verify, verify_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_phantom->parsed()) {
            auto x = grid_spec.find('x');
            pp.grid_x = std::stoi(grid_spec.substr(0, x));
            pp.grid_y = x == std::string::npos ? 1 : std::stoi(grid_spec.substr(x + 1));
            if (!target_spec.empty()) pp.target = parse_box(target_spec);
            if (!shift_tokens.empty()) pp.shift_directions = shift_tokens;
            if (!ranges.empty()) pp.range_factors = ranges;
            kadapt::Instance inst = kadapt::gen::generate_phantom_instance(pp);
            kadapt::io::write_instance(inst, out_path);
            std::cout << "wrote " << out_path << " (T=" << inst.scenario_count()
                      << ", voxels=" << inst.voxel_count()
                      << ", beamlets=" << inst.beamlet_count() << ")\n";
            return 0;
        }
        if (gen_hs->parsed()) {
            hs.sets = json::parse(kadapt::io::read_file(sets_path))
                          .get<std::vector<std::vector<int>>>();
            kadapt::Instance inst = kadapt::gen::generate_hitting_set_instance(hs);
            kadapt::io::write_instance(inst, out_path);
            std::cout << "wrote " << out_path << " (T=" << inst.scenario_count()
                      << ", items=" << hs.n_items << ", K=" << hs.k_query << ")\n";
            return 0;
        }
        if (run->parsed()) {
            apply_config_file(run_opts.config_path, run_opts, run);
            kadapt::Instance inst = kadapt::io::read_instance(run_instance);
            const std::string name = std::filesystem::path(run_instance).stem().string();
            auto methods = parse_methods(run_methods);
            auto cfg = run_config_from(run_opts);
            if (!dump_lp_path.empty()) {
                kadapt::lp::RobustSubproblem sub;
                sub.instance = &inst;
                for (int j = 0; j < inst.scenario_count(); ++j) sub.cluster.push_back(j);
                sub.include_nominal =
                    cfg.include_nominal.value_or(inst.nominal_id.has_value());
                std::ofstream os(dump_lp_path);
                kadapt::lp::write_lp_format(sub, os);
            }
            auto paths = kadapt::bench::run_and_write(inst, name, methods, run_out, cfg);
            if (!dump_values_path.empty()) {
                // The cache is rebuilt from the last method's pool via a fresh
                // run of the first method; cheaper: rerun main once.
                kadapt::heur::HeuristicRun hr = kadapt::heur::run_method(inst, methods[0], cfg);
                kadapt::io::write_value_matrix(hr.values, dump_values_path);
            }
            std::cout << "wrote " << paths.csv << " and " << paths.summary << "\n";
            return 0;
        }
        if (bench->parsed()) {
            apply_config_file(bench_opts.config_path, bench_opts, bench);
            kadapt::bench::BenchConfig cfg;
            for (const auto& entry : std::filesystem::directory_iterator(suite_dir))
                if (entry.path().extension() == ".json")
                    cfg.instance_paths.push_back(entry.path().string());
            std::sort(cfg.instance_paths.begin(), cfg.instance_paths.end());
            cfg.methods = parse_methods(bench_methods);
            cfg.out_dir = bench_out;
            cfg.workers = bench_opts.workers;
            cfg.run = run_config_from(bench_opts);
            cfg.run.workers = 1;  // parallelism is across (instance, method) pairs
            const int rc = kadapt::bench::run_benchmark(cfg);
            if (rc == 0) std::cout << "wrote " << bench_out << "/bench_summary.json\n";
            return rc;
        }
        if (verify->parsed()) {
            apply_config_file(verify_opts.config_path, verify_opts, verify);
            kadapt::Instance inst = kadapt::io::read_instance(verify_instance);
            auto results = kadapt::bench::verify_instance(inst, verify_quick,
                                                          run_config_from(verify_opts));
            bool all = true;
            for (const auto& r : results) {
                std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
                if (!r.detail.empty()) std::cout << "  (" << r.detail << ")";
                std::cout << "\n";
                all = all && r.pass;
            }
            return all ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
