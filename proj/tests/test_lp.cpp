#include <doctest.h>

#include <random>
#include <sstream>

#include "kadapt/errors.hpp"
#include "kadapt/lp.hpp"
#include "kadapt/simplex.hpp"
#include "oracles.hpp"

using namespace kadapt;

TEST_CASE("dense simplex on textbook problems") {
    // max x+y s.t. x+2y<=4, 3x+y<=6  ->  min -x-y
    lp::DenseLp p;
    p.num_vars = 2;
    p.objective = {-1.0, -1.0};
    p.rows.push_back({{{0, 1.0}, {1, 2.0}}, 4.0});
    p.rows.push_back({{{0, 3.0}, {1, 1.0}}, 6.0});
    auto out = lp::solve_dense_simplex(p);
    REQUIRE(out.status == lp::SimplexOutcome::Status::Optimal);
    CHECK(out.solution[0] == doctest::Approx(1.6).epsilon(1e-9));
    CHECK(out.solution[1] == doctest::Approx(1.2).epsilon(1e-9));
    CHECK(out.objective == doctest::Approx(-2.8).epsilon(1e-9));
    // dual bound matches the primal
    double dual = 0.0;
    for (size_t r = 0; r < p.rows.size(); ++r) dual -= out.duals[r] * p.rows[r].rhs;
    CHECK(dual == doctest::Approx(out.objective).epsilon(1e-9));

    // negative rhs forces phase 1:  min x s.t. -x <= -5
    lp::DenseLp q;
    q.num_vars = 1;
    q.objective = {1.0};
    q.rows.push_back({{{0, -1.0}}, -5.0});
    out = lp::solve_dense_simplex(q);
    REQUIRE(out.status == lp::SimplexOutcome::Status::Optimal);
    CHECK(out.solution[0] == doctest::Approx(5.0).epsilon(1e-12));

    // infeasible: x <= 1, -x <= -3
    lp::DenseLp inf;
    inf.num_vars = 1;
    inf.objective = {0.0};
    inf.rows.push_back({{{0, 1.0}}, 1.0});
    inf.rows.push_back({{{0, -1.0}}, -3.0});
    CHECK(lp::solve_dense_simplex(inf).status == lp::SimplexOutcome::Status::Infeasible);

    // unbounded: min -x, no rows
    lp::DenseLp unb;
    unb.num_vars = 1;
    unb.objective = {-1.0};
    out = lp::solve_dense_simplex(unb);
    CHECK(out.status == lp::SimplexOutcome::Status::Unbounded);
    CHECK(out.ray[0] == 1.0);
}

TEST_CASE("random LPs: simplex optimum has a certified dual bound") {
    std::mt19937_64 eng(17);
    auto uniform = [&] { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
    for (int rep = 0; rep < 60; ++rep) {
        const int n = 1 + static_cast<int>(eng() % 4);
        const int m = 1 + static_cast<int>(eng() % 6);
        lp::DenseLp p;
        p.num_vars = n;
        for (int c = 0; c < n; ++c) p.objective.push_back(uniform() * 2 - 1);
        for (int r = 0; r < m; ++r) {
            lp::DenseLp::Row row;
            for (int c = 0; c < n; ++c)
                if (uniform() < 0.8) row.coeffs.emplace_back(c, uniform() * 2 - 0.5);
            row.rhs = uniform() * 4 - 1;
            p.rows.push_back(std::move(row));
        }
        auto out = lp::solve_dense_simplex(p);
        if (out.status != lp::SimplexOutcome::Status::Optimal) continue;
        // primal feasibility
        for (const auto& row : p.rows) {
            double lhs = 0.0;
            for (auto [c, v] : row.coeffs) lhs += v * out.solution[c];
            CHECK(lhs <= row.rhs + 1e-7);
        }
        // dual feasibility and weak-duality gap
        std::vector<double> red = p.objective;
        double dual = 0.0;
        for (size_t r = 0; r < p.rows.size(); ++r) {
            CHECK(out.duals[r] >= 0.0);
            dual -= out.duals[r] * p.rows[r].rhs;
            for (auto [c, v] : p.rows[r].coeffs) red[c] += out.duals[r] * v;
        }
        for (int c = 0; c < n; ++c) CHECK(red[c] >= -1e-7);
        CHECK(std::abs(dual - out.objective) <= 1e-6 * std::max(1.0, std::abs(out.objective)));
    }
}

TEST_CASE("robust subproblem analytic cells") {
    // single scenario: D=[[2]], bound 10 -> x=5, value -10
    Instance inst = oracles::single_cell_instance({2.0}, 10.0);
    lp::LpSolution sol = lp::solve_single_scenario(inst, 0);
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    CHECK(sol.weights[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(sol.value == doctest::Approx(-10.0).epsilon(1e-9));
    CHECK(sol.certificate.gap <= lp::kOptTol);

    // two scenarios D1=[[2]], D2=[[1]], bound 10 on both -> x=5, worst -5
    Instance pair = oracles::single_cell_instance({2.0, 1.0}, 10.0);
    lp::RobustSubproblem sub;
    sub.instance = &pair;
    sub.cluster = {0, 1};
    sub.include_nominal = false;
    sol = lp::solve_robust_subproblem(sub);
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    CHECK(sol.weights[0] == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(sol.value == doctest::Approx(-5.0).epsilon(1e-9));
    // cross-check against 1-D grid search
    const double grid = oracles::grid_search_robust(pair, {0, 1});
    CHECK(std::abs(grid - sol.value) <= 1e-2);
}

TEST_CASE("zero column is fixed to zero and still Optimal") {
    Instance inst;
    Scenario s;
    s.id = 0;
    s.dose = CsrMatrix::from_dense({{2.0, 0.0}});  // beamlet 1 influences nothing
    s.label = "s0";
    inst.scenarios.push_back(s);
    inst.structures["target"] = {0};
    inst.objective = {ObjectiveKind::MinDoseInTarget, "target"};
    inst.constraints = {{"target", ConstraintKind::MaxDose, 10.0}};
    inst.validate();
    lp::LpSolution sol = lp::solve_single_scenario(inst, 0);
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    CHECK(sol.weights[0] == doctest::Approx(5.0));
    CHECK(sol.weights[1] == 0.0);
}

TEST_CASE("cluster monotonicity and evaluator agreement") {
    std::mt19937_64 eng(23);
    for (int rep = 0; rep < 15; ++rep) {
        Instance inst = oracles::random_tiny_instance(eng, 4, 6, 4);
        lp::RobustSubproblem sub;
        sub.instance = &inst;
        sub.include_nominal = false;
        double prev = -1e300;
        for (int upto = 1; upto <= 4; ++upto) {
            sub.cluster.clear();
            for (int j = 0; j < upto; ++j) sub.cluster.push_back(j);
            lp::LpSolution sol = lp::solve_robust_subproblem(sub);
            REQUIRE(sol.status == lp::SolveStatus::Optimal);
            CHECK(sol.value >= prev - kValueTol);  // larger cluster is worse
            prev = sol.value;
            CHECK(sol.certificate.gap <= lp::kOptTol);
            // every covered scenario is feasible and no worse than t*
            PlanSolution plan;
            plan.id = -1;
            plan.weights = sol.weights;
            double worst = -1e300;
            for (int j = 0; j < upto; ++j) {
                PlanEval e = evaluate_plan(plan, inst.scenarios[j], inst);
                CHECK(e.feasible);
                CHECK(e.value <= sol.value + kValueTol);
                worst = std::max(worst, e.value);
            }
            CHECK(std::abs(worst - sol.value) <= kValueTol);
        }
    }
}

TEST_CASE("homogeneity: scaling bounds scales the optimum") {
    std::mt19937_64 eng(29);
    for (int rep = 0; rep < 5; ++rep) {
        Instance inst = oracles::random_tiny_instance(eng, 3, 5, 3);
        lp::RobustSubproblem sub;
        sub.instance = &inst;
        sub.cluster = {0, 1, 2};
        sub.include_nominal = false;
        const double v = lp::solve_robust_subproblem(sub).value;
        Instance scaled = inst;
        for (ConstraintSpec& c : scaled.constraints) c.bound *= 2.0;
        lp::RobustSubproblem sub2 = sub;
        sub2.instance = &scaled;
        const double v2 = lp::solve_robust_subproblem(sub2).value;
        CHECK(std::abs(v2 - 2.0 * v) <= 1e-6 * std::max(1.0, std::abs(2.0 * v)));
    }
}

TEST_CASE("grid-search oracle agreement on 2-beamlet instances") {
    std::mt19937_64 eng(31);
    for (int rep = 0; rep < 8; ++rep) {
        Instance inst = oracles::random_tiny_instance(eng, 3, 4, 2);
        lp::RobustSubproblem sub;
        sub.instance = &inst;
        sub.cluster = {0, 1, 2};
        sub.include_nominal = false;
        lp::LpSolution sol = lp::solve_robust_subproblem(sub);
        REQUIRE(sol.status == lp::SolveStatus::Optimal);
        const double grid = oracles::grid_search_robust(inst, {0, 1, 2});
        CHECK(std::abs(grid - sol.value) <= 1e-2);
    }
}

TEST_CASE("single-scenario solve equals the cluster form and include_nominal merges") {
    Instance inst = oracles::single_cell_instance({2.0, 1.0}, 10.0);
    inst.nominal_id = 0;
    // include_nominal=true on cluster {1} merges scenario 0: worst case -5
    lp::RobustSubproblem sub;
    sub.instance = &inst;
    sub.cluster = {1};
    sub.include_nominal = true;
    CHECK(lp::solve_robust_subproblem(sub).value == doctest::Approx(-5.0));
    // with the flag off the cluster stays {1}: x=10, value -10
    sub.include_nominal = false;
    CHECK(lp::solve_robust_subproblem(sub).value == doctest::Approx(-10.0));
    // solve_single_scenario never merges
    CHECK(lp::solve_single_scenario(inst, 1).value == doctest::Approx(-10.0));
}

TEST_CASE("hitting-set family: per-proof plan is optimal for its scenario") {
    // items {1,2}, sets {1},{2}: scenario 0 admits value 0 via item 1
    Instance inst;
    {
        // built by hand here; the generator is exercised in test_instgen
        Scenario s0;
        s0.id = 0;
        s0.dose = CsrMatrix::from_dense({{0.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}});
        s0.label = "S={1}";
        Scenario s1;
        s1.id = 1;
        s1.dose = CsrMatrix::from_dense({{1.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}});
        s1.label = "S={2}";
        inst.scenarios = {s0, s1};
        inst.structures["items"] = {0, 1};
        inst.structures["coverage"] = {2};
        inst.objective = {ObjectiveKind::SumDose, "items"};
        inst.constraints = {{"coverage", ConstraintKind::MinDose, 1.0}};
        inst.validate();
    }
    lp::LpSolution sol = lp::solve_single_scenario(inst, 0);
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    CHECK(sol.value <= 1e-7);  // e_1 achieves 0
    // robust over both scenarios: value 1/2 at x=(1/2,1/2)
    lp::RobustSubproblem sub;
    sub.instance = &inst;
    sub.cluster = {0, 1};
    sol = lp::solve_robust_subproblem(sub);
    CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("lp format dump is stable and complete") {
    Instance inst = oracles::single_cell_instance({2.0}, 10.0);
    lp::RobustSubproblem sub;
    sub.instance = &inst;
    sub.cluster = {0};
    sub.include_nominal = false;
    std::ostringstream os;
    lp::write_lp_format(sub, os);
    const std::string text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("obj: t") != std::string::npos);
    CHECK(text.find("epi_s0_v0: -2 x0 - t <= 0") != std::string::npos);
    CHECK(text.find("max_s0_c0_v0: 2 x0 <= 10") != std::string::npos);
    CHECK(text.find("t free") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}
