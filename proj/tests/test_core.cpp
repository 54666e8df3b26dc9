#include <doctest.h>

#include <random>

#include "kadapt/errors.hpp"
#include "kadapt/evaluate.hpp"
#include "kadapt/partition.hpp"
#include "kadapt/sparse.hpp"
#include "oracles.hpp"

using namespace kadapt;

TEST_CASE("csr construction, products, and distances") {
    CsrMatrix a = CsrMatrix::from_dense({{1.0, 0.0}, {0.0, 2.0}, {3.0, 4.0}});
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 2);
    CHECK(a.nnz() == 4);
    CHECK(a.at(2, 1) == 4.0);
    CHECK(a.at(0, 1) == 0.0);

    std::vector<double> y;
    a.multiply(std::vector<double>{2.0, 1.0}, y);
    CHECK(y == std::vector<double>{2.0, 2.0, 10.0});

    CsrMatrix b = CsrMatrix::from_triplets(3, 2, {{0, 0, 1.0}, {0, 0, 1.0}, {1, 1, 2.0}});
    CHECK(b.at(0, 0) == 2.0);  // duplicates summed

    CHECK(CsrMatrix::frobenius_distance(a, a) == 0.0);
    CsrMatrix z = CsrMatrix::from_dense({{0.0}});
    CsrMatrix w = CsrMatrix::from_dense({{3.0}});
    CHECK(CsrMatrix::frobenius_distance(z, w) == 3.0);

    // random pair vs dense computation
    std::mt19937_64 eng(7);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::vector<double>> da(2, std::vector<double>(2, 0.0));
        std::vector<std::vector<double>> db = da;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                if (eng() % 2) da[r][c] = static_cast<double>(eng() % 8);
                if (eng() % 2) db[r][c] = static_cast<double>(eng() % 8);
            }
        double acc = 0.0;
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) acc += (da[r][c] - db[r][c]) * (da[r][c] - db[r][c]);
        CHECK(CsrMatrix::frobenius_distance(CsrMatrix::from_dense(da),
                                            CsrMatrix::from_dense(db)) ==
              doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    }
}

TEST_CASE("evaluate_plan analytic cells") {
    Instance inst = oracles::single_cell_instance({2.0}, 10.0);

    PlanSolution zero;
    zero.id = 0;
    zero.weights = {0.0};
    PlanEval e = evaluate_plan(zero, inst.scenarios[0], inst);
    CHECK(e.value == 0.0);
    CHECK(e.feasible);

    PlanSolution x5;
    x5.id = 1;
    x5.weights = {5.0};
    e = evaluate_plan(x5, inst.scenarios[0], inst);
    CHECK(e.value == -10.0);
    CHECK(e.feasible);

    PlanSolution x6;
    x6.id = 2;
    x6.weights = {6.0};
    e = evaluate_plan(x6, inst.scenarios[0], inst);
    CHECK(e.value == -12.0);  // value still reported
    CHECK(!e.feasible);       // but masked

    PlanSolution bad;
    bad.id = 3;
    bad.weights = {1.0, 2.0};
    CHECK_THROWS_AS(evaluate_plan(bad, inst.scenarios[0], inst), DimensionMismatch);
}

TEST_CASE("zero plan feasible on every scenario of an overdose-only instance") {
    std::mt19937_64 eng(11);
    for (int rep = 0; rep < 10; ++rep) {
        Instance inst = oracles::random_tiny_instance(eng, 3, 6, 4);
        PlanSolution zero;
        zero.id = 0;
        zero.weights.assign(inst.beamlet_count(), 0.0);
        for (const Scenario& s : inst.scenarios) {
            PlanEval e = evaluate_plan(zero, s, inst);
            CHECK(e.feasible);
            CHECK(e.value == 0.0);
        }
    }
}

TEST_CASE("build_value_matrix matches evaluate_plan and extends incrementally") {
    std::mt19937_64 eng(3);
    Instance inst = oracles::random_tiny_instance(eng, 4, 6, 3);

    std::vector<PlanSolution> pool;
    for (int i = 0; i < 3; ++i) {
        PlanSolution p;
        p.id = i;
        p.weights = {0.5 * i, 1.0, 0.25 * i};
        pool.push_back(p);
    }
    ValueMatrix vm = build_value_matrix(pool, inst);
    REQUIRE(vm.plan_count() == 3);
    REQUIRE(vm.scenario_count() == 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            PlanEval e = evaluate_plan(pool[i], inst.scenarios[j], inst);
            CHECK(vm.value(i, j) == e.value);
            CHECK(vm.feasible(i, j) == e.feasible);
        }

    // incremental extension leaves prior entries bit-identical
    PlanSolution extra;
    extra.id = 3;
    extra.weights = {1.0, 0.0, 2.0};
    auto pool2 = pool;
    pool2.push_back(extra);
    ValueMatrix vm2 = build_value_matrix(pool2, inst, &vm);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(vm2.value(i, j) == vm.value(i, j));
            CHECK(vm2.feasible(i, j) == vm.feasible(i, j));
        }
    // parallel fill agrees bit-exactly with serial
    ValueMatrix vm_par = build_value_matrix(pool2, inst, nullptr, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(vm_par.value(i, j) == vm2.value(i, j));
}

TEST_CASE("canonicalize_partition") {
    Partition a = {{2, 0}, {1}};
    Partition b = {{1}, {0, 2}};
    CHECK(canonicalize_partition(a) == Partition{{0, 2}, {1}});
    CHECK(canonicalize_partition(a) == canonicalize_partition(b));
    CHECK(partition_key(canonicalize_partition(a)) == "0,2|1");

    Partition singletons = {{3}, {1}, {0}, {2}};
    CHECK(canonicalize_partition(singletons, 4) == Partition{{0}, {1}, {2}, {3}});

    CHECK_THROWS_AS(canonicalize_partition({{0, 1}, {1}}), InvalidPartition);
    CHECK_THROWS_AS(canonicalize_partition({{0}, {2}}), InvalidPartition);
    CHECK_THROWS_AS(canonicalize_partition({{0}, {}}, 1), InvalidPartition);

    // property: canonical form is invariant under any shuffle
    std::mt19937_64 eng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const int t = 2 + static_cast<int>(eng() % 6);
        Partition p;
        for (int j = 0; j < t; ++j) {
            if (p.empty() || eng() % 2)
                p.push_back({j});
            else
                p[eng() % p.size()].push_back(j);
        }
        Partition canon = canonicalize_partition(p, t);
        std::shuffle(p.begin(), p.end(), eng);
        for (auto& block : p) std::shuffle(block.begin(), block.end(), eng);
        CHECK(canonicalize_partition(p, t) == canon);
    }
}

TEST_CASE("instance validation rejects malformed input") {
    Instance inst = oracles::single_cell_instance({1.0}, 5.0);
    CHECK_NOTHROW(inst.validate());

    Instance bad = inst;
    bad.scenarios[0].id = 7;
    CHECK_THROWS_AS(bad.validate(), InvalidInstance);

    bad = inst;
    bad.constraints[0].bound = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInstance);

    bad = inst;
    bad.structures["target"] = {5};
    CHECK_THROWS_AS(bad.validate(), InvalidInstance);

    bad = inst;
    bad.objective.target = "missing";
    CHECK_THROWS_AS(bad.validate(), InvalidInstance);

    bad = inst;
    bad.nominal_id = 3;
    CHECK_THROWS_AS(bad.validate(), InvalidInstance);
}
