#include <doctest.h>

#include <sstream>

#include "vfem/bench.hpp"
#include "vfem/error.hpp"

using namespace vfem;

TEST_CASE("three levels of one target give six verified records") {
    BenchOptions o;
    o.levels = 3;
    o.base_n_div = 4;
    o.targets = {Target::mass};
    const BenchResult r = run_bench(o);
    REQUIRE(r.records.size() == 6);
    int classical = 0, vectorized = 0;
    for (const auto& rec : r.records) {
        CHECK(rec.verified);
        CHECK(rec.verified_rel_diff <= 1e-12);
        CHECK(rec.repetitions == 5);
        CHECK(rec.total_seconds >= rec.formation_seconds);
        CHECK(rec.n == static_cast<std::size_t>((rec.n_div + 1) * (rec.n_div + 1)));
        classical += rec.algorithm == "classical";
        vectorized += rec.algorithm == "vectorized";
    }
    CHECK(classical == 3);
    CHECK(vectorized == 3);
    CHECK(r.records.back().n_div == 16);
    CHECK_FALSE(r.slopes.empty());
}

TEST_CASE("CSV starts with the version line and a fixed header") {
    BenchOptions o;
    o.levels = 1;
    o.base_n_div = 2;
    o.targets = {Target::conductivity};
    std::ostringstream os;
    write_bench_csv(run_bench(o), os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == std::string("# ") + kBenchCsvVersion);
    std::getline(is, line);
    CHECK(line.rfind("target,order,level,n_div,n,n_e,nnz,algorithm,repetitions,formation_seconds", 0) == 0);
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 2);
}

TEST_CASE("fewer than five repetitions is rejected") {
    BenchOptions o;
    o.reps = 3;
    CHECK_THROWS_AS(run_bench(o), ConfigError);
}

TEST_CASE("memory guard stops the ladder with a note") {
    BenchOptions o;
    o.levels = 4;
    o.base_n_div = 4;
    o.targets = {Target::mass};
    o.memory_cap_bytes = bench_memory_estimate(1, 8);
    const BenchResult r = run_bench(o);
    CHECK(r.records.size() == 4);
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1, 2, 4, 8}, {3, 6, 12, 24}) == doctest::Approx(1.0));
    CHECK(loglog_slope({1, 10, 100}, {1, 100, 10000}) == doctest::Approx(2.0));
}
