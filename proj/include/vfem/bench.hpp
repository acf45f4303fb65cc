#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "vfem/assembly.hpp"

namespace vfem {

/// One timed (level, target, algorithm) cell. Times are medians over the
/// repetitions; the *_mean fields carry the arithmetic means.
struct BenchRecord {
    std::string target;
    int order = 1;
    int level = 0;
    int n_div = 0;
    std::size_t n = 0;                 ///< matrix size (number of DOFs)
    std::size_t n_e = 0;
    std::size_t nnz = 0;
    std::string algorithm;             ///< classical | vectorized
    int repetitions = 0;
    double formation_seconds = 0.0;
    double scatter_seconds = 0.0;
    double total_seconds = 0.0;
    double formation_mean = 0.0;
    double scatter_mean = 0.0;
    double total_mean = 0.0;
    double setup_seconds = 0.0;        ///< plan build (vectorized) or 0 (classical)
    double verified_rel_diff = 0.0;    ///< vectorized vs classical, before timing
    bool verified = false;
    std::string kernels;
};

struct BenchOptions {
    int levels = 4;
    int order = 1;
    int base_n_div = 8;                ///< n_div at level 0; doubled per level
    std::vector<Target> targets{Target::mass, Target::conductivity};
    int reps = 5;
    double verify_tolerance = 1e-12;
    std::size_t memory_cap_bytes = std::size_t{2} << 30;
};

struct BenchSlope {
    std::string target;
    std::string algorithm;
    std::string quantity;              ///< formation | total
    double slope = 0.0;
    int points = 0;
};

struct BenchResult {
    std::vector<BenchRecord> records;
    std::vector<BenchSlope> slopes;
    std::vector<std::string> notes;    ///< memory-guard stops, verification failures
};

/// Estimated peak bytes for one level (both algorithms, worst target).
std::size_t bench_memory_estimate(int order, int n_div);

/// Refinement ladder on the unit square. At every level the two algorithms
/// are compared before anything is timed; a failed comparison is recorded
/// and that cell is not timed.
BenchResult run_bench(const BenchOptions& opts);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

inline constexpr const char* kBenchCsvVersion = "vfem-bench-csv v1";

/// First line "# vfem-bench-csv v1", then a fixed header.
void write_bench_csv(const BenchResult& result, std::ostream& os);

} // namespace vfem
