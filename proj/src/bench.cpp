#include "vfem/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>

#include "vfem/error.hpp"
#include "vfem/kernels.hpp"

namespace vfem {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

struct Samples {
    std::vector<double> formation, scatter, total;

    void add(const AssemblyTimings& t) {
        formation.push_back(t.formation_seconds);
        scatter.push_back(t.scatter_seconds);
        total.push_back(t.formation_seconds + t.scatter_seconds);
    }

    void fill(BenchRecord& r) const {
        r.repetitions = static_cast<int>(total.size());
        r.formation_seconds = median(formation);
        r.scatter_seconds = median(scatter);
        r.total_seconds = median(total);
        r.formation_mean = mean(formation);
        r.scatter_mean = mean(scatter);
        r.total_mean = mean(total);
    }
};

} // namespace

std::size_t bench_memory_estimate(int order, int n_div) {
    const std::size_t ne = 2 * static_cast<std::size_t>(n_div) * static_cast<std::size_t>(n_div);
    const std::size_t np = order == 1 ? 3 : 6;
    const std::size_t local = np * np * ne;
    // V and X batches, triplets (two int32 + double) and their sort permutation,
    // scatter map, CSR values and indices.
    return local * (8 + 8 + 16 + 8 + 8 + 12) + 2 * ne * 64;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope needs at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

BenchResult run_bench(const BenchOptions& opts) {
    if (opts.levels < 1) throw ConfigError("bench: levels must be at least 1");
    if (opts.order != 1 && opts.order != 2) throw ConfigError("bench: order must be 1 or 2");
    if (opts.reps < 5) throw ConfigError("bench: at least 5 repetitions are required");
    if (opts.base_n_div < 1) throw ConfigError("bench: base n_div must be at least 1");
    for (Target t : opts.targets)
        if (t != Target::mass && t != Target::conductivity && t != Target::reaction)
            throw ConfigError(std::string("bench: unsupported target ") + to_string(t));

    BenchResult out;
    const CoefficientField one = CoefficientField::constant(1.0);
    const std::string kernels(kernels::active().name);

    for (int level = 0; level < opts.levels; ++level) {
        const int n_div = opts.base_n_div << level;
        if (bench_memory_estimate(opts.order, n_div) > opts.memory_cap_bytes) {
            out.notes.push_back("memory guard: stopped before level " + std::to_string(level) + " (n_div " +
                                std::to_string(n_div) + ", estimated " +
                                std::to_string(bench_memory_estimate(opts.order, n_div) >> 20) + " MiB)");
            break;
        }
        TriangleMesh m = generate_structured_unit_square(n_div);
        if (opts.order == 2) m = promote_to_p2(m);
        const auto mesh = std::make_shared<const TriangleMesh>(std::move(m));

        for (Target target : opts.targets) {
            const Target ts[] = {target};
            std::vector<double> setup;
            for (int r = 0; r < opts.reps; ++r) {
                const auto t0 = Clock::now();
                const AssemblyPlan p = build_plan(mesh, ts);
                setup.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
            }
            const AssemblyPlan plan = build_plan(mesh, ts);
            const QuadratureRule& rule = plan.target(target).rule;

            const CsrMatrix vec = assemble(plan, target, one, 0.0);
            const CsrMatrix cls = classical_assemble(*mesh, target, one, rule, 0.0);
            const double diff = relative_frobenius_difference(vec, cls);
            const bool ok = diff <= opts.verify_tolerance;

            BenchRecord base;
            base.target = to_string(target);
            base.order = opts.order;
            base.level = level;
            base.n_div = n_div;
            base.n = mesh->num_nodes();
            base.n_e = mesh->num_elements();
            base.nnz = plan.pattern()->nnz();
            base.verified = ok;
            base.verified_rel_diff = diff;
            base.kernels = kernels;
            if (!ok) {
                out.notes.push_back(std::string("verification failed for ") + to_string(target) + " at n_div " +
                                    std::to_string(n_div) + "; cell not timed");
                for (const char* alg : {"classical", "vectorized"}) {
                    BenchRecord r = base;
                    r.algorithm = alg;
                    out.records.push_back(r);
                }
                continue;
            }

            Samples cs;
            for (int r = 0; r < opts.reps; ++r) {
                AssemblyTimings t;
                (void)classical_assemble(*mesh, target, one, rule, 0.0, std::nullopt, &t);
                cs.add(t);
            }
            BenchRecord rc = base;
            rc.algorithm = "classical";
            cs.fill(rc);
            out.records.push_back(rc);

            Samples vs;
            CsrMatrix into(plan.pattern());
            for (int r = 0; r < opts.reps; ++r) {
                AssemblyTimings t;
                assemble_into(plan, target, one, 0.0, std::nullopt, into, &t);
                vs.add(t);
            }
            BenchRecord rv = base;
            rv.algorithm = "vectorized";
            rv.setup_seconds = median(setup);
            vs.fill(rv);
            out.records.push_back(rv);
        }
    }

    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> formation, total;
    for (const auto& r : out.records) {
        if (!r.verified) continue;
        auto& f = formation[{r.target, r.algorithm}];
        f.first.push_back(static_cast<double>(r.n));
        f.second.push_back(std::max(r.formation_seconds, 1e-9));
        auto& t = total[{r.target, r.algorithm}];
        t.first.push_back(static_cast<double>(r.n));
        t.second.push_back(std::max(r.total_seconds, 1e-9));
    }
    for (const auto& [quantity, series] : {std::pair{"formation", &formation}, std::pair{"total", &total}})
        for (const auto& [key, xy] : *series)
            if (xy.first.size() >= 2)
                out.slopes.push_back({key.first, key.second, quantity, loglog_slope(xy.first, xy.second),
                                      static_cast<int>(xy.first.size())});
    return out;
}

void write_bench_csv(const BenchResult& result, std::ostream& os) {
    os << "# " << kBenchCsvVersion << '\n';
    os << "target,order,level,n_div,n,n_e,nnz,algorithm,repetitions,formation_seconds,scatter_seconds,total_seconds,"
          "formation_mean,scatter_mean,total_mean,setup_seconds,verified,verified_rel_diff,kernels\n";
    const auto old_flags = os.flags();
    const auto old_prec = os.precision();
    os << std::setprecision(9);
    for (const auto& r : result.records)
        os << r.target << ',' << r.order << ',' << r.level << ',' << r.n_div << ',' << r.n << ',' << r.n_e << ','
           << r.nnz << ',' << r.algorithm << ',' << r.repetitions << ',' << r.formation_seconds << ','
           << r.scatter_seconds << ',' << r.total_seconds << ',' << r.formation_mean << ',' << r.scatter_mean << ','
           << r.total_mean << ',' << r.setup_seconds << ',' << (r.verified ? 1 : 0) << ',' << r.verified_rel_diff
           << ',' << r.kernels << '\n';
    os.flags(old_flags);
    os.precision(old_prec);
}

} // namespace vfem
