// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
//   mbk_acceptance            run every criterion
//   mbk_acceptance 3 4        run only the listed ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "mbk/analysis.hpp"
#include "mbk/engine.hpp"
#include "mbk/experiment.hpp"
#include "mbk/geometry.hpp"
#include "mbk/io.hpp"
#include "mbk/oracle.hpp"
#include "mbk/sampling.hpp"

using namespace mbk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. exact identities
// ---------------------------------------------------------------------------

Outcome exact_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    RandomStream rng(101);
    std::size_t kanungo_bad = 0, weighted_bad = 0, lipschitz_bad = 0, bound_bad = 0, obs_bad = 0;
    double kanungo_worst = 0.0, weighted_worst = 0.0;

    for (int t = 0; t < 10000; ++t) {
        const std::size_t d = 1 + rng.uniform_index(16);
        const auto s = test::random_points(rng, 1 + rng.uniform_index(64), d);
        const auto c = test::random_points(rng, 1, d).row(0);
        const auto cm = center_of_mass(s);
        const double lhs = delta_set(s, c);
        const double rhs = delta_set(s, cm) + static_cast<double>(s.size()) * squared_distance(c, cm);
        const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
        kanungo_worst = std::max(kanungo_worst, rel);
        if (rel > 1e-9) ++kanungo_bad;
    }

    for (int t = 0; t < 10000; ++t) {
        const std::size_t d = 1 + rng.uniform_index(16);
        const auto pts = test::random_points(rng, 2, d);
        const double alpha = rng.uniform01();
        const auto x = pts.row(0), y = pts.row(1);
        Point z(d);
        for (std::size_t l = 0; l < d; ++l) z[l] = (1.0 - alpha) * x[l] + alpha * y[l];
        const double err = std::abs(squared_distance(x, z) - alpha * alpha * squared_distance(x, y));
        weighted_worst = std::max(weighted_worst, err);
        if (err > 1e-12) ++weighted_bad;
    }

    for (int t = 0; t < 10000; ++t) {
        const std::size_t d = 1 + rng.uniform_index(16);
        const auto s = test::random_points(rng, 1 + rng.uniform_index(64), d);
        const auto cc = test::random_points(rng, 2, d);
        const double diff = std::abs(delta_set(s, cc.row(1)) - delta_set(s, cc.row(0)));
        const double bound = 2.0 * std::sqrt(static_cast<double>(d)) *
                             static_cast<double>(s.size()) *
                             std::sqrt(squared_distance(cc.row(0), cc.row(1)));
        if (diff > bound + 1e-12) ++lipschitz_bad;
    }

    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 1 + rng.uniform_index(16);
        const auto data = test::random_dataset(rng, 1 + rng.uniform_index(200), d);
        const auto centers = test::random_centers(rng, 1 + rng.uniform_index(10), d);
        if (cost(data, centers) > static_cast<double>(d)) ++bound_bad;
    }

    for (int t = 0; t < 100; ++t) {
        const std::size_t d = 1 + rng.uniform_index(8);
        const std::size_t n = 5 + rng.uniform_index(100);
        const std::size_t k = 2 + rng.uniform_index(6);
        const auto data = test::random_dataset(rng, n, d);
        const auto centers = test::random_centers(rng, k, d);
        const auto induced = assign(data, centers);
        const double best = cost(data, centers);
        for (int alt = 0; alt < 100; ++alt) {
            std::vector<std::size_t> labels = induced.labels;
            if (alt % 2 == 0) {
                for (auto& l : labels) l = rng.uniform_index(k);
            } else {
                const std::size_t flips = 1 + rng.uniform_index(n);
                for (std::size_t f = 0; f < flips; ++f) labels[rng.uniform_index(n)] = rng.uniform_index(k);
            }
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += squared_distance(data[i], centers[labels[i]]);
            if (best > total / static_cast<double>(n)) ++obs_bad;
        }
    }

    const double secs = seconds_since(t0);
    const bool pass = kanungo_bad + weighted_bad + lipschitz_bad + bound_bad + obs_bad == 0 && secs < 1.0;
    std::ostringstream os;
    os << "Kanungo " << kanungo_bad << "/10000 (worst rel " << fmt("%.1e", kanungo_worst)
       << "), weighted-average " << weighted_bad << "/10000 (worst abs " << fmt("%.1e", weighted_worst)
       << "), Lipschitz " << lipschitz_bad << "/10000, f<=d " << bound_bad
       << "/1000, induced partition " << obs_bad << "/10000; " << fmt("%.2f", secs) << " s (< 1 s)";
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// 2. oracle equivalence
// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    RandomStream rng(202);
    std::size_t mismatched = 0, compared_steps = 0;

    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 3 + rng.uniform_index(10);
        const std::size_t d = 1 + rng.uniform_index(3);
        const std::size_t k = 1 + rng.uniform_index(std::min<std::size_t>(3, n));
        const auto data = test::random_dataset(rng, n, d);
        RandomStream init_rng = rng.substream(static_cast<std::uint64_t>(inst));
        const Centers init = init_random(data, k, init_rng);

        RunConfig base;
        base.k = k;
        base.b = n;
        base.init = InitScheme::Explicit;
        base.initial_centers = init;
        base.stop = StoppingRule::center_movement(1e-300);
        base.max_iter_cap = 100;
        RandomStream unused(0);
        const auto lloyd = lloyd_full_batch(data, base, unused);

        RunConfig eng = base;
        eng.batch_mode = BatchMode::FullData;
        eng.rate = LearningRatePolicy::constant(1.0);
        eng.audit_global_cost = true;
        const auto full = run(data, eng);
        const std::size_t steps = lloyd.iterations.size();
        if (full.iterations.size() < steps) ++mismatched;
        for (std::size_t i = 0; i < std::min(steps, full.iterations.size()); ++i) {
            const auto& a = lloyd.iterations[i];
            const auto& b = full.iterations[i];
            if (a.counts != b.counts || a.alphas != b.alphas || *a.global_cost != *b.global_cost) {
                ++mismatched;
            }
        }
        // center trajectory: final centers after every prefix length
        for (std::size_t m = 1; m <= steps + 1; ++m) {
            RunConfig lc = base;
            lc.max_iter_cap = m;
            RunConfig ec = eng;
            ec.max_iter_cap = m;
            RandomStream r0(0), r1(0);
            ++compared_steps;
            if (!(lloyd_full_batch(data, lc, r0).final_centers == run(data, ec, r1).final_centers)) {
                ++mismatched;
            }
        }
    }

    std::size_t cost_bad = 0;
    double cost_worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 1 + rng.uniform_index(8);
        const auto pts = test::random_points(rng, 1 + rng.uniform_index(100), d);
        const auto c = test::random_centers(rng, 1 + rng.uniform_index(8), d);
        const double err = std::abs(cost(pts, c) - oracle::naive_cost(pts, c));
        cost_worst = std::max(cost_worst, err);
        if (err > 1e-12) ++cost_bad;
    }

    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << "engine full-batch alpha=1 vs Lloyd: " << mismatched << " mismatches over 50 instances ("
       << compared_steps << " trajectory prefixes, bitwise); cost vs naive_cost " << cost_bad
       << "/1000 beyond 1e-12 (worst " << fmt("%.1e", cost_worst) << "); " << fmt("%.2f", secs)
       << " s (< 10 s)";
    return {mismatched == 0 && cost_bad == 0 && secs < 10.0, os.str()};
}

// ---------------------------------------------------------------------------
// 3 + 4. movement-implies-improvement and local progress on mixture runs
// ---------------------------------------------------------------------------

struct ImplicationRuns {
    std::vector<RunTrace> traces;
};

const ImplicationRuns& implication_runs() {
    static const ImplicationRuns runs = [] {
        ImplicationRuns r;
        const auto data = io::generate_synthetic(
            io::parse_gen_spec("gaussian_mixture:n=10000,d=4,components=5,sigma=0.05,seed=31"));
        for (std::uint64_t seed = 0; seed < 24; ++seed) {
            for (double eps : {0.001, 0.01, 0.05}) {
                RunConfig cfg;
                cfg.k = 5;
                cfg.b = 1000;
                cfg.rate = LearningRatePolicy::paper_sqrt();
                cfg.stop = StoppingRule::batch_improvement(eps);
                // random init starts far from the optimum, so large moves occur
                cfg.init = seed % 2 == 0 ? InitScheme::Random : InitScheme::KMeansPlusPlus;
                cfg.seed = RandomStream::derive_seed(303, seed);
                r.traces.push_back(run(data, cfg));
            }
        }
        return r;
    }();
    return runs;
}

Outcome movement_implication() {
    const auto& runs = implication_runs();
    AuditCheck own, grid;
    std::size_t iterations = 0;
    for (const auto& t : runs.traces) {
        iterations += t.iterations.size();
        own.merge(audit_sklearn_implication(t, t.config.stop.epsilon, 5, 4));
        for (double eps : {1e-4, 1e-3, 1e-2, 5e-2, 0.1, 0.25, 0.5}) {
            grid.merge(audit_sklearn_implication(t, eps, 5, 4));
        }
    }
    std::ostringstream os;
    os << runs.traces.size() << " runs (24 seeds x eps {0.001,0.01,0.05}), " << iterations
       << " iterations; movement > eps events at run eps: " << own.total << ", violations "
       << own.violations << "; eps grid 1e-4..0.5: " << grid.total << " events, "
       << grid.violations << " violations";
    if (own.worst_margin) os << "; worst margin " << fmt("%.3e", *own.worst_margin);
    return {own.violations == 0 && grid.violations == 0 && own.total > 0, os.str()};
}

Outcome local_progress() {
    const auto& runs = implication_runs();
    std::size_t iterations = 0, bad = 0;
    double worst = INFINITY;
    for (const auto& t : runs.traces) {
        for (const auto& rec : t.iterations) {
            ++iterations;
            worst = std::min(worst, rec.local_improvement);
            if (rec.local_improvement < -1e-12) ++bad;
        }
    }
    std::ostringstream os;
    os << bad << " of " << iterations << " iterations below -1e-12 (min improvement "
       << fmt("%.3e", worst) << ")";
    return {bad == 0, os.str()};
}

// ---------------------------------------------------------------------------
// 5-7. termination, global progress and proximity at the recommended b
// ---------------------------------------------------------------------------

struct TerminationRuns {
    std::size_t b = 0;
    std::vector<RunTrace> traces;
};

const TerminationRuns& termination_runs() {
    static const TerminationRuns runs = [] {
        TerminationRuns r;
        const std::size_t n = 50000, d = 4, k = 5;
        const double eps = 0.5;
        r.b = recommended_batch_size(BatchRegime::Main, n, k, d, eps, 1.0).b;
        const std::vector<std::string> specs{"uniform:n=50000,d=4,seed=41",
                                             "gaussian_mixture:n=50000,d=4,components=5,sigma=0.05,seed=42"};
        for (const auto& spec : specs) {
            const auto data = io::generate_synthetic(io::parse_gen_spec(spec));
            for (std::uint64_t seed = 0; seed < 50; ++seed) {
                RunConfig cfg;
                cfg.k = k;
                cfg.b = r.b;
                cfg.rate = LearningRatePolicy::paper_sqrt();
                cfg.stop = StoppingRule::batch_improvement(eps);
                cfg.seed = RandomStream::derive_seed(505, seed);
                cfg.audit_global_cost = true;
                cfg.record_cbar = true;
                r.traces.push_back(run(data, cfg));
            }
        }
        return r;
    }();
    return runs;
}

Outcome termination_bound_check() {
    const auto& runs = termination_runs();
    const std::size_t bound = termination_bound(4, 0.5);
    std::size_t fired = 0, within = 0, longest = 0;
    std::map<std::size_t, std::size_t> hist;
    for (const auto& t : runs.traces) {
        if (t.reason == Termination::StopRuleFired) ++fired;
        if (t.iterations.size() <= bound) ++within;
        longest = std::max(longest, t.iterations.size());
        ++hist[t.iterations.size()];
    }
    std::ostringstream os;
    os << "b = " << runs.b << " (n = 50000), " << runs.traces.size()
       << " runs: stop_rule " << fired << ", within " << bound << " iterations " << within
       << ", longest " << longest << "; iteration histogram";
    for (const auto& [its, count] : hist) os << " " << its << ":" << count;
    const bool pass = runs.b <= 50000 && fired == runs.traces.size() && within == runs.traces.size();
    return {pass, os.str()};
}

Outcome global_progress() {
    const auto& runs = termination_runs();
    AuditCheck check;
    std::size_t decreased = 0;
    for (const auto& t : runs.traces) {
        check.merge(audit_global_progress(t, 0.5));
        if (*t.final_global_cost <= *t.iterations.front().global_cost) ++decreased;
    }
    check.budget = kWhpViolationBudget;
    const double frac = static_cast<double>(decreased) / static_cast<double>(runs.traces.size());
    std::ostringstream os;
    os << "non-final iterations " << check.total << ", violations of gain >= eps/5: "
       << check.violations << " (fraction " << fmt("%.3f", check.violation_fraction())
       << ", budget 0.05); f_X(return) <= f_X(init) in " << decreased << "/"
       << runs.traces.size() << " runs (" << fmt("%.1f", 100.0 * frac) << "%, need >= 95%)";
    return {check.passed() && frac >= 0.95, os.str()};
}

Outcome center_proximity() {
    const auto& runs = termination_runs();
    AuditCheck check;
    for (const auto& t : runs.traces) check.merge(audit_center_proximity(t, 4, 0.5));
    check.budget = kWhpViolationBudget;
    std::ostringstream os;
    os << check.total << " (i,j) events, " << check.violations << " beyond eps/(10 sqrt d) = "
       << fmt("%.4f", 0.5 / 20.0) << " (fraction " << fmt("%.3f", check.violation_fraction())
       << ", budget 0.05); worst ratio " << fmt("%.3f", check.worst_ratio.value_or(0.0));
    return {check.passed(), os.str()};
}

// ---------------------------------------------------------------------------
// 8. concentration
// ---------------------------------------------------------------------------

Outcome concentration() {
    const auto data = io::generate_synthetic(
        io::parse_gen_spec("gaussian_mixture:n=10000,d=4,components=5,sigma=0.05,seed=81"));
    RandomStream init_rng(808);
    const Centers centers = init_kmeanspp(data, 5, init_rng);
    RandomStream batch_rng(809);
    const auto check = audit_concentration(data, centers, 500, 2000, 0.05, batch_rng);
    std::ostringstream os;
    os << "exceedance " << check.violations << "/2000 = " << fmt("%.4f", check.violation_fraction())
       << " vs allowance " << fmt("%.4f", check.budget) << " (bound "
       << fmt("%.4f", check.details.at("hoeffding_bound")) << " + 3 sigma "
       << fmt("%.4f", check.details.at("allowance_3sigma")) << "); worst |f_B - f_X| "
       << fmt("%.4f", 0.05 - *check.worst_margin);
    return {check.passed(), os.str()};
}

// ---------------------------------------------------------------------------
// 9. k-means++ quality on tiny instances
// ---------------------------------------------------------------------------

Outcome kmeanspp_quality() {
    RandomStream rng(909);
    std::size_t ratio_bad = 0, run_bad = 0;
    double worst_ratio = 0.0;
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t n = 6 + rng.uniform_index(7);
        const std::size_t d = 1 + rng.uniform_index(3);
        const std::size_t k = 1 + rng.uniform_index(3);
        const auto data = test::random_dataset(rng, n, d);
        const double opt = oracle::brute_force_optimal(oracle::TinyInstance(data, k)).cost;
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            RandomStream r(RandomStream::derive_seed(910 + inst, seed));
            const Centers init = init_kmeanspp(data, k, r);
            const double init_cost = cost(data, init);
            mean += init_cost;

            RunConfig cfg;
            cfg.k = k;
            cfg.b = n;
            cfg.batch_mode = BatchMode::FullData;
            cfg.init = InitScheme::Explicit;
            cfg.initial_centers = init;
            cfg.stop = StoppingRule::batch_improvement(1e-6);
            cfg.seed = seed;
            if (cost(data, run(data, cfg).final_centers) > init_cost) ++run_bad;
        }
        mean /= 200.0;
        const double factor = 8.0 * (std::log(static_cast<double>(k)) + 2.0);
        if (mean > factor * opt) ++ratio_bad;
        if (opt > 0.0) worst_ratio = std::max(worst_ratio, mean / opt);
    }
    std::ostringstream os;
    os << "30 instances x 200 seeds: mean init cost above 8(ln k + 2) x optimum in " << ratio_bad
       << " (worst mean/opt " << fmt("%.3f", worst_ratio) << "); full-batch run final > init cost in "
       << run_bad << "/6000 seeds";
    return {ratio_bad == 0 && run_bad == 0, os.str()};
}

// ---------------------------------------------------------------------------
// 10. reproducibility
// ---------------------------------------------------------------------------

std::string strip_wall_ms(const std::string& csv) {
    std::istringstream in(csv);
    std::string out;
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

Outcome reproducibility() {
    const auto root = test::scratch_dir("acceptance_repro");
    const auto points = io::generate_synthetic(io::parse_gen_spec("uniform:n=3000,d=3,seed=11"));
    io::write_points_csv(root / "points.csv", points);

    std::vector<ExperimentSpec> specs(2);
    specs[0].data.gen = io::parse_gen_spec("gaussian_mixture:n=5000,d=4,components=5,sigma=0.05,seed=12");
    specs[0].k_values = {3, 5};
    specs[0].eps_values = {0.1, 0.5};
    specs[0].trials = 3;
    specs[0].audit_global = true;
    specs[0].seed = 1001;
    specs[1].data.kind = io::DataSource::Kind::File;
    specs[1].data.path = (root / "points.csv").string();
    specs[1].k_values = {4};
    specs[1].b_values = {64, 256};
    specs[1].eps_values = {0.01};
    specs[1].rate = LearningRatePolicy::sklearn_cumulative();
    specs[1].stop = StoppingRule::Kind::CenterMovement;
    specs[1].init = InitScheme::Random;
    specs[1].trials = 4;
    specs[1].seed = 1002;

    std::size_t traces = 0, replay_bad = 0, rerun_bad = 0;
    std::ostringstream log;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        std::vector<ExperimentResult> results;
        for (int pass = 0; pass < 2; ++pass) {
            auto spec = specs[s];
            spec.out_dir = root / ("spec" + std::to_string(s) + "_pass" + std::to_string(pass));
            spec.threads = pass == 0 ? 1 : 3;
            results.push_back(run_experiment(spec, log));
        }
        for (std::size_t i = 0; i < results[0].trace_files.size(); ++i) {
            ++traces;
            const auto a = io::read_text_file(results[0].trace_files[i]);
            const auto b = io::read_text_file(results[1].trace_files[i]);
            if (a != b) ++rerun_bad;
            const auto doc = io::parse_trace(a);
            if (io::serialize_trace(replay(doc), doc.data) != a) ++replay_bad;
        }
        const auto m0 = io::read_text_file(results[0].trace_files[0].parent_path() / "metrics.csv");
        const auto m1 = io::read_text_file(results[1].trace_files[0].parent_path() / "metrics.csv");
        if (strip_wall_ms(m0) != strip_wall_ms(m1)) ++rerun_bad;
    }
    std::ostringstream os;
    os << traces << " traces: replay from embedded config differs in " << replay_bad
       << "; two full runs (1 vs 3 worker threads) differ in " << rerun_bad
       << " files (metrics.csv compared without wall_ms)";
    return {traces > 0 && replay_bad == 0 && rerun_bad == 0, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"exact identities", exact_identities},
        {"oracle equivalence", oracle_equivalence},
        {"movement implies improvement", movement_implication},
        {"local progress nonnegative", local_progress},
        {"termination within 10 d/eps", termination_bound_check},
        {"global progress audit", global_progress},
        {"center proximity audit", center_proximity},
        {"concentration audit", concentration},
        {"k-means++ quality", kmeanspp_quality},
        {"reproducibility", reproducibility},
    };

    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::strtoul(argv[i], nullptr, 10));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected.empty() && selected.count(i + 1) == 0) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s  [%2zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
