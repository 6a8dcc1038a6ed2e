#include "mbk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <thread>

#include "mbk/analysis.hpp"
#include "mbk/error.hpp"
#include "mbk/oracle.hpp"

namespace mbk {

namespace fs = std::filesystem;

std::string metrics_csv_header() {
    return "run,trial,seed,k,b,eps,d,n,iterations,reason,final_cost,"
           "audit_progress,audit_proximity,audit_implication,wall_ms";
}

std::string metrics_csv_row(const MetricsRow& r) {
    std::string s;
    s += std::to_string(r.run) + ',' + std::to_string(r.trial) + ',' + std::to_string(r.seed) +
         ',' + std::to_string(r.k) + ',' + std::to_string(r.b) + ',' + io::format_double(r.eps) +
         ',' + std::to_string(r.d) + ',' + std::to_string(r.n) + ',' +
         std::to_string(r.iterations) + ',' + to_string(r.reason) + ',' +
         io::format_double(r.final_cost) + ',' + r.audit_progress + ',' + r.audit_proximity +
         ',' + r.audit_implication + ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
    s += buf;
    return s;
}

namespace {

struct Job {
    std::size_t run = 0;
    std::size_t trial = 0;
    RunConfig config;
};

struct Outcome {
    RunTrace trace;
    double wall_ms = 0.0;
};

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
    std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MBK_THREADS"); env != nullptr) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && cap >= 1) n = std::min<std::size_t>(n, cap);
    }
    return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(jobs, 1));
}

const char* pass_fail(bool passed) { return passed ? "pass" : "fail"; }

void create_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string trace_name(std::size_t run) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%04zu.json", run);
    return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream& log) {
    detail::require(spec.trials >= 1, "trials must be at least 1");
    detail::require(!spec.k_values.empty() && !spec.eps_values.empty(),
                    "sweep axes must be non-empty");

    const Dataset dataset = io::load_dataset(spec.data);
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.dim();

    std::vector<Job> jobs;
    for (std::size_t k : spec.k_values) {
        for (double eps : spec.eps_values) {
            std::vector<std::size_t> batch_sizes = spec.b_values;
            if (batch_sizes.empty()) {
                const auto rec =
                    recommended_batch_size(BatchRegime::Main, n, k, d, eps, spec.batch_constant);
                if (rec.exceeds_n) {
                    log << "warning: recommended b = " << rec.b << " exceeds n = " << n
                        << " (k=" << k << ", eps=" << io::format_double(eps) << ")\n";
                }
                batch_sizes.push_back(rec.b);
            }
            for (std::size_t b : batch_sizes) {
                for (std::size_t t = 0; t < spec.trials; ++t) {
                    Job job;
                    job.run = jobs.size();
                    job.trial = t;
                    RunConfig& cfg = job.config;
                    cfg.algorithm = spec.algorithm;
                    cfg.k = k;
                    cfg.b = b;
                    cfg.rate = spec.rate;
                    cfg.stop = spec.stop == StoppingRule::Kind::BatchImprovement
                                   ? StoppingRule::batch_improvement(eps)
                                   : StoppingRule::center_movement(eps);
                    cfg.init = spec.init;
                    cfg.seed = RandomStream::derive_seed(spec.seed, t);
                    cfg.max_iter_cap = spec.cap;
                    cfg.audit_global_cost = spec.audit_global;
                    cfg.record_cbar = spec.audit_global;
                    cfg.batch_mode = spec.batch_mode;
                    validate(cfg, dataset);
                    jobs.push_back(std::move(job));
                }
            }
        }
    }

    create_out_dir(spec.out_dir);

    std::vector<Outcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                const auto start = std::chrono::steady_clock::now();
                outcomes[i].trace = run(dataset, jobs[i].config);
                const auto stop = std::chrono::steady_clock::now();
                outcomes[i].wall_ms =
                    std::chrono::duration<double, std::milli>(stop - start).count();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const std::size_t workers = worker_count(spec.threads, jobs.size());
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult result;
    std::string csv = metrics_csv_header() + "\n";
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& job = jobs[i];
        const RunTrace& trace = outcomes[i].trace;
        const double eps = job.config.stop.epsilon;

        MetricsRow row;
        row.run = job.run;
        row.trial = job.trial;
        row.seed = job.config.seed;
        row.k = job.config.k;
        row.b = trace.config.b;
        row.eps = eps;
        row.d = d;
        row.n = n;
        row.iterations = trace.iterations.size();
        row.reason = trace.reason;
        row.final_cost = trace.final_global_cost ? *trace.final_global_cost
                                                 : cost(dataset, trace.final_centers);
        row.wall_ms = outcomes[i].wall_ms;
        if (spec.audit_global) {
            row.audit_progress = pass_fail(audit_global_progress(trace, eps).passed());
            row.audit_proximity = pass_fail(audit_center_proximity(trace, d, eps).passed());
        }
        if (trace.config.rate.kind() == LearningRatePolicy::Kind::PaperSqrt) {
            row.audit_implication =
                pass_fail(audit_sklearn_implication(trace, eps, row.k, d).passed());
        }

        const fs::path path = spec.out_dir / trace_name(job.run);
        io::write_text_file(path, io::serialize_trace(trace, spec.data));
        result.trace_files.push_back(path);
        csv += metrics_csv_row(row) + "\n";

        log << "run " << row.run << " (trial " << row.trial << ", k=" << row.k << ", b=" << row.b
            << ", eps=" << io::format_double(eps) << "): " << row.iterations << " iterations, "
            << to_string(row.reason) << ", f_X=" << io::format_double(row.final_cost) << "\n";
        result.rows.push_back(std::move(row));
    }
    io::write_text_file(spec.out_dir / "metrics.csv", csv);
    return result;
}

RunTrace replay(const io::TraceDocument& doc) {
    if (!doc.data) throw MissingAuditData("trace does not record its data source; cannot replay");
    const Dataset dataset = io::load_dataset(*doc.data);
    return run(dataset, doc.trace.config);
}

namespace {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const MissingAuditData& e) {
        err << "error: " << e.what() << "\n";
        return kExitContract;
    } catch (const ContractViolation& e) {
        err << "error: " << e.what() << "\n";
        return kExitContract;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitAuditFailed;
    }
}

}  // namespace

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto result = run_experiment(spec, out);
        out << result.rows.size() << " run(s); traces and metrics.csv in "
            << spec.out_dir.string() << "\n";
        return kExitOk;
    });
}

AuditReport audit_traces(const AuditRequest& request) {
    AuditReport report;
    for (const auto& path : request.traces) {
        const RunTrace trace = io::read_trace_file(path).trace;
        const double eps = request.eps.value_or(trace.config.stop.epsilon);
        const std::size_t d = trace.final_centers.dim();
        const std::size_t k = trace.config.k;

        std::vector<std::string> checks = request.checks;
        if (checks.empty()) {
            const auto has = [&](auto member) {
                return !trace.iterations.empty() &&
                       std::all_of(trace.iterations.begin(), trace.iterations.end(),
                                   [&](const IterationRecord& r) { return (r.*member).has_value(); });
            };
            if (has(&IterationRecord::global_cost)) checks.emplace_back("progress");
            if (has(&IterationRecord::cbar_distance)) checks.emplace_back("proximity");
            if (trace.config.rate.kind() == LearningRatePolicy::Kind::PaperSqrt) {
                checks.emplace_back("implication");
            }
        }
        for (const auto& name : checks) {
            try {
                if (name == "progress") {
                    report.add(audit_global_progress(trace, eps));
                } else if (name == "proximity") {
                    report.add(audit_center_proximity(trace, d, eps));
                } else if (name == "implication") {
                    report.add(audit_sklearn_implication(trace, eps, k, d));
                } else {
                    throw ContractViolation("unknown audit check '" + name +
                                            "' (expected progress, proximity or implication)");
                }
            } catch (const MissingAuditData& e) {
                throw MissingAuditData(path.string() + ": " + e.what());
            }
        }
    }

    if (request.concentration_data) {
        const Dataset dataset = io::load_dataset(*request.concentration_data);
        const RandomStream root(request.seed);
        RandomStream init_rng = root.substream(0);
        RandomStream batch_rng = root.substream(1);
        const Centers centers = init_kmeanspp(dataset, request.k, init_rng);
        report.add(audit_concentration(dataset, centers, request.b, request.trials, request.delta,
                                       batch_rng));
    }
    return report;
}

int cmd_audit(const AuditRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const AuditReport report = audit_traces(request);
        if (report.checks.empty()) {
            throw MissingAuditData("nothing to audit: no trace carried auditable data");
        }
        std::vector<std::string> sources;
        for (const auto& p : request.traces) sources.push_back(p.string());
        if (request.concentration_data) sources.emplace_back("concentration");
        io::write_text_file(request.report, io::serialize_report(report, sources));

        for (const auto& c : report.checks) {
            out << c.name << ": " << (c.passed() ? "PASS" : "FAIL") << " (" << c.violations
                << "/" << c.total << " violations, budget "
                << c.budget << ")\n";
        }
        return report.passed() ? kExitOk : kExitAuditFailed;
    });
}

int cmd_gen(const io::GenSpec& spec, const fs::path& out_path, std::ostream& out,
            std::ostream& err) {
    return guarded(err, [&] {
        const Dataset dataset = io::generate_synthetic(spec);
        io::write_points_csv(out_path, dataset);
        out << "wrote " << dataset.size() << " points (d=" << dataset.dim() << ") to "
            << out_path.string() << "\n";
        return kExitOk;
    });
}

int cmd_oracle_check(const io::DataSource& data, std::size_t k, std::uint64_t seed,
                     std::size_t trials, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        detail::require(trials >= 1, "trials must be at least 1");
        const Dataset dataset = io::load_dataset(data);
        const auto optimum = oracle::brute_force_optimal(oracle::TinyInstance(dataset, k));

        double mean_init = 0.0;
        const RandomStream root(seed);
        for (std::size_t t = 0; t < trials; ++t) {
            RandomStream rng = root.substream(t);
            mean_init += cost(dataset, init_kmeanspp(dataset, k, rng));
        }
        mean_init /= static_cast<double>(trials);

        const double factor = 8.0 * (std::log(static_cast<double>(k)) + 2.0);
        const bool ok = mean_init <= factor * optimum.cost;
        out << "optimal cost: " << io::format_double(optimum.cost) << "\n"
            << "mean k-means++ cost over " << trials
            << " seeds: " << io::format_double(mean_init) << "\n"
            << "allowed factor 8(ln k + 2): " << io::format_double(factor) << "\n"
            << (ok ? "PASS" : "FAIL") << "\n";
        return ok ? kExitOk : kExitAuditFailed;
    });
}

}  // namespace mbk
