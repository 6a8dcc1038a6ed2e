#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mbk/engine.hpp"
#include "mbk/io.hpp"

namespace mbk {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitAuditFailed = 1,
    kExitContract = 2,
    kExitIo = 3,
};

struct ExperimentSpec {
    io::DataSource data;
    Algorithm algorithm = Algorithm::MiniBatch;
    std::vector<std::size_t> k_values{5};
    /// Empty: b is filled in from the Main batch-size formula per (k, eps).
    std::vector<std::size_t> b_values;
    std::vector<double> eps_values{0.5};
    LearningRatePolicy rate = LearningRatePolicy::paper_sqrt();
    StoppingRule::Kind stop = StoppingRule::Kind::BatchImprovement;
    InitScheme init = InitScheme::KMeansPlusPlus;
    BatchMode batch_mode = BatchMode::Sampled;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::size_t cap = 0;
    bool audit_global = false;
    /// Constant in front of the batch-size formula.
    double batch_constant = 1.0;
    std::filesystem::path out_dir = ".";
    /// 0: MBK_THREADS if set, otherwise hardware concurrency.
    std::size_t threads = 0;
};

struct MetricsRow {
    std::size_t run = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t k = 0, b = 0, d = 0, n = 0;
    double eps = 0.0;
    std::size_t iterations = 0;
    Termination reason = Termination::CapReached;
    double final_cost = 0.0;
    std::string audit_progress = "na";
    std::string audit_proximity = "na";
    std::string audit_implication = "na";
    double wall_ms = 0.0;  // not reproducible
};

/// Header line of metrics.csv; wall_ms is the only non-deterministic column.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);

struct ExperimentResult {
    std::vector<MetricsRow> rows;
    std::vector<std::filesystem::path> trace_files;
};

/**
 * Runs every (k, b, eps) sweep point for every trial. Trial t uses seed
 * RandomStream::derive_seed(spec.seed, t), which is echoed in its trace, so
 * a trace replays from its own config. Writes trace_NNNN.json per run and
 * metrics.csv into spec.out_dir, and one summary line per run to `log`.
 */
ExperimentResult run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Re-executes a trace from its embedded config and data source.
RunTrace replay(const io::TraceDocument& doc);

/// run/sweep: 0 ok, 2 contract violation, 3 I/O error.
int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

struct AuditRequest {
    std::vector<std::filesystem::path> traces;
    /// Subset of {progress, proximity, implication}; empty selects every
    /// check whose data the trace carries.
    std::vector<std::string> checks;
    /// Overrides each trace's own epsilon.
    std::optional<double> eps;
    std::filesystem::path report = "audit.json";

    /// Concentration audit on a dataset with k-means++ centers fixed up front.
    std::optional<io::DataSource> concentration_data;
    std::size_t k = 5;
    std::size_t b = 500;
    double delta = 0.05;
    std::size_t trials = 2000;
    std::uint64_t seed = 0;
};

AuditReport audit_traces(const AuditRequest& request);

/// 0 all checks pass, 1 a check failed, 2 missing audit data or bad input,
/// 3 I/O error.
int cmd_audit(const AuditRequest& request, std::ostream& out, std::ostream& err);

/// Writes the generated dataset as CSV.
int cmd_gen(const io::GenSpec& spec, const std::filesystem::path& out_path, std::ostream& out,
            std::ostream& err);

/// Compares k-means++ seeding against the exact optimum on a tiny dataset.
int cmd_oracle_check(const io::DataSource& data, std::size_t k, std::uint64_t seed,
                     std::size_t trials, std::ostream& out, std::ostream& err);

}  // namespace mbk
