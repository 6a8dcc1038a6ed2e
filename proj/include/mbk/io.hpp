#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mbk/analysis.hpp"
#include "mbk/engine.hpp"
#include "mbk/geometry.hpp"

namespace mbk::io {

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct IngestOptions {
    /// Per-coordinate min-max scaling; constant coordinates map to 0.5.
    bool normalize = false;
    /// Skip the first line.
    bool header = false;
};

/// One comma-separated point per line. Blank lines are ignored. Errors name
/// the offending line (1-based, counting the header).
Dataset parse_csv(std::string_view text, const IngestOptions& options,
                  std::string_view source = "<memory>");
Dataset ingest_csv(const std::filesystem::path& path, const IngestOptions& options);

void write_points_csv(const std::filesystem::path& path, const PointMatrix& points);

struct GenSpec {
    enum class Kind { GaussianMixture, Uniform };

    Kind kind = Kind::GaussianMixture;
    std::size_t n = 1000;
    std::size_t d = 2;
    std::size_t components = 5;
    double sigma = 0.05;
    std::uint64_t seed = 1;

    friend bool operator==(const GenSpec&, const GenSpec&) = default;
};

/// "gaussian_mixture:n=1000,d=2,components=5,sigma=0.05,seed=1" or
/// "uniform:n=1000,d=2,seed=1". "mixture" is accepted for the first kind;
/// omitted keys keep their defaults.
GenSpec parse_gen_spec(std::string_view text);
std::string to_string(const GenSpec& spec);

/**
 * gaussian_mixture: component means uniform in [0.2,0.8]^d, each point picks
 * a component uniformly and adds N(0, sigma^2 I) noise, clipped to [0,1].
 * uniform: i.i.d. uniform on [0,1]^d. Fully determined by spec.seed.
 */
Dataset generate_synthetic(const GenSpec& spec);

struct DataSource {
    enum class Kind { File, Generated };

    Kind kind = Kind::Generated;
    std::string path;
    IngestOptions ingest;
    GenSpec gen;

    friend bool operator==(const DataSource& a, const DataSource& b) {
        return a.kind == b.kind && a.path == b.path && a.ingest.normalize == b.ingest.normalize &&
               a.ingest.header == b.ingest.header && a.gen == b.gen;
    }
};

Dataset load_dataset(const DataSource& source);

// ---------------------------------------------------------------------------
// Traces and reports
// ---------------------------------------------------------------------------

struct TraceDocument {
    RunTrace trace;
    std::optional<DataSource> data;
};

/**
 * Layout:
 *   {config: {..., data}, init_centers, iterations: [{i, counts, alphas,
 *    local_improvement, movement, global_cost?, cbar_dist?}], final_centers,
 *    reason, final_global_cost?}
 * Floating-point values are written in shortest round-trip form, so parsing
 * and re-serializing reproduces the text byte for byte.
 */
std::string serialize_trace(const RunTrace& trace, const std::optional<DataSource>& data);
TraceDocument parse_trace(std::string_view json);
TraceDocument read_trace_file(const std::filesystem::path& path);

std::string serialize_report(const AuditReport& report, const std::vector<std::string>& sources);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Flat `key = value` lines; `#` starts a comment; blank lines are skipped.
std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text);

/// Shortest text that parses back to the same double ("0.5", "0.1").
std::string format_double(double value);

}  // namespace mbk::io
