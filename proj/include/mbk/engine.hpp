#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbk/geometry.hpp"
#include "mbk/random.hpp"
#include "mbk/sampling.hpp"

namespace mbk {

/**
 * Per-cluster learning rate for the convex center update.
 *
 *   PaperSqrt          alpha_j = sqrt(b_j / b)
 *   SklearnCumulative  alpha_j = b_j / (sum of b_j over all iterations so far,
 *                      this one included); 0 while that sum is 0
 *   Constant(c)        alpha_j = c when b_j > 0, else 0
 *
 * Only SklearnCumulative carries state: call accumulate() with this
 * iteration's counts before asking for the rates.
 */
class LearningRatePolicy {
public:
    enum class Kind { PaperSqrt, SklearnCumulative, Constant };

    static LearningRatePolicy paper_sqrt() { return LearningRatePolicy(Kind::PaperSqrt, 0.0); }
    static LearningRatePolicy sklearn_cumulative() {
        return LearningRatePolicy(Kind::SklearnCumulative, 0.0);
    }
    static LearningRatePolicy constant(double rate);

    /// "paper", "sklearn" or "const:<c>".
    static LearningRatePolicy parse(std::string_view text);
    std::string to_string() const;

    Kind kind() const { return kind_; }
    double constant_rate() const { return constant_; }
    std::span<const std::uint64_t> cumulative() const { return cumulative_; }

    void accumulate(std::span<const std::size_t> counts);
    void reset() { cumulative_.clear(); }

    friend bool operator==(const LearningRatePolicy&, const LearningRatePolicy&) = default;

private:
    LearningRatePolicy(Kind kind, double rate) : kind_(kind), constant_(rate) {}

    Kind kind_;
    double constant_;
    std::vector<std::uint64_t> cumulative_;
};

std::vector<double> learning_rate(const LearningRatePolicy& policy,
                                  std::span<const std::size_t> counts, std::size_t b);

struct StoppingRule {
    enum class Kind { BatchImprovement, CenterMovement };

    Kind kind = Kind::BatchImprovement;
    double epsilon = 0.0;

    static StoppingRule batch_improvement(double epsilon);
    static StoppingRule center_movement(double epsilon);

    friend bool operator==(const StoppingRule&, const StoppingRule&) = default;
};

/// "improve" / "move".
std::string to_string(StoppingRule::Kind kind);
StoppingRule::Kind parse_stopping_kind(std::string_view text);

/// Strict comparison: stop iff the watched quantity is < epsilon.
bool should_stop(const StoppingRule& rule, double local_improvement, double movement);

enum class Algorithm { MiniBatch, Lloyd };
/// Sampled draws b points per iteration; FullData uses all of X in order
/// (b = n), which turns local quantities into global ones.
enum class BatchMode { Sampled, FullData };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);
std::string to_string(BatchMode mode);
BatchMode parse_batch_mode(std::string_view text);

struct RunConfig {
    Algorithm algorithm = Algorithm::MiniBatch;
    std::size_t k = 1;
    std::size_t b = 1;
    LearningRatePolicy rate = LearningRatePolicy::paper_sqrt();
    StoppingRule stop = StoppingRule::batch_improvement(1e-3);
    InitScheme init = InitScheme::KMeansPlusPlus;
    /// Required when init == Explicit.
    std::optional<Centers> initial_centers;
    std::uint64_t seed = 0;
    /// 0 selects default_iteration_cap().
    std::size_t max_iter_cap = 0;
    bool audit_global_cost = false;
    bool record_cbar = false;
    BatchMode batch_mode = BatchMode::Sampled;
};

/// 10 * ceil(d / epsilon).
std::size_t default_iteration_cap(std::size_t d, double epsilon);

/// Throws ContractViolation when the config cannot run on `dataset`.
void validate(const RunConfig& config, const Dataset& dataset);

struct IterationRecord {
    std::size_t iteration = 0;  // 1-based
    std::vector<std::size_t> counts;
    std::vector<double> alphas;
    double local_improvement = 0.0;  // f_B(C_i) - f_B(C_{i+1})
    double movement = 0.0;           // sum_j |C_{i+1}^j - C_i^j|^2
    std::optional<double> global_cost;                // f_X(C_i)
    std::optional<std::vector<double>> cbar_distance;  // |C_{i+1}^j - Cbar_{i+1}^j|
};

enum class Termination { StopRuleFired, CapReached };

std::string to_string(Termination reason);
Termination parse_termination(std::string_view text);

struct RunTrace {
    RunConfig config;  // echo, with max_iter_cap resolved
    Centers initial_centers;
    Centers final_centers;
    std::vector<IterationRecord> iterations;
    Termination reason = Termination::CapReached;
    std::optional<double> final_global_cost;  // f_X at return
};

struct Partition {
    std::vector<PointMatrix> parts;
    Assignment assignment;
};

/// Split `points` into k parts by nearest center (smallest index on ties),
/// preserving tuple order inside each part.
Partition partition_batch(const PointMatrix& points, const Centers& centers);

/// C_{i+1}^j = (1 - alpha_j) C_i^j + alpha_j cm(part_j). Empty parts require
/// alpha_j == 0 and leave the center untouched.
Centers update_centers(const Centers& centers, std::span<const PointMatrix> parts,
                       std::span<const double> alphas);

/// Everything one mini-batch iteration produces.
struct StepResult {
    Centers next;
    std::vector<std::size_t> counts;
    std::vector<double> alphas;
    /// Delta(C_i^j, cm(B_i^j)); 0 for empty parts.
    std::vector<double> shift;
    double batch_cost_before = 0.0;  // f_B(C_i)
    double batch_cost_after = 0.0;   // f_B(C_{i+1})
};

StepResult step(const Centers& centers, const PointMatrix& batch, LearningRatePolicy& policy);

Centers initialize(const Dataset& dataset, const RunConfig& config, RandomStream& rng);

/// Mini-batch loop (or Lloyd, per config.algorithm). Returns C_{i+1} of the
/// iteration whose stop test fired, or the centers at the cap.
RunTrace run(const Dataset& dataset, const RunConfig& config, RandomStream& rng);
/// Same, with the stream seeded from config.seed.
RunTrace run(const Dataset& dataset, const RunConfig& config);

/**
 * Classic Lloyd iterations on all of X. Stops once an update leaves every
 * point's assignment unchanged, or after config.max_iter_cap updates. Empty
 * clusters keep their center. Global cost is recorded every iteration.
 * Uses config.k, config.init, config.initial_centers and config.max_iter_cap.
 */
RunTrace lloyd_full_batch(const Dataset& dataset, const RunConfig& config, RandomStream& rng);

}  // namespace mbk
