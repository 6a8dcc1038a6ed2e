#include "mbk/engine.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "mbk/analysis.hpp"
#include "mbk/error.hpp"

namespace mbk {

using detail::require;

LearningRatePolicy LearningRatePolicy::constant(double rate) {
    require(std::isfinite(rate) && rate >= 0.0 && rate <= 1.0,
            "constant learning rate must lie in [0,1]");
    return LearningRatePolicy(Kind::Constant, rate);
}

LearningRatePolicy LearningRatePolicy::parse(std::string_view text) {
    if (text == "paper") return paper_sqrt();
    if (text == "sklearn") return sklearn_cumulative();
    constexpr std::string_view prefix = "const:";
    if (text.starts_with(prefix)) {
        const auto body = text.substr(prefix.size());
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
        if (ec == std::errc() && ptr == body.data() + body.size()) return constant(value);
    }
    throw ContractViolation("unknown learning rate '" + std::string(text) +
                            "' (expected paper, sklearn or const:<c>)");
}

std::string LearningRatePolicy::to_string() const {
    switch (kind_) {
        case Kind::PaperSqrt: return "paper";
        case Kind::SklearnCumulative: return "sklearn";
        case Kind::Constant: {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, constant_,
                                           std::chars_format::general, 17);
            return "const:" + std::string(buf, res.ptr);
        }
    }
    return "?";
}

void LearningRatePolicy::accumulate(std::span<const std::size_t> counts) {
    if (cumulative_.empty()) cumulative_.assign(counts.size(), 0);
    require(cumulative_.size() == counts.size(), "cluster count changed between iterations");
    for (std::size_t j = 0; j < counts.size(); ++j) cumulative_[j] += counts[j];
}

std::vector<double> learning_rate(const LearningRatePolicy& policy,
                                  std::span<const std::size_t> counts, std::size_t b) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    require(total == b, "per-cluster counts sum to " + std::to_string(total) +
                            ", expected batch size " + std::to_string(b));

    std::vector<double> alphas(counts.size(), 0.0);
    const auto cumulative = policy.cumulative();
    if (policy.kind() == LearningRatePolicy::Kind::SklearnCumulative) {
        require(cumulative.size() == counts.size(),
                "cumulative counts must be accumulated before forming sklearn rates");
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
        if (counts[j] == 0) continue;
        const double bj = static_cast<double>(counts[j]);
        switch (policy.kind()) {
            case LearningRatePolicy::Kind::PaperSqrt:
                alphas[j] = std::sqrt(bj / static_cast<double>(b));
                break;
            case LearningRatePolicy::Kind::SklearnCumulative:
                require(cumulative[j] >= counts[j],
                        "cumulative count smaller than this iteration's count");
                alphas[j] = bj / static_cast<double>(cumulative[j]);
                break;
            case LearningRatePolicy::Kind::Constant:
                alphas[j] = policy.constant_rate();
                break;
        }
        require(alphas[j] >= 0.0 && alphas[j] <= 1.0, "learning rate left [0,1]");
    }
    return alphas;
}

StoppingRule StoppingRule::batch_improvement(double epsilon) {
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    return {Kind::BatchImprovement, epsilon};
}

StoppingRule StoppingRule::center_movement(double epsilon) {
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    return {Kind::CenterMovement, epsilon};
}

std::string to_string(StoppingRule::Kind kind) {
    return kind == StoppingRule::Kind::BatchImprovement ? "improve" : "move";
}

StoppingRule::Kind parse_stopping_kind(std::string_view text) {
    if (text == "improve") return StoppingRule::Kind::BatchImprovement;
    if (text == "move") return StoppingRule::Kind::CenterMovement;
    throw ContractViolation("unknown stopping rule '" + std::string(text) + "'");
}

bool should_stop(const StoppingRule& rule, double local_improvement, double movement) {
    require(rule.epsilon > 0.0, "epsilon must be positive");
    const double watched =
        rule.kind == StoppingRule::Kind::BatchImprovement ? local_improvement : movement;
    return watched < rule.epsilon;
}

std::string to_string(Algorithm algorithm) {
    return algorithm == Algorithm::MiniBatch ? "minibatch" : "lloyd";
}

Algorithm parse_algorithm(std::string_view text) {
    if (text == "minibatch") return Algorithm::MiniBatch;
    if (text == "lloyd") return Algorithm::Lloyd;
    throw ContractViolation("unknown algorithm '" + std::string(text) + "'");
}

std::string to_string(BatchMode mode) { return mode == BatchMode::Sampled ? "sampled" : "full"; }

BatchMode parse_batch_mode(std::string_view text) {
    if (text == "sampled") return BatchMode::Sampled;
    if (text == "full") return BatchMode::FullData;
    throw ContractViolation("unknown batch mode '" + std::string(text) + "'");
}

std::string to_string(Termination reason) {
    return reason == Termination::StopRuleFired ? "stop_rule" : "cap_reached";
}

Termination parse_termination(std::string_view text) {
    if (text == "stop_rule") return Termination::StopRuleFired;
    if (text == "cap_reached") return Termination::CapReached;
    throw ContractViolation("unknown termination reason '" + std::string(text) + "'");
}

std::size_t default_iteration_cap(std::size_t d, double epsilon) {
    require(epsilon > 0.0, "epsilon must be positive");
    return 10 * static_cast<std::size_t>(std::ceil(static_cast<double>(d) / epsilon));
}

void validate(const RunConfig& config, const Dataset& dataset) {
    require(config.k >= 1, "k must be at least 1");
    require(config.k <= dataset.size(), "k = " + std::to_string(config.k) + " exceeds n = " +
                                            std::to_string(dataset.size()));
    require(config.b >= 1, "batch size must be at least 1");
    require(std::isfinite(config.stop.epsilon) && config.stop.epsilon > 0.0,
            "epsilon must be positive");
    if (config.rate.kind() == LearningRatePolicy::Kind::Constant) {
        const double c = config.rate.constant_rate();
        require(c >= 0.0 && c <= 1.0, "constant learning rate must lie in [0,1]");
    }
    if (config.init == InitScheme::Explicit) {
        require(config.initial_centers.has_value(), "explicit init needs initial centers");
        const auto& c = *config.initial_centers;
        require(c.size() == config.k, "explicit init must provide exactly k centers");
        require(c.dim() == dataset.dim(), "explicit centers have the wrong dimension");
        require(within_unit_cube(c), "explicit centers must lie in [0,1]^d");
    }
}

Partition partition_batch(const PointMatrix& points, const Centers& centers) {
    Partition out;
    out.assignment = assign(points, centers);
    out.parts.assign(centers.size(), PointMatrix(centers.dim()));
    for (std::size_t j = 0; j < centers.size(); ++j) out.parts[j].reserve(out.assignment.counts[j]);
    for (std::size_t i = 0; i < points.size(); ++i) {
        out.parts[out.assignment.labels[i]].push_back(points[i]);
    }
    return out;
}

Centers update_centers(const Centers& centers, std::span<const PointMatrix> parts,
                       std::span<const double> alphas) {
    require(parts.size() == centers.size() && alphas.size() == centers.size(),
            "need one part and one learning rate per center");
    Centers next = centers;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        const double alpha = alphas[j];
        require(alpha >= 0.0 && alpha <= 1.0, "learning rate must lie in [0,1]");
        if (parts[j].empty()) {
            require(alpha == 0.0, "nonzero learning rate for an empty cluster");
            continue;
        }
        if (alpha == 0.0) continue;
        const Point mean = center_of_mass(parts[j]);
        auto c = next[j];
        for (std::size_t l = 0; l < c.size(); ++l) c[l] = (1.0 - alpha) * c[l] + alpha * mean[l];
    }
    return next;
}

StepResult step(const Centers& centers, const PointMatrix& batch, LearningRatePolicy& policy) {
    Partition partition = partition_batch(batch, centers);
    StepResult out;
    out.counts = partition.assignment.counts;
    policy.accumulate(out.counts);
    out.alphas = learning_rate(policy, out.counts, batch.size());
    out.next = update_centers(centers, partition.parts, out.alphas);
    out.shift.assign(centers.size(), 0.0);
    for (std::size_t j = 0; j < centers.size(); ++j) {
        if (!partition.parts[j].empty()) {
            out.shift[j] = squared_distance(centers[j], center_of_mass(partition.parts[j]));
        }
    }
    out.batch_cost_before = cost(batch, centers);
    out.batch_cost_after = cost(batch, out.next);
    return out;
}

Centers initialize(const Dataset& dataset, const RunConfig& config, RandomStream& rng) {
    switch (config.init) {
        case InitScheme::KMeansPlusPlus: return init_kmeanspp(dataset, config.k, rng);
        case InitScheme::Random: return init_random(dataset, config.k, rng);
        case InitScheme::Explicit:
            require(config.initial_centers.has_value(), "explicit init needs initial centers");
            return *config.initial_centers;
    }
    throw ContractViolation("unknown init scheme");
}

namespace {

RunConfig resolved(const RunConfig& config, const Dataset& dataset) {
    RunConfig echo = config;
    echo.rate.reset();
    if (echo.max_iter_cap == 0) {
        echo.max_iter_cap = default_iteration_cap(dataset.dim(), config.stop.epsilon);
    }
    if (echo.batch_mode == BatchMode::FullData || echo.algorithm == Algorithm::Lloyd) {
        echo.b = dataset.size();
    }
    return echo;
}

std::vector<double> cbar_distances(const Centers& centers, const Centers& next,
                                   const Dataset& dataset, std::span<const double> alphas) {
    const Centers cbar = hypothetical_full_update(centers, dataset, alphas);
    std::vector<double> dist(centers.size());
    for (std::size_t j = 0; j < centers.size(); ++j) {
        dist[j] = std::sqrt(squared_distance(next[j], cbar[j]));
    }
    return dist;
}

}  // namespace

RunTrace run(const Dataset& dataset, const RunConfig& config, RandomStream& rng) {
    validate(config, dataset);
    if (config.algorithm == Algorithm::Lloyd) return lloyd_full_batch(dataset, config, rng);

    RunTrace trace;
    trace.config = resolved(config, dataset);
    const RunConfig& cfg = trace.config;

    Centers centers = initialize(dataset, cfg, rng);
    trace.initial_centers = centers;
    LearningRatePolicy policy = cfg.rate;

    for (std::size_t i = 1; i <= cfg.max_iter_cap; ++i) {
        IterationRecord record;
        record.iteration = i;
        if (cfg.audit_global_cost) record.global_cost = cost(dataset, centers);

        StepResult result = cfg.batch_mode == BatchMode::FullData
                                ? step(centers, dataset, policy)
                                : step(centers, sample_batch(dataset, cfg.b, rng).points, policy);

        if (cfg.record_cbar) {
            record.cbar_distance = cbar_distances(centers, result.next, dataset, result.alphas);
        }
        record.counts = std::move(result.counts);
        record.alphas = std::move(result.alphas);
        record.local_improvement = result.batch_cost_before - result.batch_cost_after;
        record.movement = center_movement(centers, result.next);
        centers = std::move(result.next);

        const bool stop = should_stop(cfg.stop, record.local_improvement, record.movement);
        trace.iterations.push_back(std::move(record));
        if (stop) {
            trace.reason = Termination::StopRuleFired;
            break;
        }
    }

    if (cfg.audit_global_cost) trace.final_global_cost = cost(dataset, centers);
    trace.final_centers = std::move(centers);
    return trace;
}

RunTrace run(const Dataset& dataset, const RunConfig& config) {
    RandomStream rng(config.seed);
    return run(dataset, config, rng);
}

RunTrace lloyd_full_batch(const Dataset& dataset, const RunConfig& config, RandomStream& rng) {
    validate(config, dataset);
    RunTrace trace;
    trace.config = resolved(config, dataset);
    trace.config.algorithm = Algorithm::Lloyd;
    trace.config.audit_global_cost = true;
    const RunConfig& cfg = trace.config;

    Centers centers = initialize(dataset, cfg, rng);
    trace.initial_centers = centers;
    Partition partition = partition_batch(dataset, centers);

    for (std::size_t i = 1; i <= cfg.max_iter_cap; ++i) {
        Centers next = centers;
        std::vector<double> alphas(centers.size(), 0.0);
        for (std::size_t j = 0; j < centers.size(); ++j) {
            if (partition.parts[j].empty()) continue;
            const Point mean = center_of_mass(partition.parts[j]);
            std::copy(mean.begin(), mean.end(), next[j].begin());
            alphas[j] = 1.0;
        }

        IterationRecord record;
        record.iteration = i;
        record.counts = partition.assignment.counts;
        record.alphas = std::move(alphas);
        record.global_cost = cost(dataset, centers);
        record.local_improvement = *record.global_cost - cost(dataset, next);
        record.movement = center_movement(centers, next);
        if (cfg.record_cbar) record.cbar_distance = std::vector<double>(centers.size(), 0.0);
        trace.iterations.push_back(std::move(record));

        Partition next_partition = partition_batch(dataset, next);
        const bool stable = next_partition.assignment.labels == partition.assignment.labels;
        centers = std::move(next);
        partition = std::move(next_partition);
        if (stable) {
            trace.reason = Termination::StopRuleFired;
            break;
        }
    }

    trace.final_global_cost = cost(dataset, centers);
    trace.final_centers = std::move(centers);
    return trace;
}

}  // namespace mbk
