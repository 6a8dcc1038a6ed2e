#include "mbk/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "mbk/error.hpp"

namespace mbk {

using detail::require;

std::string to_string(BatchRegime regime) {
    switch (regime) {
        case BatchRegime::WarmUp: return "warmup";
        case BatchRegime::Main: return "main";
        case BatchRegime::Sklearn: return "sklearn";
    }
    return "?";
}

BatchRegime parse_batch_regime(std::string_view text) {
    if (text == "warmup") return BatchRegime::WarmUp;
    if (text == "main") return BatchRegime::Main;
    if (text == "sklearn") return BatchRegime::Sklearn;
    throw ContractViolation("unknown batch regime '" + std::string(text) + "'");
}

namespace {

double main_formula(double n, double k, double d, double eps, double c) {
    const double ratio = d / eps;
    return c * ratio * ratio * std::log(n * k * d / eps);
}

std::size_t ceil_at_least_one(double value) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(value)));
}

}  // namespace

BatchSizeRecommendation recommended_batch_size(BatchRegime regime, std::size_t n, std::size_t k,
                                               std::size_t d, double epsilon, double c,
                                               double c_t) {
    require(n >= 1 && k >= 1 && d >= 1, "n, k and d must be positive");
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    require(std::isfinite(c) && c > 0.0 && std::isfinite(c_t) && c_t > 0.0,
            "formula constants must be positive");
    require(epsilon <= static_cast<double>(d),
            "epsilon > d terminates at the first iteration; no batch size to recommend");

    const auto nf = static_cast<double>(n);
    const auto kf = static_cast<double>(k);
    const auto df = static_cast<double>(d);

    double raw = 0.0;
    switch (regime) {
        case BatchRegime::Main: raw = main_formula(nf, kf, df, epsilon, c); break;
        case BatchRegime::WarmUp: {
            const double t = std::ceil(c_t * df / epsilon);
            const double ratio = df / epsilon;
            raw = c * ratio * ratio * (kf * df + std::log(nf * t));
            break;
        }
        case BatchRegime::Sklearn:
            raw = main_formula(nf, kf, df, implied_improvement_threshold(epsilon, k, d), c);
            break;
    }

    BatchSizeRecommendation rec;
    rec.regime = regime;
    rec.b = ceil_at_least_one(raw);
    rec.n = n;
    rec.k = k;
    rec.d = d;
    rec.epsilon = epsilon;
    rec.c = c;
    rec.exceeds_n = rec.b > n;
    return rec;
}

std::size_t termination_bound(std::size_t d, double epsilon, double c_t) {
    require(d >= 1 && epsilon > 0.0 && c_t > 0.0, "termination bound needs positive inputs");
    return ceil_at_least_one(c_t * static_cast<double>(d) / epsilon);
}

std::size_t termination_bound_sklearn(std::size_t d, double epsilon, std::size_t k, double c_t) {
    require(d >= 1 && k >= 1 && epsilon > 0.0 && c_t > 0.0,
            "termination bound needs positive inputs");
    const double ratio = static_cast<double>(d) / epsilon;
    return ceil_at_least_one(c_t * std::pow(ratio, 1.5) * std::sqrt(static_cast<double>(k)));
}

double implied_improvement_threshold(double epsilon, std::size_t k, std::size_t d) {
    return std::pow(epsilon, 1.5) / std::sqrt(static_cast<double>(k * d));
}

Centers hypothetical_full_update(const Centers& centers, const Dataset& dataset,
                                 std::span<const double> alphas) {
    require(alphas.size() == centers.size(), "need one learning rate per center");
    const Partition partition = partition_batch(dataset, centers);
    for (std::size_t j = 0; j < centers.size(); ++j) {
        require(!(partition.parts[j].empty() && alphas[j] > 0.0),
                "positive learning rate for a center that owns no data point");
    }
    return update_centers(centers, partition.parts, alphas);
}

bool AuditCheck::passed() const {
    if (budget <= 0.0) return violations == 0;
    return violation_fraction() <= budget;
}

void AuditCheck::merge(const AuditCheck& other) {
    total += other.total;
    violations += other.violations;
    if (other.worst_margin) {
        worst_margin = worst_margin ? std::min(*worst_margin, *other.worst_margin)
                                    : *other.worst_margin;
    }
    if (other.worst_ratio) {
        worst_ratio = worst_ratio ? std::max(*worst_ratio, *other.worst_ratio)
                                  : *other.worst_ratio;
    }
    for (const auto& [key, value] : other.details) details.try_emplace(key, value);
}

void AuditReport::add(const AuditCheck& check) {
    for (auto& existing : checks) {
        if (existing.name == check.name) {
            existing.merge(check);
            return;
        }
    }
    checks.push_back(check);
}

const AuditCheck* AuditReport::find(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

bool AuditReport::passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const AuditCheck& c) { return c.passed(); });
}

namespace {

void note_margin(AuditCheck& check, double margin) {
    check.worst_margin = check.worst_margin ? std::min(*check.worst_margin, margin) : margin;
}

}  // namespace

AuditCheck audit_global_progress(const RunTrace& trace, double epsilon, double fraction,
                                 double budget) {
    require(epsilon > 0.0 && fraction > 0.0, "progress audit needs positive epsilon");
    for (const auto& rec : trace.iterations) {
        if (!rec.global_cost) {
            throw MissingAuditData("global-progress audit needs per-iteration global costs "
                                   "(record with audit_global_cost)");
        }
    }
    AuditCheck check;
    check.name = "global_progress";
    check.budget = budget;
    check.details["required_gain"] = fraction * epsilon;

    const double required = fraction * epsilon;
    const auto& its = trace.iterations;
    for (std::size_t i = 0; i + 1 < its.size(); ++i) {
        const double gain = *its[i].global_cost - *its[i + 1].global_cost;
        ++check.total;
        if (gain < required - 1e-9) ++check.violations;
        note_margin(check, gain - required);
    }
    return check;
}

AuditCheck audit_center_proximity(const RunTrace& trace, std::size_t d, double epsilon,
                                  double budget) {
    require(d >= 1 && epsilon > 0.0, "proximity audit needs positive d and epsilon");
    AuditCheck check;
    check.name = "center_proximity";
    check.budget = budget;
    const double bound = epsilon / (10.0 * std::sqrt(static_cast<double>(d)));
    check.details["distance_bound"] = bound;

    for (const auto& rec : trace.iterations) {
        if (!rec.cbar_distance) {
            throw MissingAuditData("center-proximity audit needs per-iteration C-bar distances "
                                   "(record with record_cbar)");
        }
        for (double dist : *rec.cbar_distance) {
            ++check.total;
            if (dist > bound) ++check.violations;
            note_margin(check, bound - dist);
            const double ratio = dist / bound;
            check.worst_ratio = check.worst_ratio ? std::max(*check.worst_ratio, ratio) : ratio;
        }
    }
    return check;
}

AuditCheck audit_sklearn_implication(const RunTrace& trace, double epsilon, std::size_t k,
                                     std::size_t d) {
    require(trace.config.rate.kind() == LearningRatePolicy::Kind::PaperSqrt,
            "the movement-implies-improvement audit only applies to the sqrt(b_j/b) rate");
    require(epsilon > 0.0 && k >= 1 && d >= 1, "implication audit needs positive inputs");
    AuditCheck check;
    check.name = "sklearn_implication";
    check.budget = 0.0;
    const double threshold = implied_improvement_threshold(epsilon, k, d);
    check.details["improvement_threshold"] = threshold;

    for (const auto& rec : trace.iterations) {
        if (!(rec.movement > epsilon)) continue;
        ++check.total;
        if (!(rec.local_improvement > threshold - 1e-12)) ++check.violations;
        note_margin(check, rec.local_improvement - threshold);
    }
    return check;
}

AuditCheck audit_concentration(const Dataset& dataset, const Centers& centers, std::size_t b,
                               std::size_t trials, double delta, RandomStream& rng) {
    require(b >= 1 && trials >= 1 && delta > 0.0, "concentration audit needs positive inputs");
    const double full = cost(dataset, centers);
    const auto d = static_cast<double>(dataset.dim());
    const auto bf = static_cast<double>(b);

    AuditCheck check;
    check.name = "concentration";
    for (std::size_t t = 0; t < trials; ++t) {
        const double batch = cost(sample_batch(dataset, b, rng).points, centers);
        const double gap = std::abs(batch - full);
        ++check.total;
        if (gap >= delta) ++check.violations;
        note_margin(check, delta - gap);
    }

    const double bound = 2.0 * std::exp(-2.0 * bf * delta * delta / (d * d));
    const double p = std::min(bound, 1.0);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    check.budget = bound + 3.0 * sigma;
    check.details["hoeffding_bound"] = bound;
    check.details["allowance_3sigma"] = 3.0 * sigma;
    check.details["full_cost"] = full;
    return check;
}

}  // namespace mbk
