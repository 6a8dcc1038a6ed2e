#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbk/engine.hpp"
#include "mbk/geometry.hpp"
#include "mbk/random.hpp"

namespace mbk {

// ---------------------------------------------------------------------------
// Batch-size and iteration-count formulas. The asymptotic shapes carry an
// explicit constant (c for batch size, c_t for iterations).
// ---------------------------------------------------------------------------

enum class BatchRegime {
    WarmUp,   // ceil(c (d/eps)^2 (k d + ln(n t))),  t = ceil(c_t d / eps)
    Main,     // ceil(c (d/eps)^2 ln(n k d / eps))
    Sklearn,  // Main evaluated at eps' = eps^1.5 / sqrt(k d)
};

std::string to_string(BatchRegime regime);
BatchRegime parse_batch_regime(std::string_view text);

struct BatchSizeRecommendation {
    BatchRegime regime = BatchRegime::Main;
    std::size_t b = 1;
    std::size_t n = 0, k = 0, d = 0;
    double epsilon = 0.0;
    double c = 1.0;
    /// Set when b > n: the formula left the range where sampling makes sense.
    bool exceeds_n = false;
};

/// Requires positive inputs and epsilon <= d. b is clamped to at least 1.
BatchSizeRecommendation recommended_batch_size(BatchRegime regime, std::size_t n, std::size_t k,
                                               std::size_t d, double epsilon, double c = 1.0,
                                               double c_t = 10.0);

/// ceil(c_t d / eps).
std::size_t termination_bound(std::size_t d, double epsilon, double c_t = 10.0);
/// ceil(c_t (d/eps)^1.5 sqrt(k)), the bound under the center-movement rule.
std::size_t termination_bound_sklearn(std::size_t d, double epsilon, std::size_t k,
                                      double c_t = 10.0);

/// Threshold that local batch improvement must exceed whenever the squared
/// center movement exceeds epsilon: eps^1.5 / sqrt(k d).
double implied_improvement_threshold(double epsilon, std::size_t k, std::size_t d);

/**
 * The update the batch rule would have produced had the batch been all of X:
 * partition X by `centers`, then Cbar^j = (1 - alpha_j) C^j + alpha_j cm(X^j)
 * with the batch-derived alphas. alpha_j > 0 with X^j empty cannot come out
 * of a real iteration and is rejected.
 */
Centers hypothetical_full_update(const Centers& centers, const Dataset& dataset,
                                 std::span<const double> alphas);

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

struct AuditCheck {
    std::string name;
    std::size_t total = 0;
    std::size_t violations = 0;
    /// Smallest (observed - required); negative means a violation.
    /// Empty when no event was checked.
    std::optional<double> worst_margin;
    /// Largest observed/bound ratio, for checks that bound a distance.
    std::optional<double> worst_ratio;
    /// Allowed violation fraction.
    double budget = 0.0;
    /// Check-specific numbers (bounds, allowances) kept for the report.
    std::map<std::string, double> details;

    double violation_fraction() const {
        return total == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(total);
    }
    bool passed() const;

    /// Fold another run's events into this one (same check and budget).
    void merge(const AuditCheck& other);
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    /// Merge into the check with the same name, or append.
    void add(const AuditCheck& check);
    const AuditCheck* find(std::string_view name) const;
    bool passed() const;
};

/// Budget used by the w.h.p. audits.
inline constexpr double kWhpViolationBudget = 0.05;

/**
 * f_X(C_i) - f_X(C_{i+1}) >= fraction * eps over every non-final iteration,
 * with 1e-9 slack. fraction defaults to 1/5; 1/2 is the warm-up constant.
 * Throws MissingAuditData when global costs were not recorded.
 */
AuditCheck audit_global_progress(const RunTrace& trace, double epsilon, double fraction = 0.2,
                                 double budget = kWhpViolationBudget);

/// |C_{i+1}^j - Cbar_{i+1}^j| <= eps / (10 sqrt d) over all (i, j).
AuditCheck audit_center_proximity(const RunTrace& trace, std::size_t d, double epsilon,
                                  double budget = kWhpViolationBudget);

/**
 * Deterministic implication under the sqrt learning rate: whenever the
 * squared movement exceeds eps, the batch improvement exceeds
 * eps^1.5/sqrt(k d) (1e-12 slack). Any violation fails. Throws
 * ContractViolation for traces produced with another learning rate.
 */
AuditCheck audit_sklearn_implication(const RunTrace& trace, double epsilon, std::size_t k,
                                     std::size_t d);

/**
 * Concentration of batch cost around the full cost for fixed centers:
 * draws `trials` batches of size b and counts |f_B(C) - f_X(C)| >= delta.
 * Passes when the exceedance frequency is at most 2 exp(-2 b delta^2 / d^2)
 * plus three binomial standard deviations.
 */
AuditCheck audit_concentration(const Dataset& dataset, const Centers& centers, std::size_t b,
                               std::size_t trials, double delta, RandomStream& rng);

}  // namespace mbk
