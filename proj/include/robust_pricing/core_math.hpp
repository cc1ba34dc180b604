#pragma once

// Scalar ratio functions of the coefficient of variation and the bracketed
// solvers behind them.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace robust_pricing {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Mean and standard-deviation bound of a nonnegative value distribution.
class MomentInfo {
public:
    MomentInfo(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        if (!std::isfinite(mu) || !(mu > 0.0))
            throw std::domain_error("MomentInfo: mu must be positive and finite");
        if (!std::isfinite(sigma) || sigma < 0.0)
            throw std::domain_error("MomentInfo: sigma must be nonnegative and finite");
    }

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    double variance() const noexcept { return sigma_ * sigma_; }
    /// Coefficient of variation sigma/mu.
    double cv() const noexcept { return sigma_ / mu_; }

    MomentInfo scaled(double t) const { return MomentInfo(mu_ * t, sigma_ * t); }

private:
    double mu_;
    double sigma_;
};

struct SolverConfig {
    double abs_tol = 1e-12;
    int max_iterations = 200;

    void validate() const {
        if (!(abs_tol > 0.0)) throw std::invalid_argument("SolverConfig: abs_tol must be positive");
        if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    }
};

namespace detail {

inline void require_finite_nonnegative(double r, const char* what) {
    if (!std::isfinite(r)) throw std::domain_error(std::string(what) + ": argument must be finite");
    if (r < 0.0) throw std::domain_error(std::string(what) + ": argument must be nonnegative");
}

/// Root of an increasing function f on [lo, hi] with f(lo) <= 0 < f(hi).
/// Stops when the bracket is narrower than tol, when the midpoint is no longer
/// representable between the endpoints, or after max_iterations halvings.
template <class F>
double bisect(F&& f, double lo, double hi, double tol, int max_iterations) {
    for (int it = 0; it < max_iterations && hi - lo > tol; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return lo + 0.5 * (hi - lo);
}

/// Solves f(x) = 0 for increasing f on [lo, inf), growing the upper bracket
/// geometrically until the sign changes. Bracket growth does not count
/// against the iteration budget.
template <class F>
double bisect_expanding(F&& f, double lo, double tol, int max_iterations) {
    if (f(lo) >= 0.0) return lo;
    double width = 1.0;
    double hi = lo + width;
    while (!(f(hi) > 0.0)) {
        lo = hi;
        width *= 2.0;
        hi = lo + width;
        if (!std::isfinite(hi)) throw std::runtime_error("bisect_expanding: no sign change found");
    }
    return bisect(f, lo, hi, tol, max_iterations);
}

}  // namespace detail

/// Left-hand side of the deterministic ratio equation, (rho-1)^3 / (2 rho - 1)^2.
inline double deterministic_ratio_lhs(double rho) {
    const double a = rho - 1.0;
    const double b = 2.0 * rho - 1.0;
    return a * a * a / (b * b);
}

/// Left-hand side of the randomized ratio equation, (2 e^{rho-1} - 1) / rho^2.
inline double randomized_ratio_lhs(double rho) {
    return (2.0 * std::exp(rho - 1.0) - 1.0) / (rho * rho);
}

/// Optimal worst-case ratio of a single posted price: the unique rho >= 1 with
/// (rho-1)^3 / (2 rho - 1)^2 = r^2.
inline double rho_deterministic(double r, const SolverConfig& cfg = {}) {
    detail::require_finite_nonnegative(r, "rho_deterministic");
    cfg.validate();
    if (r == 0.0) return 1.0;
    const double r2 = r * r;
    return detail::bisect_expanding([r2](double rho) { return deterministic_ratio_lhs(rho) - r2; }, 1.0,
                                    cfg.abs_tol, cfg.max_iterations);
}

/// Worst-case ratio guaranteed by the log-lottery: the unique rho >= 1 with
/// (2 e^{rho-1} - 1) / rho^2 = r^2 + 1.
inline double rho_randomized(double r, const SolverConfig& cfg = {}) {
    detail::require_finite_nonnegative(r, "rho_randomized");
    cfg.validate();
    if (r == 0.0) return 1.0;
    const double rhs = r * r + 1.0;
    // Written as 2 e^{rho-1} - 1 - rhs rho^2 to avoid the division near rho = 1.
    return detail::bisect_expanding(
        [rhs](double rho) { return 2.0 * std::exp(rho - 1.0) - 1.0 - rhs * rho * rho; }, 1.0, cfg.abs_tol,
        cfg.max_iterations);
}

/// Closed-form inverse of rho_randomized.
inline double rho_randomized_inverse(double rho) {
    if (std::isnan(rho) || rho < 1.0) throw std::domain_error("rho_randomized_inverse: rho must be >= 1");
    if (rho == kInfinity) return kInfinity;
    const double r2 = randomized_ratio_lhs(rho) - 1.0;
    return r2 <= 0.0 ? 0.0 : std::sqrt(r2);
}

/// 1 + ln(1 + r^2), the lower bound on any mechanism's worst-case ratio.
inline double lower_bound_ratio(double r) {
    detail::require_finite_nonnegative(r, "lower_bound_ratio");
    return 1.0 + std::log1p(r * r);
}

/// Unique positive root k of 1/r = (3k + k^3)/2.
inline double azar_micali_k(double r, const SolverConfig& cfg = {}) {
    if (!std::isfinite(r) || !(r > 0.0)) throw std::domain_error("azar_micali_k: r must be positive");
    cfg.validate();
    const double target = 2.0 / r;
    // k^3 + 3k = 2/r gives k <= 2/(3r) and k <= (2/r)^{1/3}.
    const double hi = std::min(target / 3.0, std::cbrt(target));
    return detail::bisect([target](double k) { return k * k * k + 3.0 * k - target; }, 0.0, hi,
                          cfg.abs_tol * hi, cfg.max_iterations);
}

/// Ratio bound 1 / (1 - 1.5 r k(r)) of the mean-minus-k-sigma price.
inline double azar_micali_rho(double r, const SolverConfig& cfg = {}) {
    const double k = azar_micali_k(r, cfg);
    return 1.0 / (1.0 - 1.5 * r * k);
}

/// (1 - lambda)^{-1/lambda}; +inf at lambda = 1.
inline double lambda_regular_ratio(double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0)
        throw std::domain_error("lambda_regular_ratio: lambda must lie in (0, 1]");
    if (lambda == 1.0) return kInfinity;
    return std::exp(-std::log1p(-lambda) / lambda);
}

/// Largest coefficient of variation a lambda-regular distribution can have.
inline double regularity_cv_cap(double lambda) {
    if (!(lambda >= 0.0) || lambda >= 0.5)
        throw std::domain_error("regularity_cv_cap: lambda must lie in [0, 1/2)");
    return std::sqrt(1.0 / (1.0 - 2.0 * lambda));
}

/// CV below which the log-lottery guarantee beats pricing at the mean for
/// lambda-regular values.
inline double regularity_lottery_cutoff(double lambda) {
    return rho_randomized_inverse(lambda_regular_ratio(lambda));
}

}  // namespace robust_pricing
