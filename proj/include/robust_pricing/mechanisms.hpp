#pragma once

// Seller-side mechanisms: posted prices, price lotteries, and the separate and
// full-bundle rules for several items.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "robust_pricing/core_math.hpp"
#include "robust_pricing/distributions.hpp"
#include "robust_pricing/monte_carlo.hpp"

namespace robust_pricing {

/// A randomization over take-it-or-leave-it prices.
class PriceLottery {
public:
    enum class Kind { deterministic, two_point_lottery, log_lottery };

    static PriceLottery deterministic(double p) {
        if (!std::isfinite(p) || p < 0.0) throw std::domain_error("deterministic price must be finite and >= 0");
        return PriceLottery(Kind::deterministic, p, 1.0, p);
    }

    /// Price p1 with probability q1, otherwise p2.
    static PriceLottery two_point(double p1, double q1, double p2) {
        if (!std::isfinite(p1) || !std::isfinite(p2) || p1 < 0.0 || !(p2 > p1))
            throw std::domain_error("two_point_lottery: need 0 <= p1 < p2");
        if (!(q1 >= 0.0) || q1 > 1.0) throw std::domain_error("two_point_lottery: q1 must lie in [0, 1]");
        return PriceLottery(Kind::two_point_lottery, p1, q1, p2);
    }

    /// Continuous lottery on [pi1, pi2] with cdf
    /// (pi2 ln(x/pi1) - (x - pi1)) / (pi2 ln(pi2/pi1) - (pi2 - pi1)).
    /// Collapses to a deterministic price when pi1 == pi2.
    static PriceLottery log_lottery(double pi1, double pi2) {
        if (!std::isfinite(pi1) || !std::isfinite(pi2) || !(pi1 > 0.0) || pi2 < pi1)
            throw std::domain_error("log_lottery: need 0 < pi1 <= pi2");
        if (pi1 == pi2) return deterministic(pi1);
        return PriceLottery(Kind::log_lottery, pi1, 0.0, pi2);
    }

    Kind kind() const noexcept { return kind_; }

    /// deterministic: the price. two_point_lottery: p1. log_lottery: pi1.
    double low() const noexcept { return low_; }
    /// deterministic: the price. two_point_lottery: p2. log_lottery: pi2.
    double high() const noexcept { return high_; }
    /// Probability of the low price in a two-point lottery.
    double q1() const noexcept { return q1_; }

    double price() const noexcept { return low_; }
    double pi1() const noexcept { return low_; }
    double pi2() const noexcept { return high_; }

    /// Normalizer Z = pi2 ln(pi2/pi1) - (pi2 - pi1) of the log-lottery.
    double normalizer() const {
        const double t = std::log(high_ / low_);
        return high_ * t + (low_ - high_);
    }

    double cdf(double x) const {
        switch (kind_) {
            case Kind::deterministic: return x >= low_ ? 1.0 : 0.0;
            case Kind::two_point_lottery: return x >= high_ ? 1.0 : (x >= low_ ? q1_ : 0.0);
            case Kind::log_lottery:
                if (x <= low_) return 0.0;
                if (x >= high_) return 1.0;
                return std::clamp((high_ * std::log(x / low_) - (x - low_)) / normalizer(), 0.0, 1.0);
        }
        return 0.0;
    }

    /// Inverse-cdf sampling at u in [0, 1). Two-point lotteries map u < q1 to p1.
    double sample_price(double u) const {
        switch (kind_) {
            case Kind::deterministic: return low_;
            case Kind::two_point_lottery: return u < q1_ ? low_ : high_;
            case Kind::log_lottery: {
                if (u <= 0.0) return low_;
                const double z = normalizer();
                const double target = u * z;
                auto f = [&](double x) { return high_ * std::log(x / low_) - (x - low_) - target; };
                return detail::bisect(f, low_, high_, 1e-12 * high_, 200);
            }
        }
        return low_;
    }

    /// Expected posted price.
    double mean_price() const {
        switch (kind_) {
            case Kind::deterministic: return low_;
            case Kind::two_point_lottery: return q1_ * low_ + (1.0 - q1_) * high_;
            case Kind::log_lottery:
                // Integral of x f(x) = (pi2 x - x^2/2)/Z over [pi1, pi2].
                return (high_ * (high_ - low_) - 0.5 * (high_ * high_ - low_ * low_)) / normalizer();
        }
        return low_;
    }

    PriceLottery scaled(double t) const {
        PriceLottery s = *this;
        s.low_ *= t;
        s.high_ *= t;
        return s;
    }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::deterministic: return "deterministic";
            case Kind::two_point_lottery: return "two_point_lottery";
            case Kind::log_lottery: return "log_lottery";
        }
        return "unknown";
    }

private:
    PriceLottery(Kind k, double low, double q1, double high) : kind_(k), low_(low), high_(high), q1_(q1) {}

    Kind kind_;
    double low_;
    double high_;
    double q1_;
};

/// Price rho_D/(2 rho_D - 1) mu, optimal among deterministic prices.
inline PriceLottery robust_price(const MomentInfo& info, const SolverConfig& cfg = {}) {
    const double rho = rho_deterministic(info.cv(), cfg);
    return PriceLottery::deterministic(rho / (2.0 * rho - 1.0) * info.mu());
}

/// Maximin log-lottery: pi1 = mu / rho(r), pi2 = pi1 e^{rho(r) - 1}.
inline PriceLottery log_lottery(const MomentInfo& info, const SolverConfig& cfg = {}) {
    if (info.sigma() == 0.0) return PriceLottery::deterministic(info.mu());
    const double rho = rho_randomized(info.cv(), cfg);
    const double pi1 = info.mu() / rho;
    return PriceLottery::log_lottery(pi1, pi1 * std::exp(rho - 1.0));
}

/// mu/2 or mu + sigma^2/mu, each with probability 1/2.
inline PriceLottery quarter_lottery(const MomentInfo& info) {
    return PriceLottery::two_point(0.5 * info.mu(), 0.5, info.mu() + info.variance() / info.mu());
}

inline PriceLottery price_at_mean(const MomentInfo& info) { return PriceLottery::deterministic(info.mu()); }

/// Exact expected revenue E_{p ~ mech}[p P(X >= p)].
template <ValueDistribution D>
double revenue_exact(const PriceLottery& mech, const D& d) {
    switch (mech.kind()) {
        case PriceLottery::Kind::deterministic: return mech.price() * d.survival(mech.price());
        case PriceLottery::Kind::two_point_lottery:
            return mech.q1() * mech.low() * d.survival(mech.low()) +
                   (1.0 - mech.q1()) * mech.high() * d.survival(mech.high());
        case PriceLottery::Kind::log_lottery:
            // p f(p) = (pi2 - p)/Z.
            return d.survival_moment_integral(mech.pi1(), mech.pi2(), mech.pi2()) / mech.normalizer();
    }
    return 0.0;
}

inline double revenue_exact(const PriceLottery& mech, const Marginal& m) {
    return std::visit([&](const auto& d) { return revenue_exact(mech, d); }, m);
}

struct McEstimate {
    double estimate;
    double std_error;
    std::uint64_t n_samples;
    std::uint64_t seed;
};

namespace detail {
struct OneStat {
    RunningStats s;
    void merge(const OneStat& o) { s.merge(o.s); }
};

inline double sample_value(const Marginal& m, double u) {
    return std::visit([u](const auto& d) { return d.quantile(u); }, m);
}
}  // namespace detail

/// Unbiased revenue estimate from n independent (value, price) draws.
template <ValueDistribution D>
McEstimate revenue_monte_carlo(const PriceLottery& mech, const D& d, std::uint64_t n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("revenue_monte_carlo: n_samples must be >= 1");
    const auto total = run_chunked<detail::OneStat>(n_samples, seed, [&](Stream& rng, detail::OneStat& st) {
        const double v = d.quantile(rng.uniform());
        const double p = mech.sample_price(rng.uniform());
        st.s.add(v >= p ? p : 0.0);
    });
    return {total.s.mean, total.s.std_error(), n_samples, seed};
}

inline McEstimate revenue_monte_carlo(const PriceLottery& mech, const Marginal& m, std::uint64_t n_samples,
                                      std::uint64_t seed) {
    return std::visit([&](const auto& d) { return revenue_monte_carlo(mech, d, n_samples, seed); }, m);
}

// ---------------------------------------------------------------------------
// Multiple items, one additive buyer

class MultiItemMechanism {
public:
    enum class Kind { separate, full_bundle };

    static MultiItemMechanism separate(std::vector<PriceLottery> per_item) {
        if (per_item.empty()) throw std::domain_error("separate mechanism needs at least one item");
        return MultiItemMechanism(Kind::separate, std::move(per_item), 0);
    }

    static MultiItemMechanism full_bundle(PriceLottery lottery, std::size_t item_count) {
        if (item_count < 1) throw std::domain_error("bundle mechanism needs at least one item");
        return MultiItemMechanism(Kind::full_bundle, {std::move(lottery)}, item_count);
    }

    Kind kind() const noexcept { return kind_; }
    const std::vector<PriceLottery>& lotteries() const noexcept { return lotteries_; }
    std::size_t item_count() const noexcept { return kind_ == Kind::separate ? lotteries_.size() : items_; }

private:
    MultiItemMechanism(Kind k, std::vector<PriceLottery> l, std::size_t items)
        : kind_(k), lotteries_(std::move(l)), items_(items) {}

    Kind kind_;
    std::vector<PriceLottery> lotteries_;
    std::size_t items_;
};

/// One log-lottery per item.
inline MultiItemMechanism sell_separate(const std::vector<MomentInfo>& infos, const SolverConfig& cfg = {}) {
    std::vector<PriceLottery> l;
    l.reserve(infos.size());
    for (const auto& i : infos) l.push_back(log_lottery(i, cfg));
    return MultiItemMechanism::separate(std::move(l));
}

/// Moments of the bundle value under independence: (sum mu, sqrt(sum sigma^2)).
inline MomentInfo bundle_moments(const std::vector<MomentInfo>& infos) {
    if (infos.empty()) throw std::domain_error("bundle_moments: need at least one item");
    double mu = 0.0;
    double var = 0.0;
    for (const auto& i : infos) {
        mu += i.mu();
        var += i.variance();
    }
    return MomentInfo(mu, std::sqrt(var));
}

/// A single log-lottery on the sum of values; assumes independent items.
inline MultiItemMechanism sell_bundle(const std::vector<MomentInfo>& infos, const SolverConfig& cfg = {}) {
    return MultiItemMechanism::full_bundle(log_lottery(bundle_moments(infos), cfg), infos.size());
}

/// Revenue floor sum_j mu_j / rho(r_j) of selling separately.
inline double separate_guarantee(const std::vector<MomentInfo>& infos, const SolverConfig& cfg = {}) {
    double g = 0.0;
    for (const auto& i : infos) g += i.mu() / rho_randomized(i.cv(), cfg);
    return g;
}

/// Revenue floor mu_bar / rho(r_bar) of the full bundle.
inline double bundle_guarantee(const std::vector<MomentInfo>& infos, const SolverConfig& cfg = {}) {
    const auto b = bundle_moments(infos);
    return b.mu() / rho_randomized(b.cv(), cfg);
}

/// Exact revenue; bundles are exact only for a single item.
inline double revenue_exact(const MultiItemMechanism& mech, const ProductDistribution& f) {
    if (mech.item_count() != f.size()) throw std::domain_error("revenue_exact: item count mismatch");
    if (mech.kind() == MultiItemMechanism::Kind::separate) {
        double total = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) total += revenue_exact(mech.lotteries()[j], f[j]);
        return total;
    }
    if (f.size() == 1) return revenue_exact(mech.lotteries()[0], f[0]);
    throw std::invalid_argument("revenue_exact: bundles of several items are evaluated by Monte Carlo");
}

inline McEstimate revenue_monte_carlo(const MultiItemMechanism& mech, const ProductDistribution& f,
                                      std::uint64_t n_samples, std::uint64_t seed) {
    if (mech.item_count() != f.size()) throw std::domain_error("revenue_monte_carlo: item count mismatch");
    if (n_samples < 1) throw std::invalid_argument("revenue_monte_carlo: n_samples must be >= 1");
    const bool bundle = mech.kind() == MultiItemMechanism::Kind::full_bundle;
    const auto total = run_chunked<detail::OneStat>(n_samples, seed, [&](Stream& rng, detail::OneStat& st) {
        double rev = 0.0;
        if (bundle) {
            double sum = 0.0;
            for (const auto& m : f.marginals()) sum += detail::sample_value(m, rng.uniform());
            const double p = mech.lotteries()[0].sample_price(rng.uniform());
            rev = sum >= p ? p : 0.0;
        } else {
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double v = detail::sample_value(f[j], rng.uniform());
                const double p = mech.lotteries()[j].sample_price(rng.uniform());
                if (v >= p) rev += p;
            }
        }
        st.s.add(rev);
    });
    return {total.s.mean, total.s.std_error(), n_samples, seed};
}

}  // namespace robust_pricing
