#pragma once

// Lazy-VCG with log-lottery reserves on rank-k uniform matroids, and a
// Monte Carlo estimate of the optimal (virtual-value) auction's revenue.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "robust_pricing/core_math.hpp"
#include "robust_pricing/distributions.hpp"
#include "robust_pricing/mechanisms.hpp"
#include "robust_pricing/monte_carlo.hpp"

namespace robust_pricing {

/// n bidders with independent regular values; any k of them can be served.
class AuctionEnvironment {
public:
    AuctionEnvironment(std::size_t k, std::vector<AnalyticDistribution> bidders)
        : k_(k), bidders_(std::move(bidders)) {
        if (bidders_.empty()) throw std::domain_error("AuctionEnvironment: need at least one bidder");
        if (k_ < 1 || k_ > bidders_.size()) throw std::domain_error("AuctionEnvironment: k must satisfy 1 <= k <= n");
    }

    std::size_t n() const noexcept { return bidders_.size(); }
    std::size_t k() const noexcept { return k_; }
    const std::vector<AnalyticDistribution>& bidders() const noexcept { return bidders_; }

    /// Largest coefficient of variation across bidders.
    double max_cv() const {
        double r = 0.0;
        for (const auto& b : bidders_) r = std::max(r, b.moment_info().cv());
        return r;
    }

private:
    std::size_t k_;
    std::vector<AnalyticDistribution> bidders_;
};

struct AuctionOutcome {
    std::vector<std::size_t> winners;
    std::vector<double> payments;
    double revenue = 0.0;
    double welfare = 0.0;
};

namespace detail {

/// Indices of the k largest scores, larger first, ties to the lower index.
inline std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(take);
    return idx;
}

/// (k+1)-th highest score, or 0 when there are at most k bidders.
inline double kth_plus_one(const std::vector<double>& scores, std::size_t k) {
    if (scores.size() <= k) return 0.0;
    std::vector<double> s = scores;
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end(), std::greater<>());
    return s[k];
}

}  // namespace detail

/// One round of lazy VCG: the k highest values are candidate winners; each
/// candidate buys at max(reserve, (k+1)-th highest value) if their value
/// covers it. Dropped candidates are not replaced.
inline AuctionOutcome lazy_vcg_round(const AuctionEnvironment& env, const std::vector<double>& values,
                                     const std::vector<double>& reserve_prices) {
    if (values.size() != env.n() || reserve_prices.size() != env.n())
        throw std::domain_error("lazy_vcg_round: values and reserves must have one entry per bidder");
    AuctionOutcome out;
    out.payments.assign(env.n(), 0.0);
    const double threshold = detail::kth_plus_one(values, env.k());
    for (std::size_t i : detail::top_k(values, env.k())) {
        const double price = std::max(reserve_prices[i], threshold);
        if (values[i] >= price) {
            out.winners.push_back(i);
            out.payments[i] = price;
            out.revenue += price;
            out.welfare += values[i];
        }
    }
    std::sort(out.winners.begin(), out.winners.end());
    return out;
}

/// Welfare of reserve-free VCG: the sum of the k highest values.
inline double vcg_welfare(const std::vector<double>& values, std::size_t k) {
    double w = 0.0;
    for (std::size_t i : detail::top_k(values, k)) w += values[i];
    return w;
}

struct LazyVcgReport {
    double avg_revenue;
    double revenue_std_error;
    double avg_welfare;
    double welfare_std_error;
    double avg_vcg_welfare;
    double vcg_welfare_std_error;
    std::uint64_t rounds;
    std::uint64_t seed;
};

namespace detail {
struct AuctionStats {
    RunningStats revenue;
    RunningStats welfare;
    RunningStats vcg;
    void merge(const AuctionStats& o) {
        revenue.merge(o.revenue);
        welfare.merge(o.welfare);
        vcg.merge(o.vcg);
    }
};
}  // namespace detail

/// Monte Carlo of lazy VCG where bidder i's reserve is drawn fresh each round
/// from the log-lottery for bidder i's (mu_i, sigma_i).
inline LazyVcgReport simulate_lazy_vcg(const AuctionEnvironment& env, std::uint64_t n_rounds, std::uint64_t seed,
                                       const SolverConfig& cfg = {}) {
    if (n_rounds < 1) throw std::invalid_argument("simulate_lazy_vcg: n_rounds must be >= 1");
    std::vector<PriceLottery> reserves;
    for (const auto& b : env.bidders()) reserves.push_back(log_lottery(b.moment_info(), cfg));
    const std::size_t n = env.n();
    const auto stats = run_chunked<detail::AuctionStats>(n_rounds, seed, [&](Stream& rng, detail::AuctionStats& st) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = env.bidders()[i].quantile(rng.uniform());
        std::vector<double> reserve(n, 0.0);
        for (std::size_t i : detail::top_k(values, env.k())) reserve[i] = reserves[i].sample_price(rng.uniform());
        const auto out = lazy_vcg_round(env, values, reserve);
        st.revenue.add(out.revenue);
        st.welfare.add(out.welfare);
        st.vcg.add(vcg_welfare(values, env.k()));
    });
    return {stats.revenue.mean, stats.revenue.std_error(), stats.welfare.mean, stats.welfare.std_error(),
            stats.vcg.mean,     stats.vcg.std_error(),     n_rounds,           seed};
}

/// Revenue of the optimal auction for one value profile: serve the (at most
/// k) bidders with the highest nonnegative virtual values; each winner pays
/// the smallest value that would still have won.
inline double myerson_round_revenue(const AuctionEnvironment& env, const std::vector<double>& values) {
    const std::size_t n = env.n();
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = env.bidders()[i].virtual_value(values[i]);
    double revenue = 0.0;
    for (std::size_t i : detail::top_k(phi, env.k())) {
        if (phi[i] < 0.0) continue;
        std::vector<double> others;
        others.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) others.push_back(phi[j]);
        // k-th highest competing virtual value.
        double competing = 0.0;
        if (others.size() >= env.k()) {
            std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(env.k() - 1), others.end(),
                             std::greater<>());
            competing = others[env.k() - 1];
        }
        revenue += env.bidders()[i].inverse_virtual_value(std::max(0.0, competing));
    }
    return revenue;
}

/// Monte Carlo estimate of the optimal auction's expected revenue.
inline McEstimate myerson_optimal_revenue(const AuctionEnvironment& env, std::uint64_t n_rounds, std::uint64_t seed) {
    if (n_rounds < 1) throw std::invalid_argument("myerson_optimal_revenue: n_rounds must be >= 1");
    const std::size_t n = env.n();
    const auto stats = run_chunked<detail::OneStat>(n_rounds, seed, [&](Stream& rng, detail::OneStat& st) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = env.bidders()[i].quantile(rng.uniform());
        st.s.add(myerson_round_revenue(env, values));
    });
    return {stats.s.mean, stats.s.std_error(), n_rounds, seed};
}

}  // namespace robust_pricing
