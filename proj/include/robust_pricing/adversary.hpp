#pragma once

// Worst-case responses to a mechanism, brute-force ratio oracles, and the
// lower-bound certificates.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "robust_pricing/core_math.hpp"
#include "robust_pricing/distributions.hpp"
#include "robust_pricing/mechanisms.hpp"

namespace robust_pricing {

enum class CertificateTag { lemma1_limit, yao_mixture, thm5_multi, grid_search };

inline std::string to_string(CertificateTag t) {
    switch (t) {
        case CertificateTag::lemma1_limit: return "lemma1_limit";
        case CertificateTag::yao_mixture: return "yao_mixture";
        case CertificateTag::thm5_multi: return "thm5_multi";
        case CertificateTag::grid_search: return "grid_search";
    }
    return "unknown";
}

/// OPT / REV with +inf when REV is zero.
inline double ratio_of(double opt, double rev) { return rev > 0.0 ? opt / rev : kInfinity; }

/// A concrete (mechanism, adversary) pair and the revenue ratio it achieves.
///
/// When the adversary is a mixture, `opt` is the mixture's expected optimal
/// revenue and `rev` the mechanism's revenue on the posterior; when it is a
/// limit, both are the limiting values and `witness` is a finite member of the
/// approaching sequence.
struct RatioCertificate {
    std::string mechanism;
    std::optional<PriceLottery> lottery;
    std::string adversary;
    std::optional<PiecewiseDistribution> witness;
    double opt = 0.0;
    double rev = 0.0;
    double ratio = 0.0;
    CertificateTag tag = CertificateTag::grid_search;
    std::vector<std::pair<std::string, double>> params;

    double param(const std::string& key) const {
        for (const auto& [k, v] : params)
            if (k == key) return v;
        throw std::out_of_range("RatioCertificate: no parameter " + key);
    }
};

/// Closed-form supremum of OPT/REV over (mu, sigma)-distributions against a
/// fixed price p: max{1 + sigma^2/(mu-p)^2, mu/p + sigma^2/(p(mu-p))} below
/// the mean, unbounded at or above it.
inline double deterministic_sup_ratio(double p, const MomentInfo& info) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::domain_error("deterministic_sup_ratio: price must be positive");
    const double mu = info.mu();
    if (p >= mu) return kInfinity;
    const double s2 = info.variance();
    const double gap = mu - p;
    return std::max(1.0 + s2 / (gap * gap), mu / p + s2 / (p * gap));
}

/// Worst case for a posted price p, with the two-point witness x = p - gap
/// (x = mu - gap when p >= mu). gap defaults to 1e-6 mu.
inline RatioCertificate worst_case_ratio_deterministic(double p, const MomentInfo& info, double gap = -1.0) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::domain_error("worst_case_ratio_deterministic: price must be positive");
    const double mu = info.mu();
    if (gap < 0.0) gap = 1e-6 * mu;
    if (!(gap > 0.0)) throw std::domain_error("worst_case_ratio_deterministic: gap must be positive");

    RatioCertificate cert;
    const auto mech = PriceLottery::deterministic(p);
    cert.mechanism = "deterministic";
    cert.lottery = mech;
    cert.tag = CertificateTag::lemma1_limit;
    const double s2 = info.variance();
    if (p >= mu) {
        // F_x with x -> mu-: OPT -> mu while the sale probability vanishes.
        cert.opt = mu;
        cert.rev = 0.0;
        cert.ratio = kInfinity;
        cert.witness = two_point(info, std::max(0.0, mu - gap));
    } else {
        const double d = mu - p;
        const double alpha = s2 / (s2 + d * d);
        const double y = mu + s2 / d;
        cert.rev = p * (1.0 - alpha);
        cert.opt = std::max(p, (1.0 - alpha) * y);
        cert.ratio = ratio_of(cert.opt, cert.rev);
        cert.witness = two_point(info, std::max(0.0, p - gap));
    }
    const double w_opt = myerson_opt(*cert.witness).revenue;
    const double w_rev = revenue_exact(mech, *cert.witness);
    cert.adversary = "two_point_limit";
    cert.params = {{"p", p},
                   {"mu", mu},
                   {"sigma", info.sigma()},
                   {"gap", gap},
                   {"witness_x", cert.witness->atoms().front().value},
                   {"witness_ratio", ratio_of(w_opt, w_rev)}};
    return cert;
}

struct DeterministicOptimum {
    double p_star;
    double ratio;
};

/// Best posted price against the worst case: p* = rho_D/(2 rho_D - 1) mu.
inline DeterministicOptimum minimize_deterministic(const MomentInfo& info, const SolverConfig& cfg = {}) {
    if (info.sigma() == 0.0) return {info.mu(), 1.0};
    const double rho = rho_deterministic(info.cv(), cfg);
    return {rho / (2.0 * rho - 1.0) * info.mu(), rho};
}

/// Yao certificate: the rare-event mixture has expected OPT mu while no single
/// price earns more than c mu on its posterior.
inline RatioCertificate yao_lower_bound(const MomentInfo& info) {
    const auto [eps0, c] = yao_mixture(info);
    RatioCertificate cert;
    cert.mechanism = "best_posted_price_response";
    cert.adversary = "yao_mixture";
    cert.witness = yao_posterior(info);
    const auto best = myerson_opt(*cert.witness);
    cert.opt = info.mu();
    cert.rev = best.revenue;
    cert.ratio = ratio_of(cert.opt, cert.rev);
    cert.tag = CertificateTag::yao_mixture;
    cert.params = {{"mu", info.mu()}, {"sigma", info.sigma()}, {"eps0", eps0}, {"c", c}, {"best_price", best.price}};
    return cert;
}

/// The rare-event mixture played against a fixed mechanism. The ratio is
/// E[OPT(F_eps)] / E[REV(mech; F_eps)] = mu / REV(mech; posterior), which is at
/// least 1 + ln(1 + r^2) for every mechanism.
inline RatioCertificate yao_ratio_against(const PriceLottery& mech, const MomentInfo& info) {
    auto cert = yao_lower_bound(info);
    cert.mechanism = mech.kind_name();
    cert.lottery = mech;
    cert.rev = revenue_exact(mech, *cert.witness);
    cert.ratio = ratio_of(cert.opt, cert.rev);
    cert.params.emplace_back("posterior_opt", myerson_opt(*cert.witness).revenue);
    return cert;
}

struct AdversaryFamilies {
    bool two_point = true;
    bool rare_event = true;
    bool yao = false;
};

/// Brute-force maximum of OPT(d)/REV(mech; d) over two-point distributions
/// with exact variance (x on a grid of [0, mu)), rare events (eps on a grid of
/// [1/(1+r^2), 1]) and, optionally, the Yao mixture. Ties keep the earlier
/// candidate in that order.
inline RatioCertificate grid_adversary_search(const PriceLottery& mech, const MomentInfo& info,
                                              std::uint64_t grid_size, AdversaryFamilies families = {}) {
    if (grid_size < 1) throw std::invalid_argument("grid_adversary_search: grid_size must be >= 1");
    RatioCertificate best;
    best.mechanism = mech.kind_name();
    best.lottery = mech;
    best.tag = CertificateTag::grid_search;
    best.ratio = -1.0;
    std::string best_family;
    double best_param = 0.0;

    auto consider = [&](const PiecewiseDistribution& d, const char* family, double param) {
        const double opt = myerson_opt(d).revenue;
        const double rev = revenue_exact(mech, d);
        const double ratio = ratio_of(opt, rev);
        if (ratio > best.ratio) {
            best.ratio = ratio;
            best.opt = opt;
            best.rev = rev;
            best.witness = d;
            best_family = family;
            best_param = param;
        }
    };

    const double mu = info.mu();
    const auto n = static_cast<double>(grid_size);
    if (families.two_point)
        for (std::uint64_t i = 0; i < grid_size; ++i) {
            const double x = mu * static_cast<double>(i) / n;
            consider(two_point(info, x), "two_point", x);
        }
    if (families.rare_event) {
        const double eps0 = 1.0 / (1.0 + info.cv() * info.cv());
        for (std::uint64_t j = 0; j < grid_size; ++j) {
            const double eps = grid_size == 1 ? eps0 : eps0 + (1.0 - eps0) * static_cast<double>(j) / (n - 1.0);
            consider(rare_event(mu, std::min(1.0, eps)), "rare_event", eps);
        }
    }
    if (families.yao && info.sigma() > 0.0) {
        const auto y = yao_ratio_against(mech, info);
        if (y.ratio > best.ratio) {
            best.ratio = y.ratio;
            best.opt = y.opt;
            best.rev = y.rev;
            best.witness = y.witness;
            best_family = "yao_mixture";
            best_param = y.param("eps0");
        }
    }
    if (best.ratio < 0.0) throw std::invalid_argument("grid_adversary_search: no adversary family selected");
    best.adversary = best_family;
    best.params = {{"mu", mu}, {"sigma", info.sigma()}, {"grid_size", n}, {"argmax", best_param}};
    return best;
}

/// Moment constraints of the multi-item lower-bound instance.
inline std::vector<MomentInfo> multi_item_lower_infos(const std::vector<double>& r_values, double delta) {
    if (r_values.size() < 2) throw std::domain_error("multi_item_lower_infos: need at least two items");
    std::vector<MomentInfo> infos{MomentInfo(1.0, r_values[0])};
    const double scale = delta / static_cast<double>(r_values.size() - 1);
    for (std::size_t j = 1; j < r_values.size(); ++j) infos.emplace_back(scale, r_values[j] * scale);
    return infos;
}

struct McOptions {
    std::uint64_t n_samples = 1'000'000;
    std::uint64_t seed = 0;
};

/// Evaluates a multi-item mechanism on the lower-bound instance. Item 1 is the
/// Yao mixture, so `opt` is the expected optimum 1 + delta of the members
/// F_eps x F_2 x ... (each sells at full welfare) and `rev` is the revenue on
/// the posterior product. Separate mechanisms are evaluated exactly, bundles
/// by Monte Carlo.
inline RatioCertificate multi_item_lower_check(const std::vector<double>& r_values, double delta,
                                               const MultiItemMechanism& mech, McOptions mc = {}) {
    const auto instance = multi_item_lower_instance(r_values, delta);
    if (mech.item_count() != instance.size())
        throw std::domain_error("multi_item_lower_check: mechanism and instance dimensions differ");

    RatioCertificate cert;
    cert.mechanism = mech.kind() == MultiItemMechanism::Kind::separate ? "separate" : "full_bundle";
    cert.adversary = "multi_item_instance";
    cert.witness = std::get<PiecewiseDistribution>(instance[0]);
    cert.tag = CertificateTag::thm5_multi;
    cert.opt = 1.0 + delta;

    double std_error = 0.0;
    if (mech.kind() == MultiItemMechanism::Kind::separate) {
        cert.rev = revenue_exact(mech, instance);
    } else {
        const auto est = revenue_monte_carlo(mech, instance, mc.n_samples, mc.seed);
        cert.rev = est.estimate;
        std_error = est.std_error;
    }
    cert.ratio = ratio_of(cert.opt, cert.rev);

    const double r = r_values[0];
    const double slack = multi_item_slack(r, delta);
    double val_low = 0.0;
    for (std::size_t j = 1; j < instance.size(); ++j) val_low += marginal_mean(instance[j]);
    cert.params = {{"delta", delta},
                   {"r", r},
                   {"slack", slack},
                   {"floor", 1.0 - slack + std::log1p(r * r)},
                   {"val_low_items", val_low},
                   {"posterior_opt_plus_val", myerson_opt(*cert.witness).revenue + val_low},
                   {"rev_std_error", std_error}};
    return cert;
}

}  // namespace robust_pricing
