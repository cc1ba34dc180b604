#pragma once

// Subcommand implementations for the robust_pricing CLI. Each returns the
// complete output text so that nothing is written until the command succeeds.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "robust_pricing/adversary.hpp"
#include "robust_pricing/auctions.hpp"
#include "robust_pricing/core_math.hpp"
#include "robust_pricing/distributions.hpp"
#include "robust_pricing/io.hpp"
#include "robust_pricing/mechanisms.hpp"

namespace robust_pricing::cli {

using io::json;

/// Bad flag values or combinations; the CLI maps this to a usage error.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --- curve ---------------------------------------------------------------------

struct CurveSpec {
    std::string which = "rho_d";
    double x_min = 0.0;
    double x_max = 2.0;
    double step = 0.01;
    std::string format = "csv";

    bool over_lambda() const { return which == "lambda_ratio" || which == "cutoff"; }

    void validate() const {
        static const char* kinds[] = {"rho_d", "rho", "lower", "azar_micali", "lambda_ratio", "cutoff"};
        bool known = false;
        for (const char* k : kinds) known = known || which == k;
        if (!known) throw UsageError("curve: unknown curve '" + which + "'");
        if (!(x_min >= 0.0) || !std::isfinite(x_min)) throw UsageError("curve: minimum must be >= 0");
        if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("curve: step must be > 0");
        if (!(x_max >= x_min) || !std::isfinite(x_max)) throw UsageError("curve: maximum must be >= minimum");
        if (format != "csv" && format != "json") throw UsageError("curve: format must be csv or json");
        if (over_lambda() && (x_min <= 0.0 || x_max > 1.0))
            throw UsageError("curve: lambda range must lie in (0, 1]");
        if (which == "azar_micali" && x_min <= 0.0) throw UsageError("curve: azar_micali needs r > 0");
    }
};

inline double curve_value(const std::string& which, double x) {
    if (which == "rho_d") return rho_deterministic(x);
    if (which == "rho") return rho_randomized(x);
    if (which == "lower") return lower_bound_ratio(x);
    if (which == "azar_micali") return azar_micali_rho(x);
    if (which == "lambda_ratio") return lambda_regular_ratio(x);
    return regularity_lottery_cutoff(x);
}

/// Decimal places needed to print every multiple of `step` exactly.
inline int decimals_for(double step) {
    for (int d = 0; d < 10; ++d) {
        const double scaled = step * std::pow(10.0, d);
        if (std::abs(scaled - std::round(scaled)) < 1e-9 * std::max(1.0, scaled)) return d;
    }
    return 10;
}

inline std::string format_sig6(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%#.6g", v);
    return buf;
}

inline std::string cmd_curve(const CurveSpec& spec) {
    spec.validate();
    const auto count = static_cast<std::uint64_t>(std::floor((spec.x_max - spec.x_min) / spec.step + 1e-9)) + 1;
    const int dec = std::max(decimals_for(spec.step), decimals_for(spec.x_min));
    const char* axis = spec.over_lambda() ? "lambda" : "r";
    std::ostringstream out;
    json points = json::array();
    if (spec.format == "csv") out << axis << ",value\n";
    for (std::uint64_t i = 0; i < count; ++i) {
        const double x = spec.x_min + static_cast<double>(i) * spec.step;
        const double v = curve_value(spec.which, x);
        if (spec.format == "csv") {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.*f", dec, x);
            out << buf << ',' << format_sig6(v) << '\n';
        } else {
            points.push_back({x, io::number(v)});
        }
    }
    if (spec.format == "json") return dump({{"curve", spec.which}, {"axis", axis}, {"points", points}});
    return out.str();
}

// --- price / lottery ---------------------------------------------------------

inline MomentInfo make_info(double mu, double sigma) {
    try {
        return MomentInfo(mu, sigma);
    } catch (const std::domain_error& e) {
        throw UsageError(std::string("need --mu > 0 and --sigma >= 0: ") + e.what());
    }
}

inline std::string cmd_price(double mu, double sigma) {
    const auto info = make_info(mu, sigma);
    auto j = io::to_json(robust_price(info));
    j["ratio"] = rho_deterministic(info.cv());
    return dump(j);
}

inline std::string cmd_lottery(double mu, double sigma) {
    const auto info = make_info(mu, sigma);
    auto j = io::to_json(log_lottery(info));
    j["ratio"] = rho_randomized(info.cv());
    return dump(j);
}

// --- builtin adversaries ---------------------------------------------------------

struct BuiltinDistribution {
    std::string name;
    std::vector<double> args;
};

/// Parses "yao", "two-point(0.5)", "rare(0.25)", "multi(1,1,0.0001)".
inline BuiltinDistribution parse_builtin(const std::string& text) {
    BuiltinDistribution b;
    const auto open = text.find('(');
    b.name = text.substr(0, open);
    if (open != std::string::npos) {
        const auto close = text.rfind(')');
        if (close == std::string::npos || close < open) throw UsageError("malformed distribution '" + text + "'");
        std::stringstream ss(text.substr(open + 1, close - open - 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                b.args.push_back(std::stod(item, &used));
                while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::logic_error&) {
                throw UsageError("distribution '" + text + "': bad number '" + item + "'");
            }
        }
    }
    auto want = [&](std::size_t n) {
        if (b.args.size() != n)
            throw UsageError("distribution '" + b.name + "' takes " + std::to_string(n) + " argument(s)");
    };
    if (b.name == "yao")
        want(0);
    else if (b.name == "two-point" || b.name == "rare")
        want(1);
    else if (b.name == "multi") {
        if (b.args.size() < 3) throw UsageError("multi needs r_1,...,r_m,delta with m >= 2");
    } else
        throw UsageError("unknown builtin distribution '" + b.name + "'");
    return b;
}

inline PiecewiseDistribution single_builtin(const BuiltinDistribution& b, const MomentInfo& info) {
    if (b.name == "yao") return yao_posterior(info);
    if (b.name == "two-point") return two_point(info, b.args[0]);
    if (b.name == "rare") return rare_event(info.mu(), b.args[0]);
    throw UsageError("distribution '" + b.name + "' is not single-item");
}

inline json builtin_label(const BuiltinDistribution& b) {
    json args = json::array();
    for (double a : b.args) args.push_back(a);
    return {{"name", b.name}, {"args", args}};
}

// --- eval ------------------------------------------------------------------------

struct EvalOptions {
    std::string mechanism = "lottery";  // robust-price, lottery, quarter, mean, price, separate, bundle
    std::optional<double> price;
    std::optional<std::string> mechanism_json;  // JSON text of a PriceLottery
    double mu = 1.0;
    double sigma = 1.0;
    std::optional<std::string> dist;       // builtin spec
    std::optional<std::string> dist_json;  // JSON text of a PiecewiseDistribution
    std::string dist_source = "distribution";
    std::optional<std::uint64_t> mc_samples;
    std::uint64_t seed = 0;
};

inline PriceLottery single_mechanism(const std::string& name, const MomentInfo& info, std::optional<double> price) {
    if (name == "robust-price") return robust_price(info);
    if (name == "lottery" || name == "log-lottery") return log_lottery(info);
    if (name == "quarter") return quarter_lottery(info);
    if (name == "mean") return price_at_mean(info);
    if (name == "price") {
        if (!price) throw UsageError("mechanism 'price' needs --p");
        try {
            return PriceLottery::deterministic(*price);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
    }
    throw UsageError("unknown single-item mechanism '" + name + "'");
}

inline std::string cmd_eval(const EvalOptions& o) {
    const auto info = make_info(o.mu, o.sigma);
    if (o.dist.has_value() == o.dist_json.has_value()) throw UsageError("eval: give exactly one of --dist or --dist-json");
    if (o.mc_samples && *o.mc_samples < 1) throw UsageError("eval: --mc needs a positive sample count");

    io::EvalReport report;
    std::optional<BuiltinDistribution> builtin;
    if (o.dist) builtin = parse_builtin(*o.dist);

    if (builtin && builtin->name == "multi") {
        std::vector<double> r(builtin->args.begin(), builtin->args.end() - 1);
        const double delta = builtin->args.back();
        const auto instance = multi_item_lower_instance(r, delta);
        const auto infos = multi_item_lower_infos(r, delta);
        MultiItemMechanism mech = o.mechanism == "separate" ? sell_separate(infos)
                                  : o.mechanism == "bundle" ? sell_bundle(infos)
                                                            : throw UsageError("multi instances take --mechanism separate|bundle");
        report.mechanism = io::to_json(mech);
        report.distribution = builtin_label(*builtin);
        const bool mc = o.mc_samples.has_value() || mech.kind() == MultiItemMechanism::Kind::full_bundle;
        if (mc) {
            const auto est = revenue_monte_carlo(mech, instance, o.mc_samples.value_or(1'000'000), o.seed);
            report.revenue = est.estimate;
            report.monte_carlo = true;
            report.n_samples = est.n_samples;
            report.std_error = est.std_error;
            report.seed = o.seed;
        } else {
            report.revenue = revenue_exact(mech, instance);
        }
        for (const auto& m : instance.marginals()) report.opt += marginal_opt(m).revenue;
        report.ratio = ratio_of(report.opt, report.revenue);
        auto j = io::to_json(report);
        j["opt_basis"] = "sum_of_marginal_opt";
        j["welfare"] = instance.welfare();
        return dump(j);
    }

    PriceLottery mech = o.mechanism_json ? io::lottery_from_json(io::parse_text(*o.mechanism_json, "mechanism"))
                                         : single_mechanism(o.mechanism, info, o.price);
    const PiecewiseDistribution d =
        builtin ? single_builtin(*builtin, info) : io::piecewise_from_json(io::parse_text(*o.dist_json, o.dist_source));

    report.mechanism = io::to_json(mech);
    if (builtin) {
        report.distribution = builtin_label(*builtin);
        report.distribution["mu"] = info.mu();
        report.distribution["sigma"] = info.sigma();
    } else {
        report.distribution = io::to_json(d);
    }
    if (o.mc_samples) {
        const auto est = revenue_monte_carlo(mech, d, *o.mc_samples, o.seed);
        report.revenue = est.estimate;
        report.monte_carlo = true;
        report.n_samples = est.n_samples;
        report.std_error = est.std_error;
        report.seed = o.seed;
    } else {
        report.revenue = revenue_exact(mech, d);
    }
    report.opt = myerson_opt(d).revenue;
    report.ratio = ratio_of(report.opt, report.revenue);
    return dump(io::to_json(report));
}

// --- certify -----------------------------------------------------------------------

struct CertifyOptions {
    std::string kind = "yao";  // yao, det, grid, multi
    double mu = 1.0;
    double sigma = 1.0;
    std::optional<double> price;
    std::optional<double> gap;
    std::optional<std::string> mechanism;
    std::uint64_t grid = 1000;
    std::string families = "two-point,rare";
    std::vector<double> r_values;
    std::optional<double> delta;
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
};

inline AdversaryFamilies parse_families(const std::string& text) {
    AdversaryFamilies f{false, false, false};
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "two-point")
            f.two_point = true;
        else if (item == "rare")
            f.rare_event = true;
        else if (item == "yao")
            f.yao = true;
        else
            throw UsageError("unknown adversary family '" + item + "'");
    }
    if (!f.two_point && !f.rare_event && !f.yao) throw UsageError("no adversary family selected");
    return f;
}

inline std::string cmd_certify(const CertifyOptions& o) {
    if (o.kind == "multi") {
        if (o.r_values.size() < 2) throw UsageError("certify multi needs --r with at least two values");
        const double r_max = *std::max_element(o.r_values.begin(), o.r_values.end());
        if (o.r_values[0] != r_max) throw UsageError("certify multi: the first --r value must be the largest");
        const double delta = o.delta.value_or(default_multi_item_delta(r_max));
        const auto infos = multi_item_lower_infos(o.r_values, delta);
        const std::string m = o.mechanism.value_or("separate");
        if (m != "separate" && m != "bundle") throw UsageError("certify multi takes --mechanism separate|bundle");
        const auto mech = m == "separate" ? sell_separate(infos) : sell_bundle(infos);
        auto cert = multi_item_lower_check(o.r_values, delta, mech, {o.mc_samples, o.seed});
        auto j = io::to_json(cert);
        j["mechanism"] = io::to_json(mech);
        return dump(j);
    }

    const auto info = make_info(o.mu, o.sigma);
    if (o.kind == "yao") {
        if (info.sigma() == 0.0) throw UsageError("certify yao needs --sigma > 0");
        if (o.mechanism) return dump(io::to_json(yao_ratio_against(single_mechanism(*o.mechanism, info, o.price), info)));
        return dump(io::to_json(yao_lower_bound(info)));
    }
    if (o.kind == "det") {
        const double p = o.price.value_or(minimize_deterministic(info).p_star);
        if (!(p > 0.0)) throw UsageError("certify det needs --p > 0");
        if (o.gap && !(*o.gap > 0.0)) throw UsageError("certify det needs --gap > 0");
        return dump(io::to_json(worst_case_ratio_deterministic(p, info, o.gap.value_or(-1.0))));
    }
    if (o.kind == "grid") {
        if (o.grid < 1) throw UsageError("certify grid needs --grid >= 1");
        const auto mech = single_mechanism(o.mechanism.value_or("lottery"), info, o.price);
        return dump(io::to_json(grid_adversary_search(mech, info, o.grid, parse_families(o.families))));
    }
    throw UsageError("certify: unknown certificate kind '" + o.kind + "' (yao, det, grid, multi)");
}

// --- simulate ---------------------------------------------------------------------

inline std::string cmd_simulate(const std::string& env_text, std::uint64_t rounds, std::uint64_t seed,
                                const std::string& source = "environment") {
    if (rounds < 1) throw UsageError("simulate: --rounds must be >= 1");
    const auto env = io::environment_from_json(io::parse_text(env_text, source));
    const auto lazy = simulate_lazy_vcg(env, rounds, seed);
    // Independent stream for the baseline.
    const auto opt = myerson_optimal_revenue(env, rounds, splitmix64(seed ^ 0x6d796572736f6eULL));
    const double r_max = env.max_cv();
    const double rho = rho_randomized(r_max);
    json j = {{"environment", io::to_json(env)},
              {"rounds", rounds},
              {"seed", seed},
              {"lazy_vcg",
               {{"revenue", lazy.avg_revenue},
                {"revenue_std_error", lazy.revenue_std_error},
                {"welfare", lazy.avg_welfare},
                {"welfare_std_error", lazy.welfare_std_error}}},
              {"vcg_welfare", {{"welfare", lazy.avg_vcg_welfare}, {"std_error", lazy.vcg_welfare_std_error}}},
              {"myerson", {{"revenue", opt.estimate}, {"std_error", opt.std_error}}},
              {"r_max", r_max},
              {"empirical_revenue_ratio", io::number(ratio_of(opt.estimate, lazy.avg_revenue))},
              {"revenue_ratio_ceiling", 2.0 * rho},
              {"empirical_welfare_ratio", io::number(ratio_of(lazy.avg_vcg_welfare, lazy.avg_welfare))},
              {"welfare_ratio_ceiling", rho}};
    return dump(j);
}

}  // namespace robust_pricing::cli
