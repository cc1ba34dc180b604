#pragma once

// JSON wire formats for distributions, lotteries, certificates, evaluation
// reports and auction environments.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "robust_pricing/adversary.hpp"
#include "robust_pricing/auctions.hpp"
#include "robust_pricing/distributions.hpp"
#include "robust_pricing/mechanisms.hpp"

namespace robust_pricing::io {

using nlohmann::json;

/// Malformed input; the message names the offending field or text position.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Doubles go out at full precision; non-finite values become "inf"/"-inf"/"nan".
inline json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

/// Parses JSON text, reporting line and column on failure.
inline json parse_text(const std::string& text, const std::string& source = "input") {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON parse error: " +
                         e.what());
    }
}

namespace detail {
inline double get_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ParseError("field '" + field + "' must be a number");
    return j.get<double>();
}

inline const json& require(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.is_object()) throw ParseError(ctx + " must be a JSON object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(ctx + ": missing field '" + key + "'");
    return *it;
}
}  // namespace detail

// --- PiecewiseDistribution ---------------------------------------------------

inline json to_json(const PiecewiseDistribution& d) {
    json atoms = json::array();
    for (const auto& a : d.atoms()) atoms.push_back({a.value, a.mass});
    json tails = json::array();
    for (const auto& t : d.tails()) tails.push_back({t.lo, t.hi, t.k});
    return {{"atoms", atoms}, {"tails", tails}};
}

inline PiecewiseDistribution piecewise_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("distribution must be a JSON object");
    std::vector<Atom> atoms;
    std::vector<Tail> tails;
    if (auto it = j.find("atoms"); it != j.end()) {
        if (!it->is_array()) throw ParseError("field 'atoms' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& a = (*it)[i];
            const std::string f = "atoms[" + std::to_string(i) + "]";
            if (!a.is_array() || a.size() != 2) throw ParseError("field '" + f + "' must be [value, mass]");
            atoms.push_back({detail::get_number(a[0], f + "[0]"), detail::get_number(a[1], f + "[1]")});
        }
    }
    if (auto it = j.find("tails"); it != j.end()) {
        if (!it->is_array()) throw ParseError("field 'tails' must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& t = (*it)[i];
            const std::string f = "tails[" + std::to_string(i) + "]";
            if (!t.is_array() || t.size() != 3) throw ParseError("field '" + f + "' must be [lo, hi, K]");
            tails.push_back({detail::get_number(t[0], f + "[0]"), detail::get_number(t[1], f + "[1]"),
                             detail::get_number(t[2], f + "[2]")});
        }
    }
    try {
        return PiecewiseDistribution(std::move(atoms), std::move(tails));
    } catch (const std::domain_error& e) {
        throw ParseError(std::string("invalid distribution: ") + e.what());
    }
}

// --- PriceLottery ------------------------------------------------------------

inline json to_json(const PriceLottery& l) {
    switch (l.kind()) {
        case PriceLottery::Kind::deterministic: return {{"kind", "deterministic"}, {"p", l.price()}};
        case PriceLottery::Kind::two_point_lottery:
            return {{"kind", "two_point_lottery"}, {"p1", l.low()}, {"q1", l.q1()}, {"p2", l.high()}};
        case PriceLottery::Kind::log_lottery: return {{"kind", "log_lottery"}, {"pi1", l.pi1()}, {"pi2", l.pi2()}};
    }
    return {};
}

inline PriceLottery lottery_from_json(const json& j) {
    const auto& kind = detail::require(j, "kind", "mechanism");
    if (!kind.is_string()) throw ParseError("field 'kind' must be a string");
    const auto k = kind.get<std::string>();
    auto num = [&](const char* key) { return detail::get_number(detail::require(j, key, "mechanism"), key); };
    try {
        if (k == "deterministic") return PriceLottery::deterministic(num("p"));
        if (k == "two_point_lottery") return PriceLottery::two_point(num("p1"), num("q1"), num("p2"));
        if (k == "log_lottery") return PriceLottery::log_lottery(num("pi1"), num("pi2"));
    } catch (const std::domain_error& e) {
        throw ParseError(std::string("invalid mechanism: ") + e.what());
    }
    throw ParseError("field 'kind': unknown mechanism kind '" + k + "'");
}

inline json to_json(const MultiItemMechanism& m) {
    json lotteries = json::array();
    for (const auto& l : m.lotteries()) lotteries.push_back(to_json(l));
    if (m.kind() == MultiItemMechanism::Kind::separate) return {{"kind", "separate"}, {"lotteries", lotteries}};
    return {{"kind", "full_bundle"}, {"items", m.item_count()}, {"lottery", lotteries[0]}};
}

// --- RatioCertificate ----------------------------------------------------------

inline json to_json(const RatioCertificate& c) {
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = number(v);
    json mech = c.lottery ? to_json(*c.lottery) : json{{"kind", c.mechanism}};
    json adversary = {{"name", c.adversary}};
    if (c.witness) adversary["distribution"] = to_json(*c.witness);
    return {{"mechanism", mech},     {"adversary", adversary}, {"opt", number(c.opt)}, {"rev", number(c.rev)},
            {"ratio", number(c.ratio)}, {"tag", to_string(c.tag)}, {"params", params}};
}

// --- EvalReport ----------------------------------------------------------------

struct EvalReport {
    json mechanism;
    json distribution;
    double revenue = 0.0;
    double opt = 0.0;
    double ratio = 0.0;
    bool monte_carlo = false;
    std::uint64_t n_samples = 0;
    double std_error = 0.0;
    std::uint64_t seed = 0;
};

inline json to_json(const EvalReport& r) {
    json j = {{"mechanism", r.mechanism},     {"distribution", r.distribution}, {"revenue", number(r.revenue)},
              {"opt", number(r.opt)},         {"ratio", number(r.ratio)},
              {"method", r.monte_carlo ? "mc" : "exact"}};
    if (r.monte_carlo) {
        j["n_samples"] = r.n_samples;
        j["std_error"] = number(r.std_error);
        j["seed"] = r.seed;
    }
    return j;
}

// --- AuctionEnvironment ----------------------------------------------------------

inline json to_json(const AnalyticDistribution& d) {
    switch (d.family()) {
        case Family::exponential: return {{"family", "exponential"}, {"rate", d.rate()}};
        case Family::uniform: return {{"family", "uniform"}, {"lo", d.param_a()}, {"hi", d.param_b()}};
        case Family::shifted_exponential:
            return {{"family", "shifted_exponential"}, {"shift", d.shift()}, {"rate", d.rate()}};
    }
    return {};
}

inline AnalyticDistribution analytic_from_json(const json& j, const std::string& ctx) {
    const auto& fam = detail::require(j, "family", ctx);
    if (!fam.is_string()) throw ParseError(ctx + ".family must be a string");
    const auto f = fam.get<std::string>();
    auto num = [&](const char* key) {
        return detail::get_number(detail::require(j, key, ctx), ctx + "." + key);
    };
    try {
        if (f == "exponential") return AnalyticDistribution::exponential(num("rate"));
        if (f == "uniform") return AnalyticDistribution::uniform(num("lo"), num("hi"));
        if (f == "shifted_exponential") return AnalyticDistribution::shifted_exponential(num("shift"), num("rate"));
    } catch (const std::domain_error& e) {
        throw ParseError(ctx + ": " + e.what());
    }
    throw ParseError(ctx + ".family: unsupported family '" + f + "'");
}

inline AuctionEnvironment environment_from_json(const json& j) {
    const auto& n_field = detail::require(j, "n", "environment");
    const auto& k_field = detail::require(j, "k", "environment");
    const auto& bidders = detail::require(j, "bidders", "environment");
    if (!n_field.is_number_integer() || n_field.get<long long>() < 1)
        throw ParseError("field 'n' must be a positive integer");
    if (!k_field.is_number_integer() || k_field.get<long long>() < 1)
        throw ParseError("field 'k' must be a positive integer");
    if (!bidders.is_array()) throw ParseError("field 'bidders' must be an array");
    const auto n = static_cast<std::size_t>(n_field.get<long long>());
    const auto k = static_cast<std::size_t>(k_field.get<long long>());
    if (bidders.size() != n)
        throw ParseError("field 'bidders' has " + std::to_string(bidders.size()) + " entries but n = " +
                         std::to_string(n));
    if (k > n) throw ParseError("field 'k' must not exceed n (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
    std::vector<AnalyticDistribution> dists;
    for (std::size_t i = 0; i < n; ++i) dists.push_back(analytic_from_json(bidders[i], "bidders[" + std::to_string(i) + "]"));
    return AuctionEnvironment(k, std::move(dists));
}

inline json to_json(const AuctionEnvironment& env) {
    json bidders = json::array();
    for (const auto& b : env.bidders()) bidders.push_back(to_json(b));
    return {{"n", env.n()}, {"k", env.k()}, {"bidders", bidders}};
}

}  // namespace robust_pricing::io
