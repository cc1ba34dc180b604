#pragma once

// Exact single-item value distributions: atoms plus reciprocal-density tails,
// closed-form analytic families, and the adversarial constructions built from
// them.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "robust_pricing/core_math.hpp"

namespace robust_pricing {

inline constexpr double kMassTolerance = 1e-12;

struct Atom {
    double value;
    double mass;
};

/// Segment [lo, hi) carrying density K / z^2, i.e. mass K (1/lo - 1/hi).
/// Posting any price inside the segment earns the same K from the segment's
/// own mass, which is what makes it an equal-revenue piece.
struct Tail {
    double lo;
    double hi;
    double k;

    double mass() const noexcept { return k * (1.0 / lo - 1.0 / hi); }
};

struct Moments {
    double mean;
    double variance;
};

/// Revenue-maximizing posted price and the revenue it earns.
struct OptimalPrice {
    double revenue;
    double price;
};

/// A value distribution made of point masses and reciprocal tails.
///
/// Atoms are kept sorted with strictly increasing values; tails are sorted,
/// non-overlapping, and split so that no atom falls strictly inside one.
/// Construction rejects anything whose total mass is not 1 within
/// kMassTolerance.
class PiecewiseDistribution {
public:
    PiecewiseDistribution(std::vector<Atom> atoms, std::vector<Tail> tails = {}) {
        for (const auto& a : atoms) {
            if (!std::isfinite(a.value) || a.value < 0.0)
                throw std::domain_error("PiecewiseDistribution: atom values must be finite and nonnegative");
            if (!std::isfinite(a.mass) || a.mass < 0.0 || a.mass > 1.0 + kMassTolerance)
                throw std::domain_error("PiecewiseDistribution: atom mass must lie in [0, 1]");
        }
        for (const auto& t : tails) {
            if (!std::isfinite(t.lo) || !std::isfinite(t.hi) || !(t.lo > 0.0) || !(t.hi > t.lo))
                throw std::domain_error("PiecewiseDistribution: tails need 0 < lo < hi < inf");
            if (!std::isfinite(t.k) || t.k < 0.0)
                throw std::domain_error("PiecewiseDistribution: tail coefficient must be nonnegative");
        }
        atoms_ = merge_atoms(std::move(atoms));
        tails_ = normalize_tails(std::move(tails), atoms_);
        double total = 0.0;
        for (const auto& a : atoms_) total += a.mass;
        for (const auto& t : tails_) total += t.mass();
        if (std::abs(total - 1.0) > kMassTolerance)
            throw std::domain_error("PiecewiseDistribution: total probability " + std::to_string(total) +
                                    " is not 1");
        build_pieces();
    }

    static PiecewiseDistribution point_mass(double value) { return PiecewiseDistribution({{value, 1.0}}); }

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<Tail>& tails() const noexcept { return tails_; }

    double total_mass() const {
        double total = 0.0;
        for (const auto& a : atoms_) total += a.mass;
        for (const auto& t : tails_) total += t.mass();
        return total;
    }

    /// P[X >= p], i.e. 1 - F(p-).
    double survival(double p) const {
        double s = 0.0;
        for (const auto& a : atoms_)
            if (a.value >= p) s += a.mass;
        for (const auto& t : tails_) {
            if (p <= t.lo)
                s += t.mass();
            else if (p < t.hi)
                s += t.k * (1.0 / p - 1.0 / t.hi);
        }
        return std::clamp(s, 0.0, 1.0);
    }

    /// F(p-) = P[X < p].
    double cdf_left(double p) const { return std::clamp(1.0 - survival(p), 0.0, 1.0); }

    /// F(x) = P[X <= x].
    double cdf(double x) const {
        double c = 0.0;
        for (const auto& a : atoms_)
            if (a.value <= x) c += a.mass;
        for (const auto& t : tails_) {
            if (x >= t.hi)
                c += t.mass();
            else if (x > t.lo)
                c += t.k * (1.0 / t.lo - 1.0 / x);
        }
        return std::clamp(c, 0.0, 1.0);
    }

    /// Generalized inverse cdf: smallest x with F(x) >= u, for u in [0, 1).
    double quantile(double u) const {
        double acc = 0.0;
        for (const auto& piece : pieces_) {
            const double next = acc + piece.mass;
            if (u < next || &piece == &pieces_.back()) {
                if (piece.is_atom) return piece.lo;
                // Inside the tail: acc + K (1/lo - 1/z) = u.
                const double inv = 1.0 / piece.lo - std::max(0.0, u - acc) / piece.k;
                const double z = inv > 0.0 ? 1.0 / inv : piece.hi;
                return std::clamp(z, piece.lo, piece.hi);
            }
            acc = next;
        }
        return pieces_.empty() ? 0.0 : pieces_.back().hi;
    }

    /// Sorted, deduplicated set of atom values and tail endpoints.
    std::vector<double> breakpoints() const {
        std::vector<double> pts;
        for (const auto& a : atoms_) pts.push_back(a.value);
        for (const auto& t : tails_) {
            pts.push_back(t.lo);
            pts.push_back(t.hi);
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        return pts;
    }

    double support_max() const {
        double m = 0.0;
        if (!atoms_.empty()) m = atoms_.back().value;
        if (!tails_.empty()) m = std::max(m, tails_.back().hi);
        return m;
    }

    /// Integral over [a, b] of (pi2 - p) * P[X >= p] dp.
    double survival_moment_integral(double a, double b, double pi2) const {
        if (!(b > a)) return 0.0;
        std::vector<double> cuts{a, b};
        for (double x : breakpoints())
            if (x > a && x < b) cuts.push_back(x);
        std::sort(cuts.begin(), cuts.end());
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = cuts[i];
            const double hi = cuts[i + 1];
            if (!(hi > lo)) continue;
            // On (lo, hi) the survival function is C + K/p.
            double k = 0.0;
            for (const auto& t : tails_)
                if (t.lo <= lo && t.hi >= hi) k += t.k;
            const double mid = lo + 0.5 * (hi - lo);
            const double c = survival(mid) - k / mid;
            total += c * (pi2 * (hi - lo) - 0.5 * (hi * hi - lo * lo));
            if (k > 0.0) total += k * (pi2 * std::log(hi / lo) - (hi - lo));
        }
        return total;
    }

    friend bool operator==(const PiecewiseDistribution& a, const PiecewiseDistribution& b) {
        auto atom_eq = [](const Atom& x, const Atom& y) { return x.value == y.value && x.mass == y.mass; };
        auto tail_eq = [](const Tail& x, const Tail& y) { return x.lo == y.lo && x.hi == y.hi && x.k == y.k; };
        return std::equal(a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end(), atom_eq) &&
               std::equal(a.tails_.begin(), a.tails_.end(), b.tails_.begin(), b.tails_.end(), tail_eq);
    }

private:
    struct Piece {
        bool is_atom;
        double lo;
        double hi;
        double k;
        double mass;
    };

    static std::vector<Atom> merge_atoms(std::vector<Atom> atoms) {
        std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
        std::vector<Atom> out;
        for (const auto& a : atoms) {
            if (a.mass == 0.0) continue;
            if (!out.empty() && out.back().value == a.value)
                out.back().mass += a.mass;
            else
                out.push_back(a);
        }
        return out;
    }

    // Splits overlapping tails into elementary intervals (densities add) and
    // cuts them at atom values.
    static std::vector<Tail> normalize_tails(std::vector<Tail> tails, const std::vector<Atom>& atoms) {
        if (tails.empty()) return tails;
        std::vector<double> cuts;
        for (const auto& t : tails) {
            cuts.push_back(t.lo);
            cuts.push_back(t.hi);
        }
        for (const auto& a : atoms) cuts.push_back(a.value);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<Tail> out;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double k = 0.0;
            for (const auto& t : tails)
                if (t.lo <= cuts[i] && t.hi >= cuts[i + 1]) k += t.k;
            if (k > 0.0) out.push_back({cuts[i], cuts[i + 1], k});
        }
        return out;
    }

    void build_pieces() {
        pieces_.clear();
        for (const auto& a : atoms_) pieces_.push_back({true, a.value, a.value, 0.0, a.mass});
        for (const auto& t : tails_) pieces_.push_back({false, t.lo, t.hi, t.k, t.mass()});
        // An atom at a tail's lower end precedes the tail; one at its upper end follows it.
        std::stable_sort(pieces_.begin(), pieces_.end(), [](const Piece& a, const Piece& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.is_atom && !b.is_atom;
        });
    }

    std::vector<Atom> atoms_;
    std::vector<Tail> tails_;
    std::vector<Piece> pieces_;
};

/// Exact mean and variance. The variance is accumulated about the mean to
/// avoid cancellation when one atom sits far out.
inline Moments moments(const PiecewiseDistribution& d) {
    double m1 = 0.0;
    for (const auto& a : d.atoms()) m1 += a.mass * a.value;
    for (const auto& t : d.tails()) m1 += t.k * std::log(t.hi / t.lo);
    double var = 0.0;
    for (const auto& a : d.atoms()) var += a.mass * (a.value - m1) * (a.value - m1);
    // Integral of (z - m)^2 K / z^2 over [lo, hi).
    for (const auto& t : d.tails())
        var += t.k * ((t.hi - t.lo) - 2.0 * m1 * std::log(t.hi / t.lo) + m1 * m1 * (1.0 / t.lo - 1.0 / t.hi));
    return {m1, std::max(0.0, var)};
}

/// sup_p p (1 - F(p-)); the lowest maximizing price wins ties.
///
/// Revenue is constant on a stretch with no atoms and linear in p inside a
/// tail, so atom values and tail endpoints are the only candidates.
inline OptimalPrice myerson_opt(const PiecewiseDistribution& d) {
    OptimalPrice best{0.0, 0.0};
    for (double p : d.breakpoints()) {
        const double rev = p * d.survival(p);
        if (rev > best.revenue * (1.0 + 1e-14) + 1e-300) best = {rev, p};
    }
    return best;
}

/// Mean-mu, variance-sigma^2 two-point distribution with its low atom at x.
inline PiecewiseDistribution two_point(const MomentInfo& info, double x) {
    const double mu = info.mu();
    if (!std::isfinite(x) || x < 0.0 || x >= mu) throw std::domain_error("two_point: x must lie in [0, mu)");
    if (info.sigma() == 0.0) return PiecewiseDistribution::point_mass(mu);
    const double s2 = info.variance();
    const double gap = mu - x;
    const double alpha = s2 / (s2 + gap * gap);
    const double y = mu + s2 / gap;
    return PiecewiseDistribution({{x, alpha}, {y, 1.0 - alpha}});
}

/// 0 with probability 1 - eps, mu/eps with probability eps.
inline PiecewiseDistribution rare_event(double mu, double eps) {
    if (!std::isfinite(mu) || !(mu > 0.0)) throw std::domain_error("rare_event: mu must be positive");
    if (!(eps > 0.0) || eps > 1.0) throw std::domain_error("rare_event: eps must lie in (0, 1]");
    if (eps == 1.0) return PiecewiseDistribution::point_mass(mu);
    return PiecewiseDistribution({{0.0, 1.0 - eps}, {mu / eps, eps}});
}

/// Parameters of the mixture over rare-event distributions whose posterior is
/// a truncated equal-revenue distribution.
struct YaoMixture {
    double eps0;  // smallest admissible eps, 1/(1+r^2)
    double c;     // mixing weight at eps0, 1/(1+ln(1+r^2))
};

inline YaoMixture yao_mixture(const MomentInfo& info) {
    if (info.sigma() == 0.0) throw std::domain_error("yao_posterior: sigma must be positive");
    const double r2 = info.cv() * info.cv();
    return {1.0 / (1.0 + r2), 1.0 / (1.0 + std::log1p(r2))};
}

/// Posterior of the rare-event mixture: atom 1-c at 0, equal-revenue density
/// c mu / z^2 on [mu, mu/eps0), atom c eps0 at mu/eps0.
inline PiecewiseDistribution yao_posterior(const MomentInfo& info) {
    const auto [eps0, c] = yao_mixture(info);
    const double mu = info.mu();
    return PiecewiseDistribution({{0.0, 1.0 - c}, {mu / eps0, c * eps0}}, {{mu, mu / eps0, c * mu}});
}

/// Convex combination w * a + (1 - w) * b.
inline PiecewiseDistribution mix(const PiecewiseDistribution& a, const PiecewiseDistribution& b, double w) {
    if (!(w >= 0.0) || w > 1.0) throw std::domain_error("mix: weight must lie in [0, 1]");
    std::vector<Atom> atoms;
    std::vector<Tail> tails;
    for (const auto& x : a.atoms()) atoms.push_back({x.value, w * x.mass});
    for (const auto& x : b.atoms()) atoms.push_back({x.value, (1.0 - w) * x.mass});
    for (const auto& t : a.tails()) tails.push_back({t.lo, t.hi, w * t.k});
    for (const auto& t : b.tails()) tails.push_back({t.lo, t.hi, (1.0 - w) * t.k});
    return PiecewiseDistribution(std::move(atoms), std::move(tails));
}

/// Mixes a rare-event component into d so that the variance becomes exactly
/// sigma^2 while the mean stays mu. Returns the mixture and the eps used.
inline std::pair<PiecewiseDistribution, double> perturb_with_eps(const PiecewiseDistribution& d,
                                                                 const MomentInfo& info, double delta) {
    if (!(delta > 0.0) || delta > 1.0) throw std::domain_error("perturb_to_exact_sigma: delta must lie in (0, 1]");
    const auto m = moments(d);
    const double mu = info.mu();
    if (std::abs(m.mean - mu) > 1e-9 * mu) throw std::domain_error("perturb_to_exact_sigma: mean of d must equal mu");
    if (m.variance >= info.variance())
        throw std::domain_error("perturb_to_exact_sigma: variance of d must be below sigma^2");
    const double dm2 = delta * mu * mu;
    const double eps = dm2 / (dm2 + info.variance() - (1.0 - delta) * m.variance);
    return {mix(d, rare_event(mu, eps), 1.0 - delta), eps};
}

inline PiecewiseDistribution perturb_to_exact_sigma(const PiecewiseDistribution& d, const MomentInfo& info,
                                                    double delta) {
    return perturb_with_eps(d, info, delta).first;
}

// ---------------------------------------------------------------------------
// Analytic families

enum class Family { exponential, uniform, shifted_exponential };

/// Closed-form regular distribution used for bidders in auction environments.
class AnalyticDistribution {
public:
    static AnalyticDistribution exponential(double rate) { return shifted_exponential(0.0, rate, Family::exponential); }

    static AnalyticDistribution shifted_exponential(double shift, double rate) {
        return shifted_exponential(shift, rate, Family::shifted_exponential);
    }

    static AnalyticDistribution uniform(double lo, double hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo < 0.0 || !(hi > lo))
            throw std::domain_error("uniform: need 0 <= lo < hi < inf");
        return AnalyticDistribution(Family::uniform, lo, hi);
    }

    Family family() const noexcept { return family_; }
    /// exponential: (shift, rate); uniform: (lo, hi).
    double param_a() const noexcept { return a_; }
    double param_b() const noexcept { return b_; }

    double rate() const noexcept { return b_; }
    double shift() const noexcept { return a_; }

    double support_lo() const noexcept { return a_; }
    double support_hi() const noexcept { return family_ == Family::uniform ? b_ : kInfinity; }

    double cdf(double x) const {
        if (x <= a_) return 0.0;
        if (family_ == Family::uniform) return x >= b_ ? 1.0 : (x - a_) / (b_ - a_);
        return -std::expm1(-b_ * (x - a_));
    }

    /// P[X >= p]; equals 1 - cdf(p) since the distribution is atomless.
    double survival(double p) const {
        if (p <= a_) return 1.0;
        if (family_ == Family::uniform) return p >= b_ ? 0.0 : (b_ - p) / (b_ - a_);
        return std::exp(-b_ * (p - a_));
    }

    double pdf(double x) const {
        if (x < a_) return 0.0;
        if (family_ == Family::uniform) return x > b_ ? 0.0 : 1.0 / (b_ - a_);
        return b_ * std::exp(-b_ * (x - a_));
    }

    double quantile(double u) const {
        if (family_ == Family::uniform) return a_ + u * (b_ - a_);
        return a_ - std::log1p(-u) / b_;
    }

    double mean() const { return family_ == Family::uniform ? 0.5 * (a_ + b_) : a_ + 1.0 / b_; }

    double variance() const {
        if (family_ == Family::uniform) return (b_ - a_) * (b_ - a_) / 12.0;
        return 1.0 / (b_ * b_);
    }

    MomentInfo moment_info() const { return MomentInfo(mean(), std::sqrt(variance())); }

    /// phi(x) = x - (1 - F(x)) / f(x) on the support.
    double virtual_value(double x) const {
        if (family_ == Family::uniform) return 2.0 * x - b_;
        return x - 1.0 / b_;
    }

    /// Smallest support point whose virtual value is at least y.
    double inverse_virtual_value(double y) const {
        if (family_ == Family::uniform) return std::max(a_, 0.5 * (y + b_));
        return std::max(a_, y + 1.0 / b_);
    }

    OptimalPrice myerson_opt() const {
        const double p = inverse_virtual_value(0.0);
        return {p * survival(p), p};
    }

    /// Integral over [a, b] of (pi2 - p) * P[X >= p] dp, in closed form.
    double survival_moment_integral(double lo, double hi, double pi2) const {
        if (!(hi > lo)) return 0.0;
        double total = 0.0;
        // Below the support the item always sells.
        const double flat_hi = std::min(hi, a_);
        if (flat_hi > lo) total += pi2 * (flat_hi - lo) - 0.5 * (flat_hi * flat_hi - lo * lo);
        const double s_lo = std::max(lo, a_);
        const double s_hi = std::min(hi, support_hi());
        if (!(s_hi > s_lo)) return total;
        if (family_ == Family::uniform) {
            // (pi2 - p)(b - p)/(b - a)
            auto anti = [&](double p) { return pi2 * b_ * p - 0.5 * (pi2 + b_) * p * p + p * p * p / 3.0; };
            total += (anti(s_hi) - anti(s_lo)) / (b_ - a_);
        } else {
            const double lam = b_;
            auto anti = [&](double p) {
                const double e = std::exp(-lam * (p - a_));
                return -(pi2 - p) * e / lam + e / (lam * lam);
            };
            total += anti(s_hi) - anti(s_lo);
        }
        return total;
    }

    std::string name() const {
        switch (family_) {
            case Family::exponential: return "exponential(" + fmt(b_) + ")";
            case Family::uniform: return "uniform(" + fmt(a_) + "," + fmt(b_) + ")";
            case Family::shifted_exponential: return "shifted_exponential(" + fmt(a_) + "," + fmt(b_) + ")";
        }
        return "unknown";
    }

private:
    AnalyticDistribution(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

    static AnalyticDistribution shifted_exponential(double shift, double rate, Family tag) {
        if (!std::isfinite(rate) || !(rate > 0.0)) throw std::domain_error("exponential: rate must be positive");
        if (!std::isfinite(shift) || shift < 0.0) throw std::domain_error("exponential: shift must be nonnegative");
        return AnalyticDistribution(tag, shift, rate);
    }

    static std::string fmt(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    Family family_;
    double a_;
    double b_;
};

/// What revenue evaluation needs from a single-item value distribution.
template <class D>
concept ValueDistribution = requires(const D& d, double x) {
    { d.survival(x) } -> std::convertible_to<double>;
    { d.quantile(x) } -> std::convertible_to<double>;
    { d.survival_moment_integral(x, x, x) } -> std::convertible_to<double>;
};

static_assert(ValueDistribution<PiecewiseDistribution>);
static_assert(ValueDistribution<AnalyticDistribution>);

using Marginal = std::variant<PiecewiseDistribution, AnalyticDistribution>;

inline double marginal_mean(const Marginal& m) {
    return std::visit(
        [](const auto& d) {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, PiecewiseDistribution>)
                return moments(d).mean;
            else
                return d.mean();
        },
        m);
}

inline double marginal_variance(const Marginal& m) {
    return std::visit(
        [](const auto& d) {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, PiecewiseDistribution>)
                return moments(d).variance;
            else
                return d.variance();
        },
        m);
}

inline OptimalPrice marginal_opt(const Marginal& m) {
    return std::visit(
        [](const auto& d) {
            if constexpr (std::is_same_v<std::decay_t<decltype(d)>, PiecewiseDistribution>)
                return myerson_opt(d);
            else
                return d.myerson_opt();
        },
        m);
}

/// Independent item values, one marginal per item.
class ProductDistribution {
public:
    explicit ProductDistribution(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
        if (marginals_.empty()) throw std::domain_error("ProductDistribution: need at least one item");
    }

    std::size_t size() const noexcept { return marginals_.size(); }
    const Marginal& operator[](std::size_t j) const { return marginals_.at(j); }
    const std::vector<Marginal>& marginals() const noexcept { return marginals_; }

    /// Expected welfare, the sum of marginal means.
    double welfare() const {
        double v = 0.0;
        for (const auto& m : marginals_) v += marginal_mean(m);
        return v;
    }

private:
    std::vector<Marginal> marginals_;
};

/// Multi-item instance whose first item is the Yao posterior for (1, r_1) and
/// whose remaining items are rare events of total mean delta.
inline ProductDistribution multi_item_lower_instance(const std::vector<double>& r_values, double delta) {
    const std::size_t m = r_values.size();
    if (m < 2) throw std::domain_error("multi_item_lower_instance: need at least two items");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::domain_error("multi_item_lower_instance: delta must be positive");
    for (double r : r_values)
        if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("multi_item_lower_instance: r values must be positive");
    std::vector<Marginal> items;
    items.emplace_back(yao_posterior(MomentInfo(1.0, r_values[0])));
    const double scale = delta / static_cast<double>(m - 1);
    for (std::size_t j = 1; j < m; ++j) {
        const double r2 = r_values[j] * r_values[j];
        const double p = 1.0 / (1.0 + r2);
        const double alpha = (1.0 + r2) * scale;
        items.emplace_back(PiecewiseDistribution({{0.0, 1.0 - p}, {alpha, p}}));
    }
    return ProductDistribution(std::move(items));
}

/// Error term delta ln(1+r^2) (1+ln(1+r^2))^2 of the multi-item lower bound.
inline double multi_item_slack(double r, double delta) {
    const double l = std::log1p(r * r);
    return delta * l * (1.0 + l) * (1.0 + l);
}

/// Largest delta of the form 10^-k whose slack stays strictly below eps.
inline double default_multi_item_delta(double r_max, double eps = 0.01) {
    if (!(eps > 0.0)) throw std::domain_error("default_multi_item_delta: eps must be positive");
    double delta = 1.0;
    for (int k = 0; k < 300; ++k, delta /= 10.0)
        if (multi_item_slack(r_max, delta) < eps) return delta;
    throw std::domain_error("default_multi_item_delta: no admissible delta");
}

}  // namespace robust_pricing
