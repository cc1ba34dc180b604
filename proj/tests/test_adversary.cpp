#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "robust_pricing/adversary.hpp"

using namespace robust_pricing;

namespace {

void expect_arithmetic(const RatioCertificate& c) {
    if (std::isinf(c.ratio)) {
        EXPECT_EQ(c.rev, 0.0);
        return;
    }
    EXPECT_NEAR(c.ratio * c.rev, c.opt, 1e-9 * c.opt);
}

}  // namespace

TEST(DeterministicWorstCase, Examples) {
    const MomentInfo info(1.0, 1.0);
    const auto inf = worst_case_ratio_deterministic(1.5, info);
    EXPECT_TRUE(std::isinf(inf.ratio));
    EXPECT_EQ(inf.rev, 0.0);
    EXPECT_EQ(inf.tag, CertificateTag::lemma1_limit);
    EXPECT_TRUE(std::isinf(worst_case_ratio_deterministic(1.0, info).ratio));
    EXPECT_NEAR(worst_case_ratio_deterministic(0.5466, info).ratio, 5.8645, 1e-3);
    EXPECT_NEAR(worst_case_ratio_deterministic(0.5, info).ratio, 6.0, 1e-12);
    EXPECT_THROW(worst_case_ratio_deterministic(0.0, info), std::domain_error);
    EXPECT_THROW(worst_case_ratio_deterministic(-1.0, info), std::domain_error);
}

TEST(DeterministicWorstCase, WitnessConvergesToClosedForm) {
    const MomentInfo info(1.0, 1.0);
    for (double p : {0.3, 0.5, 0.5466, 0.8}) {
        const double closed = deterministic_sup_ratio(p, info);
        double prev = 0.0;
        for (double gap : {1e-2, 1e-4, 1e-6}) {
            const auto c = worst_case_ratio_deterministic(p, info, gap);
            const double w = c.param("witness_ratio");
            EXPECT_GE(w, prev - 1e-12) << p << " " << gap;
            EXPECT_LE(w, closed + 1e-9) << p << " " << gap;
            prev = w;
            expect_arithmetic(c);
        }
        EXPECT_NEAR(prev, closed, 1e-4 * closed) << p;
    }
}

TEST(MinimizeDeterministic, Examples) {
    const auto z = minimize_deterministic(MomentInfo(1.0, 0.0));
    EXPECT_EQ(z.p_star, 1.0);
    EXPECT_EQ(z.ratio, 1.0);
    const auto o = minimize_deterministic(MomentInfo(1.0, 1.0));
    EXPECT_NEAR(o.p_star, 0.54660, 1e-5);
    EXPECT_NEAR(o.ratio, 5.86454, 1e-5);
    EXPECT_NEAR(o.p_star, robust_price(MomentInfo(1.0, 1.0)).price(), 1e-12);
}

TEST(MinimizeDeterministic, MatchesGridMinimumOfClosedForm) {
    for (double r : {0.3, 1.0, 3.0}) {
        const MomentInfo info(1.0, r);
        double best = kInfinity, best_p = 0;
        for (int i = 1; i < 200000; ++i) {
            const double p = i / 200000.0;
            const double v = deterministic_sup_ratio(p, info);
            if (v < best) best = v, best_p = p;
        }
        const auto o = minimize_deterministic(info);
        EXPECT_NEAR(o.p_star, best_p, 1e-5) << r;
        EXPECT_LE(o.ratio, best + 1e-12) << r;
        EXPECT_NEAR(o.ratio, best, 1e-5 * best) << r;
        EXPECT_GT(o.p_star, 0.5);
        EXPECT_LT(o.p_star, 1.0);
    }
}

TEST(YaoLowerBound, Examples) {
    const auto a = yao_lower_bound(MomentInfo(1.0, 1.0));
    EXPECT_NEAR(a.ratio, 1 + std::log(2.0), 1e-9);
    EXPECT_EQ(a.tag, CertificateTag::yao_mixture);
    expect_arithmetic(a);
    EXPECT_NEAR(yao_lower_bound(MomentInfo(1.0, 2.0)).ratio, 2.60944, 1e-5);
    EXPECT_THROW(yao_lower_bound(MomentInfo(1.0, 0.0)), std::domain_error);
    for (int i = 1; i <= 100; ++i) {
        const double r = 0.1 * i;
        const auto c = yao_lower_bound(MomentInfo(3.0, 3.0 * r));
        EXPECT_NEAR(c.ratio, lower_bound_ratio(r), 1e-9 * c.ratio);
        EXPECT_LE(c.ratio, rho_randomized(r) + 1e-9);
    }
}

TEST(YaoRatioAgainst, EveryCatalogueMechanismIsAboveTheBound) {
    for (double r : {0.5, 1.0, 2.0, 5.0}) {
        const MomentInfo info(1.0, r);
        for (const auto& m : {log_lottery(info), robust_price(info), quarter_lottery(info), price_at_mean(info)}) {
            const auto c = yao_ratio_against(m, info);
            EXPECT_GE(c.ratio, lower_bound_ratio(r) - 1e-9) << m.kind_name() << " " << r;
            expect_arithmetic(c);
        }
    }
}

TEST(GridSearch, RobustPriceNearRhoD) {
    const MomentInfo info(1.0, 1.0);
    const auto c = grid_adversary_search(robust_price(info), info, 10000);
    EXPECT_LE(c.ratio, rho_deterministic(1.0) + 1e-3);
    EXPECT_GE(c.ratio, rho_deterministic(1.0) - 0.05);
    expect_arithmetic(c);
}

TEST(GridSearch, QuarterTwoPointOnly) {
    const MomentInfo info(1.0, 1.0);
    const auto c = grid_adversary_search(quarter_lottery(info), info, 1000, {true, false, false});
    EXPECT_LE(c.ratio, 4.0);
    EXPECT_EQ(c.adversary, "two_point");
}

TEST(GridSearch, LotteryWithYaoFamily) {
    const MomentInfo info(1.0, 1.0);
    const auto c = grid_adversary_search(log_lottery(info), info, 1000, {true, false, true});
    EXPECT_GE(c.ratio, 1 + std::log(2.0) - 0.05);
    EXPECT_LE(c.ratio, rho_randomized(1.0) + 1e-6);
}

TEST(GridSearch, OracleDominance) {
    for (double r : {0.2, 1.0, 3.0}) {
        const MomentInfo info(2.0, 2.0 * r);
        const auto cl = grid_adversary_search(log_lottery(info), info, 500, {true, true, true});
        EXPECT_LE(cl.ratio, rho_randomized(r) + 1e-6) << r;
        const auto cd = grid_adversary_search(robust_price(info), info, 500);
        EXPECT_LE(cd.ratio, rho_deterministic(r) + 1e-6) << r;
        expect_arithmetic(cl);
        expect_arithmetic(cd);
    }
}

TEST(GridSearch, Validates) {
    const MomentInfo info(1.0, 1.0);
    EXPECT_THROW(grid_adversary_search(log_lottery(info), info, 0), std::invalid_argument);
    EXPECT_THROW(grid_adversary_search(log_lottery(info), info, 10, {false, false, false}), std::invalid_argument);
}

TEST(RestrictedAdversary, TwoPointCannotCertifyLogBound) {
    const double r = std::sqrt(std::exp(3.0) - 1.0) * 1.05;
    const MomentInfo info(1.0, r);
    const auto c = grid_adversary_search(quarter_lottery(info), info, 1000, {true, false, false});
    EXPECT_LE(c.ratio, 4.0);
    EXPECT_GT(yao_lower_bound(info).ratio, 4.0);
}

TEST(MultiItemLower, SeparateAndBundle) {
    const std::vector<double> r{1.0, 1.0};
    const double delta = 1e-4;
    const auto infos = multi_item_lower_infos(r, delta);
    const auto sep = multi_item_lower_check(r, delta, sell_separate(infos));
    EXPECT_GE(sep.ratio, 1 + std::log(2.0) - 0.01);
    EXPECT_GE(sep.ratio, sep.param("floor"));
    EXPECT_NEAR(sep.param("val_low_items"), delta, 1e-15);
    EXPECT_EQ(sep.tag, CertificateTag::thm5_multi);
    expect_arithmetic(sep);
    const auto bun = multi_item_lower_check(r, delta, sell_bundle(infos), {200'000, 1});
    EXPECT_GE(bun.ratio, 1 + std::log(2.0) - 0.01);
    EXPECT_GT(bun.param("rev_std_error"), 0.0);
}

TEST(MultiItemLower, ManyItemsAndFirstMarginal) {
    const std::vector<double> r{3.0, 1.0, 2.0, 0.5};
    const double delta = default_multi_item_delta(3.0);
    const auto infos = multi_item_lower_infos(r, delta);
    const auto c = multi_item_lower_check(r, delta, sell_separate(infos));
    EXPECT_GE(c.ratio, c.param("floor"));
    // Item 1 alone certifies the single-item bound against the catalogue.
    for (const auto& m : {log_lottery(infos[0]), robust_price(infos[0]), quarter_lottery(infos[0])})
        EXPECT_GE(yao_ratio_against(m, infos[0]).ratio, lower_bound_ratio(3.0) - 1e-9);
}

TEST(MultiItemLower, DimensionMismatch) {
    const std::vector<double> r{1.0, 1.0};
    const auto infos = multi_item_lower_infos({1.0, 1.0, 1.0}, 1e-3);
    EXPECT_THROW(multi_item_lower_check(r, 1e-3, sell_separate(infos)), std::domain_error);
}
