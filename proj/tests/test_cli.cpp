#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "commands.hpp"

using namespace robust_pricing;
using robust_pricing::io::json;

namespace {

std::string row_for(const std::string& csv, const std::string& prefix) {
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(prefix, 0) == 0) return line;
    return {};
}

}  // namespace

TEST(Curve, PlotRows) {
    cli::CurveSpec s;
    s.which = "rho_d";
    const auto csv = cli::cmd_curve(s);
    EXPECT_EQ(csv.substr(0, 8), "r,value\n");
    EXPECT_EQ(row_for(csv, "1.00,"), "1.00,5.86454");
    s.which = "lower";
    EXPECT_EQ(row_for(cli::cmd_curve(s), "0.00,"), "0.00,1.00000");
    s.which = "rho";
    const auto rho = cli::cmd_curve(s);
    EXPECT_EQ(row_for(rho, "0.50,"), "0.50,2.44026");
    EXPECT_EQ(std::count(rho.begin(), rho.end(), '\n'), 202);
}

TEST(Curve, LambdaAndJson) {
    cli::CurveSpec s;
    s.which = "lambda_ratio";
    s.x_min = 0.5;
    s.x_max = 1.0;
    s.step = 0.5;
    EXPECT_EQ(cli::cmd_curve(s), "lambda,value\n0.5,4.00000\n1.0,inf\n");
    s.format = "json";
    const auto j = json::parse(cli::cmd_curve(s));
    EXPECT_EQ(j["points"][1][1], "inf");
}

TEST(Curve, Validation) {
    cli::CurveSpec s;
    s.step = 0.0;
    EXPECT_THROW(cli::cmd_curve(s), cli::UsageError);
    s = {};
    s.x_min = -1;
    EXPECT_THROW(cli::cmd_curve(s), cli::UsageError);
    s = {};
    s.x_max = -0.5;
    EXPECT_THROW(cli::cmd_curve(s), cli::UsageError);
    s = {};
    s.which = "nope";
    EXPECT_THROW(cli::cmd_curve(s), cli::UsageError);
    s = {};
    s.which = "cutoff";
    EXPECT_THROW(cli::cmd_curve(s), cli::UsageError);  // lambda = 0 not allowed
}

TEST(PriceLotteryCommands, Examples) {
    EXPECT_EQ(json::parse(cli::cmd_price(1, 0)).dump(), R"({"kind":"deterministic","p":1.0,"ratio":1.0})");
    const auto p = json::parse(cli::cmd_price(1, 1));
    EXPECT_NEAR(p["p"].get<double>(), 0.54660, 1e-5);
    EXPECT_NEAR(p["ratio"].get<double>(), 5.86454, 1e-5);
    const auto l = json::parse(cli::cmd_lottery(1, 1));
    EXPECT_EQ(l["kind"], "log_lottery");
    EXPECT_NEAR(l["pi1"].get<double>(), 0.27782, 1e-5);
    EXPECT_NEAR(l["pi2"].get<double>(), 3.7383, 1e-4);
    EXPECT_NEAR(l["ratio"].get<double>(), 3.5994, 1e-4);
    EXPECT_THROW(cli::cmd_price(0, 1), cli::UsageError);
    EXPECT_THROW(cli::cmd_lottery(1, -1), cli::UsageError);
}

TEST(Eval, Examples) {
    cli::EvalOptions o;
    o.mechanism = "log-lottery";
    o.dist = "yao";
    auto j = json::parse(cli::cmd_eval(o));
    EXPECT_LE(j["ratio"].get<double>(), 3.5994);
    EXPECT_EQ(j["method"], "exact");

    o.mechanism = "quarter";
    o.dist = "two-point(0)";
    j = json::parse(cli::cmd_eval(o));
    EXPECT_DOUBLE_EQ(j["revenue"].get<double>(), 0.625);

    o.mechanism = "robust-price";
    o.dist = "two-point(0.54)";
    j = json::parse(cli::cmd_eval(o));
    EXPECT_TRUE(j["ratio"].is_number());
    EXPECT_NEAR(j["ratio"].get<double>(), 5.86454, 0.1);
}

TEST(Eval, MonteCarloAndJsonInputs) {
    cli::EvalOptions o;
    o.mechanism_json = R"({"kind":"two_point_lottery","p1":0.5,"q1":0.5,"p2":2.0})";
    o.dist_json = R"({"atoms":[[0,0.5],[2,0.5]],"tails":[]})";
    o.mc_samples = 100000;
    o.seed = 4;
    const auto j = json::parse(cli::cmd_eval(o));
    EXPECT_EQ(j["method"], "mc");
    EXPECT_EQ(j["n_samples"], 100000);
    EXPECT_EQ(j["seed"], 4);
    EXPECT_NEAR(j["revenue"].get<double>(), 0.625, 4 * j["std_error"].get<double>());
}

TEST(Eval, MultiItemBuiltin) {
    cli::EvalOptions o;
    o.mechanism = "separate";
    o.dist = "multi(1,1,0.001)";
    const auto j = json::parse(cli::cmd_eval(o));
    EXPECT_EQ(j["method"], "exact");
    EXPECT_EQ(j["mechanism"]["kind"], "separate");
    o.mechanism = "lottery";
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);
}

TEST(Eval, BadInputs) {
    cli::EvalOptions o;
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);  // no distribution
    o.dist = "two-point(abc)";
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);
    o.dist = "gamma(2)";
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);
    o.dist = "rare(0.5,1)";
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);
    o.dist = "yao";
    o.mechanism = "price";
    EXPECT_THROW(cli::cmd_eval(o), cli::UsageError);  // missing --p
    o.mechanism = "lottery";
    o.dist.reset();
    o.dist_json = R"({"atoms":[[1,0.5]]})";
    EXPECT_THROW(cli::cmd_eval(o), io::ParseError);
    o.dist_json = "{\n  \"atoms\": [1,\n}";
    try {
        cli::cmd_eval(o);
        FAIL();
    } catch (const io::ParseError& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
}

TEST(Certify, Examples) {
    cli::CertifyOptions c;
    c.kind = "yao";
    auto j = json::parse(cli::cmd_certify(c));
    EXPECT_NEAR(j["ratio"].get<double>(), 1.693147, 1e-6);
    EXPECT_EQ(j["tag"], "yao_mixture");

    c.kind = "det";
    c.price = 1.5;
    j = json::parse(cli::cmd_certify(c));
    EXPECT_EQ(j["ratio"], "inf");
    EXPECT_EQ(j["rev"], 0.0);

    c.kind = "grid";
    c.price.reset();
    c.mechanism = "lottery";
    j = json::parse(cli::cmd_certify(c));
    EXPECT_LE(j["ratio"].get<double>(), 3.5994 + 1e-6);

    c.kind = "multi";
    c.r_values = {1.0, 1.0};
    c.delta = 1e-4;
    c.mechanism = "separate";
    j = json::parse(cli::cmd_certify(c));
    EXPECT_GE(j["ratio"].get<double>(), 1 + std::log(2.0) - 0.01);
}

TEST(Certify, BadInputs) {
    cli::CertifyOptions c;
    c.kind = "bogus";
    EXPECT_THROW(cli::cmd_certify(c), cli::UsageError);
    c.kind = "multi";
    c.r_values = {1.0};
    EXPECT_THROW(cli::cmd_certify(c), cli::UsageError);
    c.r_values = {0.5, 1.0};
    EXPECT_THROW(cli::cmd_certify(c), cli::UsageError);
    c.kind = "grid";
    c.families = "two-point,foo";
    EXPECT_THROW(cli::cmd_certify(c), cli::UsageError);
    c.kind = "yao";
    c.sigma = 0.0;
    EXPECT_THROW(cli::cmd_certify(c), cli::UsageError);
}

TEST(Simulate, ReportAndValidation) {
    const std::string env = R"({"n":2,"k":1,"bidders":[{"family":"exponential","rate":1.0},{"family":"exponential","rate":1.0}]})";
    const auto a = cli::cmd_simulate(env, 100000, 7);
    EXPECT_EQ(a, cli::cmd_simulate(env, 100000, 7));
    const auto j = json::parse(a);
    EXPECT_NEAR(j["revenue_ratio_ceiling"].get<double>(), 7.1988, 1e-4);
    EXPECT_LE(j["empirical_revenue_ratio"].get<double>(), j["revenue_ratio_ceiling"].get<double>());

    try {
        cli::cmd_simulate(R"({"n":1,"k":2,"bidders":[{"family":"exponential","rate":1}]})", 10, 1);
        FAIL();
    } catch (const io::ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("'k'"), std::string::npos);
    }
    EXPECT_THROW(cli::cmd_simulate(R"({"n":2,"k":1,"bidders":[{"family":"exponential","rate":1}]})", 10, 1), io::ParseError);
    EXPECT_THROW(cli::cmd_simulate(R"({"n":1,"k":1,"bidders":[{"family":"pareto","alpha":2}]})", 10, 1), io::ParseError);
    EXPECT_THROW(cli::cmd_simulate(R"({"n":1,"k":1,"bidders":[{"family":"exponential","rate":-1}]})", 10, 1),
                 io::ParseError);
    EXPECT_THROW(cli::cmd_simulate(env, 0, 1), cli::UsageError);
}

TEST(Io, RoundTrips) {
    const auto d = yao_posterior(MomentInfo(1.0, 2.0));
    EXPECT_EQ(io::piecewise_from_json(json::parse(io::to_json(d).dump())), d);
    for (const auto& l : {PriceLottery::deterministic(0.3), PriceLottery::two_point(0.1, 0.25, 3.0),
                          log_lottery(MomentInfo(1.0, 1.0))}) {
        const auto back = io::lottery_from_json(json::parse(io::to_json(l).dump()));
        EXPECT_EQ(back.kind(), l.kind());
        EXPECT_EQ(back.low(), l.low());
        EXPECT_EQ(back.high(), l.high());
    }
    EXPECT_THROW(io::lottery_from_json(json::parse(R"({"kind":"auction"})")), io::ParseError);
    EXPECT_THROW(io::lottery_from_json(json::parse(R"({"kind":"deterministic"})")), io::ParseError);
    EXPECT_THROW(io::piecewise_from_json(json::parse(R"({"atoms":[[1]]})")), io::ParseError);
}
