#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace robust_pricing;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << text;
    out.close();
    if (!out) throw std::runtime_error("error writing '" + out_path + "'");
}

std::uint64_t default_seed() {
    const char* env = std::getenv("ROBUST_PRICING_SEED");
    if (env == nullptr || *env == '\0') return 0;
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
    } catch (const std::logic_error&) {
    }
    throw cli::UsageError(std::string("ROBUST_PRICING_SEED must be a non-negative integer, got '") + env + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment-robust pricing: ratios, mechanisms, adversaries and auction simulation"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_path;
    app.add_option("--out", out_path, "Write output here instead of stdout");

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    // curve
    cli::CurveSpec curve;
    auto* c_curve = app.add_subcommand("curve", "Ratio curves as CSV or JSON");
    c_curve->add_option("which", curve.which, "rho_d | rho | lower | azar_micali | lambda_ratio | cutoff")->required();
    auto* r_min = c_curve->add_option("--r-min", curve.x_min, "Grid start (lambda for lambda_ratio/cutoff)");
    auto* r_max = c_curve->add_option("--r-max", curve.x_max, "Grid end");
    c_curve->add_option("--step", curve.step, "Grid step");
    c_curve->add_option("--format", curve.format, "csv | json");

    // price / lottery
    double mu = 1.0;
    double sigma = 1.0;
    auto* c_price = app.add_subcommand("price", "Robust deterministic price");
    c_price->add_option("--mu", mu)->required();
    c_price->add_option("--sigma", sigma)->required();
    auto* c_lottery = app.add_subcommand("lottery", "Robust log-lottery");
    c_lottery->add_option("--mu", mu)->required();
    c_lottery->add_option("--sigma", sigma)->required();

    // eval
    cli::EvalOptions ev;
    std::string ev_mech_file;
    std::string ev_dist_file;
    std::string ev_dist;
    std::uint64_t ev_mc = 0;
    auto* c_eval = app.add_subcommand("eval", "Revenue of a mechanism on a distribution");
    c_eval->add_option("--mechanism", ev.mechanism,
                       "robust-price | lottery | quarter | mean | price | separate | bundle");
    c_eval->add_option("--mechanism-json", ev_mech_file, "PriceLottery JSON file");
    c_eval->add_option("--p", ev.price, "Price for --mechanism price");
    c_eval->add_option("--mu", ev.mu);
    c_eval->add_option("--sigma", ev.sigma);
    c_eval->add_option("--dist", ev_dist, "yao | two-point(x) | rare(eps) | multi(r1,...,rm,delta)");
    c_eval->add_option("--dist-json", ev_dist_file, "PiecewiseDistribution JSON file");
    auto* exact = c_eval->add_flag("--exact", "Exact evaluation (default)");
    c_eval->add_option("--mc", ev_mc, "Monte Carlo with this many samples")->excludes(exact);
    c_eval->add_option("--seed", seed);

    // certify
    cli::CertifyOptions cert;
    auto* c_certify = app.add_subcommand("certify", "Worst-case ratio certificates");
    c_certify->add_option("kind", cert.kind, "yao | det | grid | multi")->required();
    c_certify->add_option("--mu", cert.mu);
    c_certify->add_option("--sigma", cert.sigma);
    c_certify->add_option("--p", cert.price);
    c_certify->add_option("--gap", cert.gap);
    c_certify->add_option("--mechanism", cert.mechanism);
    c_certify->add_option("--grid", cert.grid);
    c_certify->add_option("--families", cert.families, "Comma list of two-point, rare, yao");
    c_certify->add_option("--r", cert.r_values, "Coefficients of variation for multi (largest first)")->delimiter(',');
    c_certify->add_option("--delta", cert.delta);
    c_certify->add_option("--mc", cert.mc_samples, "Samples for bundle revenue");
    c_certify->add_option("--seed", seed);

    // simulate
    std::string env_file;
    std::uint64_t rounds = 1'000'000;
    auto* c_sim = app.add_subcommand("simulate", "Lazy VCG with log-lottery reserves vs the optimal auction");
    c_sim->add_option("environment", env_file, "Environment JSON file")->required();
    c_sim->add_option("--rounds", rounds);
    c_sim->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        std::string text;
        if (c_curve->parsed()) {
            if (curve.over_lambda()) {
                if (r_min->count() == 0) curve.x_min = curve.step;
                if (r_max->count() == 0) curve.x_max = 1.0;
            }
            text = cli::cmd_curve(curve);
        } else if (c_price->parsed()) {
            text = cli::cmd_price(mu, sigma);
        } else if (c_lottery->parsed()) {
            text = cli::cmd_lottery(mu, sigma);
        } else if (c_eval->parsed()) {
            if (!ev_mech_file.empty()) ev.mechanism_json = read_file(ev_mech_file);
            if (!ev_dist.empty()) ev.dist = ev_dist;
            if (!ev_dist_file.empty()) {
                ev.dist_json = read_file(ev_dist_file);
                ev.dist_source = ev_dist_file;
            }
            if (c_eval->get_option("--mc")->count() > 0) ev.mc_samples = ev_mc;
            ev.seed = seed;
            text = cli::cmd_eval(ev);
        } else if (c_certify->parsed()) {
            cert.seed = seed;
            text = cli::cmd_certify(cert);
        } else if (c_sim->parsed()) {
            text = cli::cmd_simulate(read_file(env_file), rounds, seed, env_file);
        }
        emit(text, out_path);
    } catch (const cli::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
