#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "stakesim/analytic.hpp"
#include "stakesim/config.hpp"
#include "stakesim/errors.hpp"
#include "stakesim/sweep.hpp"

namespace fs = std::filesystem;
using namespace stakesim;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<std::uint64_t> trajectories;
    std::optional<std::uint64_t> h_max;
    unsigned threads = 1;
    bool full_scale = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI configuration file");
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--trajectories", c.trajectories, "trajectories per run or cell");
    sub->add_option("--h-max", c.h_max, "blocks per trajectory");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--full-scale", c.full_scale, "h_max = 200000 and 100 trajectories");
}

harness::RunConfig resolve(const Common& c) {
    harness::RunConfig rc = c.config.empty() ? harness::RunConfig{} : harness::load_config(c.config);
    auto& b = rc.model().base;
    if (c.full_scale) {
        b.h_max = 200000;
        b.trajectories = 100;
    }
    if (c.seed) b.seed = *c.seed;
    if (c.trajectories) b.trajectories = *c.trajectories;
    if (c.h_max) b.h_max = *c.h_max;
    try {
        rc.model().validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) { harness::write_file_atomic(path, text); }

int run_single(const Common& c, harness::Model model) {
    const auto rc = resolve(c);
    const auto dir = prepare_out(c.out);
    const auto& b = rc.model().base;
    const char* prefix = model == harness::Model::Sim2 ? "sim2" : "sim3";
    harness::parallel_for(b.trajectories, c.threads, [&](std::size_t t) {
        const auto record = harness::run_model(model, rc.model(), hash64(b.seed, 0, 0, t));
        std::ostringstream csv;
        harness::write_trajectory_csv(csv, record);
        char name[64];
        std::snprintf(name, sizeof name, "%s_traj_%04zu.csv", prefix, t);
        write_text(dir / name, csv.str());
    });
    std::cerr << prefix << ": wrote " << b.trajectories << " trajectories to " << dir.string() << "\n";
    return 0;
}

int run_sweep_cmd(const Common& c, harness::Model model) {
    auto rc = resolve(c);
    auto& spec = rc.sweep;
    spec.model = model;
    if (model == harness::Model::Sim3 && c.config.empty()) {
        spec.axis1 = {"k", {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}};
        spec.axis2 = {"lambda_slash", {0.05, 0.1, 0.2, 0.4, 0.8}};
    }
    try {
        spec.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    const auto dir = prepare_out(c.out);
    harness::SweepOptions opts;
    opts.threads = c.threads;
    opts.manifest_dir = dir;
    std::mutex mu;
    opts.progress = [&](std::size_t done, std::size_t total) {
        std::lock_guard<std::mutex> lock(mu);
        std::cerr << "\rcells " << done << "/" << total << std::flush;
    };
    const auto rows = harness::run_sweep(spec, opts);
    std::cerr << "\n";
    std::ostringstream csv;
    harness::write_sweep_csv(csv, rows);
    write_text(dir / "sweep.csv", csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"staking derivative risk simulations"};
    app.require_subcommand(1);

    Common common;
    harness::AnalyticGrid grid;
    std::string analytic_out = "out";

    auto* analytic = app.add_subcommand("analytic", "closed-form ruin, terminal law and safe borrow limit table");
    analytic->add_option("--p", grid.p, "slash probabilities")->delimiter(',');
    analytic->add_option("--k", grid.k, "curve exponents")->delimiter(',');
    analytic->add_option("--sigma2", grid.sigma_s2, "staking variances")->delimiter(',');
    analytic->add_option("--out", analytic_out, "output directory");

    auto* sim2 = app.add_subcommand("sim2", "two-asset trajectories");
    auto* sim3 = app.add_subcommand("sim3", "three-asset trajectories");
    auto* sweep2 = app.add_subcommand("sweep2", "two-asset parameter sweep");
    auto* sweep3 = app.add_subcommand("sweep3", "three-asset parameter sweep");
    for (auto* s : {sim2, sim3, sweep2, sweep3}) add_common(s, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*analytic) {
            const auto dir = prepare_out(analytic_out);
            std::ostringstream csv;
            harness::write_analytic_csv(csv, harness::analytic_report(grid));
            write_text(dir / "analytic.csv", csv.str());
            return 0;
        }
        if (*sim2) return run_single(common, harness::Model::Sim2);
        if (*sim3) return run_single(common, harness::Model::Sim3);
        if (*sweep2) return run_sweep_cmd(common, harness::Model::Sim2);
        return run_sweep_cmd(common, harness::Model::Sim3);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
