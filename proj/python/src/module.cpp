#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stakesim/analytic.hpp"
#include "stakesim/config.hpp"
#include "stakesim/errors.hpp"
#include "stakesim/markowitz.hpp"
#include "stakesim/metrics.hpp"
#include "stakesim/monetary.hpp"
#include "stakesim/portfolio.hpp"
#include "stakesim/pricing.hpp"
#include "stakesim/sim2.hpp"
#include "stakesim/sim3.hpp"
#include "stakesim/sweep.hpp"
#include "stakesim/urn.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace stakesim;

namespace {

py::dict record_to_dict(const harness::TrajectoryRecord& rec) {
    std::vector<std::uint64_t> h;
    std::vector<double> g, nr, sr, fd;
    std::vector<std::size_t> alive;
    std::vector<double> ws, wd, wl;
    for (const auto& p : rec) {
        h.push_back(p.h);
        g.push_back(p.gini);
        nr.push_back(p.norm_ratio);
        sr.push_back(p.supply_ratio);
        fd.push_back(p.frac_defaulted);
        alive.push_back(p.alive);
        if (p.weights) {
            ws.push_back((*p.weights)[0]);
            wd.push_back((*p.weights)[1]);
            wl.push_back((*p.weights)[2]);
        }
    }
    py::dict d("h"_a = h, "gini"_a = g, "norm_ratio"_a = nr, "supply_ratio"_a = sr,
               "frac_defaulted"_a = fd, "alive"_a = alive);
    if (!ws.empty()) {
        d["w_s"] = ws;
        d["w_d"] = wd;
        d["w_l"] = wl;
    }
    return d;
}

std::string chain_rule_name(portfolio::ChainRule r) {
    switch (r) {
        case portfolio::ChainRule::Pseudocode: return "pseudocode";
        case portfolio::ChainRule::Normalized: return "normalized";
        case portfolio::ChainRule::Affine: return "affine";
    }
    return "";
}

portfolio::ChainRule chain_rule_from(const std::string& s) {
    if (s == "pseudocode") return portfolio::ChainRule::Pseudocode;
    if (s == "normalized") return portfolio::ChainRule::Normalized;
    if (s == "affine") return portfolio::ChainRule::Affine;
    throw ConfigError("unknown chain_rule '" + s + "'");
}

harness::Model model_from(const std::string& s) {
    if (s == "sim2") return harness::Model::Sim2;
    if (s == "sim3") return harness::Model::Sim3;
    throw ConfigError("unknown model '" + s + "'");
}

harness::RunConfig config_from_ini(const std::string& text) {
    std::istringstream in(text);
    return harness::parse_config(in);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stake-backed lending simulator core";

    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    // pricing and issuance
    m.def("eval_mother", [](double k, double u) { return core::eval_mother(core::PricingCurve::power_law(k), u); },
          "k"_a, "u"_a);
    m.def("mother_derivative",
          [](double k, double u) { return core::mother_derivative(core::PricingCurve::power_law(k), u); }, "k"_a,
          "u"_a);
    m.def("calibrate_affine", [](double c, double stake_at_issue) {
        const auto ab = core::calibrate_affine(c, stake_at_issue);
        return py::make_tuple(ab.a, ab.b);
    }, "c"_a, "stake_at_issue"_a);
    m.def("validator_price", [](double c, double stake_at_issue, double stake, double k) {
        return core::validator_price(core::ValidatorPricing(c, stake_at_issue), core::PricingCurve::power_law(k), stake);
    }, "c"_a, "stake_at_issue"_a, "stake"_a, "k"_a = 1.0,
          "Price of a derivative issued at stake_at_issue with collateral c; inf marks default.");
    m.def("aggregate",
          [](const std::vector<double>& prices, const std::string& rule, double phi_max, const std::string& bound) {
              if (rule == "median") return core::aggregate_prices(core::Median{}, prices);
              if (rule != "mean") throw ConfigError("unknown aggregation rule '" + rule + "'");
              if (bound != "clamp" && bound != "floor") throw ConfigError("unknown bound_mode '" + bound + "'");
              return core::aggregate_prices(
                  core::BoundedMean{phi_max, bound == "clamp" ? core::BoundMode::Clamp : core::BoundMode::Floor},
                  prices);
          },
          "prices"_a, "rule"_a = "mean", "phi_max"_a = 1e6, "bound_mode"_a = "clamp");
    m.def("block_reward", [](double r0, double lambda, std::uint64_t h) {
        return core::MonetaryPolicy(r0, lambda).block_reward(h);
    }, "r0"_a, "lambda_"_a, "h"_a);
    m.def("max_supply", [](double r0, double lambda, std::uint64_t h) {
        return core::MonetaryPolicy(r0, lambda).max_supply(h);
    }, "r0"_a, "lambda_"_a, "h"_a);

    // slashing urn
    m.def("ruin_probability", &urn::ruin_probability, "p"_a);
    m.def("terminal_beta", &urn::terminal_beta, "p"_a);
    m.def("terminal_mean", &urn::terminal_mean, "p"_a);
    m.def("terminal_second_moment", &urn::terminal_second_moment, "p"_a);
    m.def("dispersion_aleph", py::overload_cast<double, double, double>(&urn::dispersion_aleph), "p"_a, "gamma"_a,
          "beta"_a);
    m.def("simulate_ruin", [](double p, std::uint64_t trials, std::uint64_t seed) {
        const auto r = urn::simulate_ruin(p, trials, seed);
        return py::make_tuple(r.ruined, r.trials);
    }, "p"_a, "trials"_a, "seed"_a = 0, "Returns (ruined, trials).");

    // metrics
    m.def("gini", [](const std::vector<double>& x) { return harness::gini(x); }, "x"_a);
    m.def("norm_ratio", [](const std::vector<double>& x) { return harness::norm_ratio(x); }, "x"_a);

    // portfolio
    m.def("solve_markowitz",
          [](const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double lambda_risk, bool long_only) {
              portfolio::MarkowitzOptions o;
              o.long_only = long_only;
              const auto r = portfolio::solve_markowitz(mu, sigma, lambda_risk, o);
              return py::dict("w"_a = r.w, "multiplier"_a = r.multiplier, "regularized"_a = r.regularized,
                              "condition"_a = r.condition);
          },
          "mu"_a, "sigma"_a, "lambda_risk"_a, "long_only"_a = false);
    m.def("lending_weight_closed_form",
          [](double mu_s, double mu_d, double mu_l, double sigma_s2, double sigma_l2, double D, double lambda_risk) {
              portfolio::ReturnsModel r;
              r.mu_s = mu_s;
              r.mu_d = mu_d;
              r.mu_l = mu_l;
              r.sigma_s2 = sigma_s2;
              r.sigma_l2 = sigma_l2;
              r.D = D;
              r.lambda_risk = lambda_risk;
              return portfolio::lending_weight_closed_form(r);
          },
          "mu_s"_a, "mu_d"_a, "mu_l"_a, "sigma_s2"_a, "sigma_l2"_a, "D"_a, "lambda_risk"_a);
    m.def("duration", [](double k, double u, double chain_factor) {
        return portfolio::duration(core::PricingCurve::power_law(k), u, chain_factor);
    }, "k"_a, "u"_a, "chain_factor"_a = 1.0);
    m.def("convexity", [](double k, double u, double chain_factor) {
        return portfolio::convexity(core::PricingCurve::power_law(k), u, chain_factor);
    }, "k"_a, "u"_a, "chain_factor"_a = 1.0);
    m.def("safe_borrow_limit", &portfolio::safe_borrow_limit, "k"_a, "sigma_s2"_a);
    m.def("borrow_rate", [](double base_rate, double slope, double supplied, double demanded) {
        return portfolio::compute_borrow_rate({base_rate, slope, supplied, demanded});
    }, "base_rate"_a, "slope"_a, "supplied"_a, "demanded"_a);

    // configuration and runs
    py::class_<harness::RunConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_ini", &config_from_ini, "text"_a)
        .def_static("from_file", &harness::load_config, "path"_a)
        .def("set", [](harness::RunConfig& c, const std::string& name, double v) {
            harness::apply_parameter(c.model(), name, v);
        }, "name"_a, "value"_a)
        .def("validate", [](const harness::RunConfig& c) { c.sweep.validate(); })
        .def_property("model",
                      [](const harness::RunConfig& c) { return c.sweep.model == harness::Model::Sim2 ? "sim2" : "sim3"; },
                      [](harness::RunConfig& c, const std::string& s) { c.sweep.model = model_from(s); })
        .def_property("seed", [](const harness::RunConfig& c) { return c.model().base.seed; },
                      [](harness::RunConfig& c, std::uint64_t v) { c.model().base.seed = v; })
        .def_property("trajectories", [](const harness::RunConfig& c) { return c.model().base.trajectories; },
                      [](harness::RunConfig& c, std::uint64_t v) { c.model().base.trajectories = v; })
        .def_property("h_max", [](const harness::RunConfig& c) { return c.model().base.h_max; },
                      [](harness::RunConfig& c, std::uint64_t v) { c.model().base.h_max = v; })
        .def_property("sample_stride", [](const harness::RunConfig& c) { return c.model().base.sample_stride; },
                      [](harness::RunConfig& c, std::uint64_t v) { c.model().base.sample_stride = v; })
        .def_property("components", [](const harness::RunConfig& c) { return c.model().components; },
                      [](harness::RunConfig& c, int v) { c.model().components = v; })
        .def_property("chain_rule", [](const harness::RunConfig& c) { return chain_rule_name(c.model().chain_rule); },
                      [](harness::RunConfig& c, const std::string& s) { c.model().chain_rule = chain_rule_from(s); })
        .def_property("bound_mode",
                      [](const harness::RunConfig& c) {
                          return c.model().base.bound_mode == core::BoundMode::Clamp ? "clamp" : "floor";
                      },
                      [](harness::RunConfig& c, const std::string& s) {
                          if (s == "clamp") c.model().base.bound_mode = core::BoundMode::Clamp;
                          else if (s == "floor") c.model().base.bound_mode = core::BoundMode::Floor;
                          else throw ConfigError("unknown bound_mode '" + s + "'");
                      })
        .def_property("burn_in", [](const harness::RunConfig& c) { return c.sweep.burn_in; },
                      [](harness::RunConfig& c, double v) { c.sweep.burn_in = v; })
        .def_property("axis1",
                      [](const harness::RunConfig& c) { return py::make_tuple(c.sweep.axis1.name, c.sweep.axis1.values); },
                      [](harness::RunConfig& c, std::pair<std::string, std::vector<double>> a) {
                          c.sweep.axis1 = {a.first, a.second};
                      })
        .def_property("axis2",
                      [](const harness::RunConfig& c) { return py::make_tuple(c.sweep.axis2.name, c.sweep.axis2.values); },
                      [](harness::RunConfig& c, std::pair<std::string, std::vector<double>> a) {
                          c.sweep.axis2 = {a.first, a.second};
                      });

    m.def("run_trajectory2", [](const harness::RunConfig& c, std::uint64_t stream_seed) {
        harness::TrajectoryRecord rec;
        {
            py::gil_scoped_release nogil;
            rec = sim2::run_trajectory2(c.model().base, stream_seed);
        }
        return record_to_dict(rec);
    }, "config"_a, "stream_seed"_a);
    m.def("run_trajectory3", [](const harness::RunConfig& c, std::uint64_t stream_seed) {
        harness::TrajectoryRecord rec;
        {
            py::gil_scoped_release nogil;
            rec = sim3::run_trajectory3(c.model(), stream_seed);
        }
        return record_to_dict(rec);
    }, "config"_a, "stream_seed"_a);

    m.def("run_sweep", [](const harness::RunConfig& c, unsigned threads, std::optional<std::filesystem::path> dir) {
        harness::SweepOptions o;
        o.threads = threads;
        o.manifest_dir = dir;
        std::vector<harness::SweepRow> rows;
        {
            py::gil_scoped_release nogil;
            rows = harness::run_sweep(c.sweep, o);
        }
        py::list out;
        for (const auto& r : rows)
            out.append(py::dict("axis1_name"_a = r.axis1_name, "axis1_value"_a = r.axis1_value,
                                "axis2_name"_a = r.axis2_name, "axis2_value"_a = r.axis2_value, "metric"_a = r.metric,
                                "stat"_a = r.stat, "value"_a = r.value));
        return out;
    }, "config"_a, "threads"_a = 1, "manifest_dir"_a = py::none());

    m.def("analytic_report", [](std::vector<double> p, std::vector<double> k, std::vector<double> sigma_s2) {
        harness::AnalyticGrid g;
        if (!p.empty()) g.p = std::move(p);
        if (!k.empty()) g.k = std::move(k);
        if (!sigma_s2.empty()) g.sigma_s2 = std::move(sigma_s2);
        py::list out;
        for (const auto& r : harness::analytic_report(g))
            out.append(py::dict("p"_a = r.p, "gamma"_a = r.gamma, "beta"_a = r.beta, "aleph"_a = r.aleph, "k"_a = r.k,
                                "sigma_s2"_a = r.sigma_s2, "s_star"_a = r.s_star));
        return out;
    }, "p"_a = std::vector<double>{}, "k"_a = std::vector<double>{}, "sigma_s2"_a = std::vector<double>{});
}
