#include "stakesim/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stakesim/errors.hpp"

namespace stakesim::harness {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"monetary", {"r0", "lambda"}},
        {"validators",
         {"n", "lambda_stake", "lambda_collateral", "lambda_borrow", "lambda_slash", "iota", "lambda_risk_dof"}},
        {"curve", {"kind", "k", "table", "phi_max", "chain_rule", "bound_mode"}},
        {"sim", {"h_max", "eta", "seed", "trajectories", "sample_stride", "components", "supply_includes_lent", "long_only"}},
        {"sweep", {"axis1", "axis1_values", "axis2", "axis2_values", "burn_in"}},
        {"lending", {"base_rate", "slope", "demand"}},
        {"cir", {"kappa", "xi", "dt", "v0"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        return parse_double(trim(v));
    } catch (const IoError&) {
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (!(d >= 0.0) || d != static_cast<double>(static_cast<std::uint64_t>(d)))
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "' is an empty list");
    return out;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    RunConfig rc;
    auto& c = rc.model();
    auto& b = c.base;
    std::string curve_kind = "power_law";
    double k = 1.0;
    std::string table;

    for (const auto& [section, body] : tree) {
        const auto sec = schema().find(section);
        if (sec == schema().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [key, node] : body) {
            if (!sec->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
            const std::string v = node.get_value<std::string>();
            const std::string name = section + "." + key;
            if (section == "monetary") {
                const double x = to_double(name, v);
                b.monetary = key == "r0" ? core::MonetaryPolicy(x, b.monetary.lambda())
                                         : core::MonetaryPolicy(b.monetary.r0(), x);
            } else if (section == "validators") {
                if (key == "n") b.n = to_uint(name, v);
                else if (key == "lambda_stake") b.lambda_stake = to_double(name, v);
                else if (key == "lambda_collateral") b.lambda_collateral = to_double(name, v);
                else if (key == "lambda_borrow") b.lambda_borrow = to_double(name, v);
                else if (key == "lambda_slash") b.lambda_slash = to_double(name, v);
                else if (key == "iota") b.iota = to_double(name, v);
                else c.lambda_risk_dof = to_double(name, v);
            } else if (section == "curve") {
                if (key == "kind") curve_kind = trim(v);
                else if (key == "k") k = to_double(name, v);
                else if (key == "table") table = v;
                else if (key == "phi_max") b.phi_max = to_double(name, v);
                else if (key == "bound_mode") {
                    const std::string t = trim(v);
                    if (t == "clamp") b.bound_mode = core::BoundMode::Clamp;
                    else if (t == "floor") b.bound_mode = core::BoundMode::Floor;
                    else throw ConfigError("unknown bound_mode '" + t + "'");
                } else {
                    const std::string t = trim(v);
                    if (t == "pseudocode") c.chain_rule = portfolio::ChainRule::Pseudocode;
                    else if (t == "normalized") c.chain_rule = portfolio::ChainRule::Normalized;
                    else if (t == "affine") c.chain_rule = portfolio::ChainRule::Affine;
                    else throw ConfigError("unknown chain_rule '" + t + "'");
                }
            } else if (section == "sim") {
                if (key == "h_max") b.h_max = to_uint(name, v);
                else if (key == "eta") b.eta = to_uint(name, v);
                else if (key == "seed") b.seed = to_uint(name, v);
                else if (key == "trajectories") b.trajectories = to_uint(name, v);
                else if (key == "sample_stride") b.sample_stride = to_uint(name, v);
                else if (key == "components") c.components = static_cast<int>(to_uint(name, v));
                else if (key == "supply_includes_lent") c.supply_includes_lent = to_bool(name, v);
                else c.long_only = to_bool(name, v);
            } else if (section == "sweep") {
                if (key == "axis1") rc.sweep.axis1.name = trim(v);
                else if (key == "axis2") rc.sweep.axis2.name = trim(v);
                else if (key == "axis1_values") rc.sweep.axis1.values = to_list(name, v);
                else if (key == "axis2_values") rc.sweep.axis2.values = to_list(name, v);
                else rc.sweep.burn_in = to_double(name, v);
            } else if (section == "lending") {
                if (key == "base_rate") c.lending_base_rate = to_double(name, v);
                else if (key == "slope") c.lending_slope = to_double(name, v);
                else c.lending_demand = to_double(name, v);
            } else {
                const double x = to_double(name, v);
                if (key == "kappa") c.cir.kappa = x;
                else if (key == "xi") c.cir.xi = x;
                else if (key == "dt") c.cir.dt = x;
                else c.cir.v0 = x;
            }
        }
    }

    try {
        if (curve_kind == "power_law") {
            b.curve = core::PricingCurve::power_law(k);
        } else if (curve_kind == "table") {
            core::TableDriven t;
            for (const auto& pair : split(table, ',')) {
                const auto parts = split(pair, ':');
                if (parts.size() != 2) throw ConfigError("table entry '" + pair + "' is not u:phi");
                t.knots.emplace_back(to_double("curve.table", parts[0]), to_double("curve.table", parts[1]));
            }
            b.curve = core::PricingCurve(std::move(t));
        } else {
            throw ConfigError("unknown curve kind '" + curve_kind + "'");
        }
        rc.sweep.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_config(in);
}

}  // namespace stakesim::harness
