#include "stakesim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stakesim/errors.hpp"

namespace stakesim::harness {

void SweepSpec::validate() const {
    config.validate();
    for (const Axis* a : {&axis1, &axis2}) {
        if (a->values.empty()) throw ConfigError("sweep axis '" + a->name + "' has no values");
        for (std::size_t i = 1; i < a->values.size(); ++i)
            if (!(a->values[i] > a->values[i - 1]))
                throw ConfigError("sweep axis '" + a->name + "' must be strictly increasing");
        sim3::Sim3Config probe = config;
        apply_parameter(probe, a->name, a->values.front());
    }
    if (axis1.name == axis2.name) throw ConfigError("sweep axes must name different parameters");
    if (!(burn_in >= 0.0 && burn_in < 1.0)) throw ConfigError("burn_in must lie in [0, 1)");
}

void apply_parameter(sim3::Sim3Config& c, const std::string& name, double v) {
    auto& b = c.base;
    if (name == "lambda_borrow") b.lambda_borrow = v;
    else if (name == "lambda_slash") b.lambda_slash = v;
    else if (name == "lambda_stake") b.lambda_stake = v;
    else if (name == "lambda_collateral") b.lambda_collateral = v;
    else if (name == "iota") b.iota = v;
    else if (name == "k") b.curve = core::PricingCurve::power_law(v);
    else if (name == "lambda") b.monetary = core::MonetaryPolicy(b.monetary.r0(), v);
    else if (name == "r0") b.monetary = core::MonetaryPolicy(v, b.monetary.lambda());
    else if (name == "phi_max") b.phi_max = v;
    else if (name == "n") b.n = static_cast<std::size_t>(v);
    else if (name == "eta") b.eta = static_cast<std::uint64_t>(v);
    else if (name == "kappa") c.cir.kappa = v;
    else if (name == "xi") c.cir.xi = v;
    else throw ConfigError("unknown sweep parameter '" + name + "'");
}

std::vector<std::string> metric_names(Model model) {
    std::vector<std::string> names{"gini", "norm_ratio", "supply_ratio", "frac_defaulted"};
    if (model == Model::Sim3) names.insert(names.end(), {"w_s", "w_d", "w_l"});
    return names;
}

TrajectorySummary summarize(const TrajectoryRecord& record, Model model, double burn_in) {
    const std::size_t m = metric_names(model).size();
    TrajectorySummary s{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    if (record.empty()) return s;
    std::size_t skip = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(record.size())));
    skip = std::min(skip, record.size() - 1);
    const double count = static_cast<double>(record.size() - skip);

    auto value = [](const MetricPoint& p, std::size_t j) {
        switch (j) {
            case 0: return p.gini;
            case 1: return p.norm_ratio;
            case 2: return p.supply_ratio;
            case 3: return p.frac_defaulted;
            default: return p.weights ? (*p.weights)[j - 4] : 0.0;
        }
    };
    for (std::size_t j = 0; j < m; ++j) {
        double sum = 0.0;
        for (std::size_t r = skip; r < record.size(); ++r) sum += value(record[r], j);
        const double mean = sum / count;
        double ss = 0.0;
        for (std::size_t r = skip; r < record.size(); ++r) {
            const double d = value(record[r], j) - mean;
            ss += d * d;
        }
        s.mean[j] = mean;
        s.std[j] = std::sqrt(ss / count);
    }
    return s;
}

TrajectoryRecord run_model(Model model, const sim3::Sim3Config& config, std::uint64_t stream_seed) {
    if (model == Model::Sim2) return sim2::run_trajectory2(config.base, stream_seed);
    return sim3::run_trajectory3(config, stream_seed);
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t i, std::size_t j, std::uint64_t t) {
    return hash64(master_seed, i, j, t);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
    const unsigned workers = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(std::max(1u, threads), count)));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
                failed.store(true);
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

namespace {

std::string describe(const SweepSpec& spec) {
    const auto& c = spec.config;
    const auto& b = c.base;
    std::ostringstream o;
    o << "model=" << (spec.model == Model::Sim2 ? "sim2" : "sim3");
    for (const Axis* a : {&spec.axis1, &spec.axis2}) {
        o << ";axis=" << a->name << ':';
        for (double v : a->values) o << format_double(v) << ' ';
    }
    o << ";burn_in=" << format_double(spec.burn_in) << ";n=" << b.n << ";h_max=" << b.h_max << ";eta=" << b.eta
      << ";lambda_stake=" << format_double(b.lambda_stake) << ";lambda_collateral=" << format_double(b.lambda_collateral)
      << ";lambda_borrow=" << format_double(b.lambda_borrow) << ";lambda_slash=" << format_double(b.lambda_slash)
      << ";iota=" << format_double(b.iota) << ";r0=" << format_double(b.monetary.r0())
      << ";lambda=" << format_double(b.monetary.lambda()) << ";phi_max=" << format_double(b.phi_max)
      << ";seed=" << b.seed << ";trajectories=" << b.trajectories << ";stride=" << b.sample_stride << ";curve=";
    if (b.curve.is_power_law()) {
        o << "k:" << format_double(b.curve.exponent());
    } else {
        for (const auto& [u, phi] : std::get<core::TableDriven>(b.curve.kind()).knots)
            o << format_double(u) << ':' << format_double(phi) << ' ';
    }
    if (spec.model == Model::Sim3) {
        o << ";cir=" << format_double(c.cir.kappa) << ',' << format_double(c.cir.xi) << ',' << format_double(c.cir.dt)
          << ',' << format_double(c.cir.v0) << ";lending=" << format_double(c.lending_base_rate) << ','
          << format_double(c.lending_slope) << ',' << format_double(c.lending_demand)
          << ";dof=" << format_double(c.lambda_risk_dof) << ";chain=" << static_cast<int>(c.chain_rule)
          << ";components=" << c.components << ";supply_lent=" << c.supply_includes_lent
          << ";long_only=" << c.long_only;
    }
    return o.str();
}

std::string cell_key(std::size_t i, std::size_t j) { return std::to_string(i) + "," + std::to_string(j); }

using CellRows = std::vector<SweepRow>;

std::map<std::string, CellRows> load_manifest(const std::filesystem::path& path, const std::string& fp) {
    std::map<std::string, CellRows> done;
    std::ifstream in(path);
    if (!in) return done;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
    }
    if (j.value("fingerprint", std::string()) != fp)
        throw ConfigError("manifest " + path.string() + " belongs to a different sweep; use another --out");
    for (const auto& [key, rows] : j.at("cells").items()) {
        CellRows cell;
        for (const auto& r : rows)
            cell.push_back({r.at(0).get<std::string>(), parse_double(r.at(1).get<std::string>()),
                            r.at(2).get<std::string>(), parse_double(r.at(3).get<std::string>()),
                            r.at(4).get<std::string>(), r.at(5).get<std::string>(),
                            parse_double(r.at(6).get<std::string>())});
        done.emplace(key, std::move(cell));
    }
    return done;
}

void save_manifest(const std::filesystem::path& path, const std::string& fp, const std::map<std::string, CellRows>& done) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& [key, rows] : done) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows)
            arr.push_back({r.axis1_name, format_double(r.axis1_value), r.axis2_name, format_double(r.axis2_value),
                           r.metric, r.stat, format_double(r.value)});
        cells[key] = std::move(arr);
    }
    nlohmann::json j{{"fingerprint", fp}, {"cells", std::move(cells)}};
    write_file_atomic(path, j.dump(1) + "\n");
}

}  // namespace

std::string fingerprint(const SweepSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : describe(spec)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& options) {
    spec.validate();
    const std::size_t n1 = spec.axis1.values.size(), n2 = spec.axis2.values.size();
    const std::size_t cells = n1 * n2;
    const std::uint64_t trajectories = spec.config.base.trajectories;
    const std::uint64_t master = spec.config.base.seed;
    const auto names = metric_names(spec.model);
    const std::string fp = fingerprint(spec);

    std::filesystem::path manifest_path;
    std::map<std::string, CellRows> done;
    if (options.manifest_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*options.manifest_dir, ec);
        if (ec) throw IoError("cannot create " + options.manifest_dir->string() + ": " + ec.message());
        manifest_path = *options.manifest_dir / "manifest.json";
        done = load_manifest(manifest_path, fp);
    }

    std::vector<sim3::Sim3Config> configs(cells, spec.config);
    std::vector<std::size_t> pending;
    for (std::size_t c = 0; c < cells; ++c) {
        apply_parameter(configs[c], spec.axis1.name, spec.axis1.values[c / n2]);
        apply_parameter(configs[c], spec.axis2.name, spec.axis2.values[c % n2]);
        configs[c].validate();
        if (!done.count(cell_key(c / n2, c % n2))) pending.push_back(c);
    }

    std::vector<std::vector<TrajectorySummary>> summaries(cells);
    std::vector<std::atomic<std::uint64_t>> remaining(cells);
    for (std::size_t c : pending) {
        summaries[c].resize(trajectories);
        remaining[c].store(trajectories);
    }
    std::mutex mu;
    std::size_t finished = cells - pending.size();

    auto reduce = [&](std::size_t c) {
        const std::size_t i = c / n2, j = c % n2;
        CellRows rows;
        for (std::size_t m = 0; m < names.size(); ++m) {
            double mean = 0.0, sd = 0.0;
            for (const auto& s : summaries[c]) {
                mean += s.mean[m];
                sd += s.std[m];
            }
            mean /= static_cast<double>(trajectories);
            sd /= static_cast<double>(trajectories);
            for (auto [stat, v] : {std::pair<const char*, double>{"mean", mean}, {"std", sd}})
                rows.push_back({spec.axis1.name, spec.axis1.values[i], spec.axis2.name, spec.axis2.values[j], names[m], stat, v});
        }
        std::lock_guard<std::mutex> lock(mu);
        done[cell_key(i, j)] = std::move(rows);
        ++finished;
        if (options.manifest_dir) {
            try {
                save_manifest(manifest_path, fp, done);
            } catch (const IoError& e) {
                throw IoError(std::string(e.what()) + " (cell " + cell_key(i, j) + ")");
            }
        }
        if (options.progress) options.progress(finished, cells);
    };

    parallel_for(pending.size() * trajectories, options.threads, [&](std::size_t task) {
        const std::size_t c = pending[task / trajectories];
        const std::uint64_t t = task % trajectories;
        const auto record = run_model(spec.model, configs[c], cell_seed(master, c / n2, c % n2, t));
        summaries[c][t] = summarize(record, spec.model, spec.burn_in);
        if (remaining[c].fetch_sub(1) == 1) reduce(c);
    });

    std::vector<SweepRow> out;
    out.reserve(cells * names.size() * 2);
    for (std::size_t c = 0; c < cells; ++c) {
        const auto& rows = done.at(cell_key(c / n2, c % n2));
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

}  // namespace stakesim::harness
