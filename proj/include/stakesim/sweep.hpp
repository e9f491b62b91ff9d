#pragma once

// Two-axis parameter sweeps over either agent model. Each cell runs its own
// trajectories, reduces them in index order and is checkpointed in a JSON
// manifest, so a killed sweep resumes where it stopped.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stakesim/csv.hpp"
#include "stakesim/sim3.hpp"

namespace stakesim::harness {

enum class Model { Sim2, Sim3 };

struct Axis {
    std::string name;
    std::vector<double> values;
};

struct SweepSpec {
    Model model = Model::Sim2;
    Axis axis1{"lambda_borrow", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
    Axis axis2{"lambda_slash", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}};
    /// Base parameters; base.base carries seed and trajectory count.
    sim3::Sim3Config config;
    double burn_in = 0.1;  ///< leading fraction of sampled heights dropped

    void validate() const;
};

/// Sets a named parameter (lambda_borrow, lambda_slash, lambda_stake,
/// lambda_collateral, iota, k, lambda, r0, kappa, xi, phi_max, n, eta).
void apply_parameter(sim3::Sim3Config& config, const std::string& name, double value);

/// Per-metric mean and std for one trajectory after burn-in.
struct TrajectorySummary {
    std::vector<double> mean;
    std::vector<double> std;
};

/// Metric names emitted for a model, in column order.
std::vector<std::string> metric_names(Model model);

TrajectorySummary summarize(const TrajectoryRecord& record, Model model, double burn_in);

/// Runs one trajectory of the spec's model for a cell (or a plain run).
TrajectoryRecord run_model(Model model, const sim3::Sim3Config& config, std::uint64_t stream_seed);

/// Stream seed of trajectory t in cell (i, j).
std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t i, std::size_t j, std::uint64_t t);

struct SweepOptions {
    unsigned threads = 1;
    /// Directory holding manifest.json; no checkpointing when empty.
    std::optional<std::filesystem::path> manifest_dir;
    /// Called after each finished cell with (done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Rows in cell order (axis1 outer, axis2 inner), metrics in metric_names
/// order, stat mean then std.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Stable fingerprint of everything that influences sweep results.
std::string fingerprint(const SweepSpec& spec);

/// Runs `count` independent tasks on a bounded pool. Exceptions are rethrown
/// after all workers stop (the first one by task index).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace stakesim::harness
