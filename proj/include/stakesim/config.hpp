#pragma once

#include <filesystem>
#include <iosfwd>

#include "stakesim/sweep.hpp"

namespace stakesim::harness {

/// Everything a CLI run needs. Sections of the INI file:
///   [monetary]   r0 lambda
///   [validators] n lambda_stake lambda_collateral lambda_borrow lambda_slash iota lambda_risk_dof
///   [curve]      kind (power_law|table) k table phi_max chain_rule (pseudocode|normalized|affine)
///   [sim]        h_max eta seed trajectories sample_stride components supply_includes_lent long_only
///   [sweep]      axis1 axis1_values axis2 axis2_values burn_in
///   [lending]    base_rate slope demand
///   [cir]        kappa xi dt v0
/// Tables are "u:phi" pairs separated by commas; lists are comma separated.
struct RunConfig {
    SweepSpec sweep;  ///< sweep.config holds the model parameters

    const sim3::Sim3Config& model() const { return sweep.config; }
    sim3::Sim3Config& model() { return sweep.config; }
};

/// Unknown sections or keys and malformed values throw ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace stakesim::harness
