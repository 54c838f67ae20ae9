#pragma once

/**
 * \file config.hpp
 * \brief Experiment configuration: JSON ingestion, profiles, dotted overrides, hashing.
 *
 * A configuration is a JSON object merged onto a named profile. Every key of the user file
 * must exist in the profile; values are checked for type and range and errors carry the
 * dotted key path. Power levels given in dBm are converted to watts.
 */

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "isapt/channel_model.hpp"
#include "isapt/eh_model.hpp"
#include "isapt/sca_optimizer.hpp"
#include "isapt/sensing_model.hpp"

namespace isapt {

enum class Scheme { proposed, baseline, both };

const char* to_string(Scheme scheme);

struct Fig3Case {
    double r_min = 0.0;
    double p_p = 0.0;
};

struct SweepAxis {
    std::string key;  ///< dotted config path, numeric leaf
    std::vector<double> values;
};

struct ExperimentConfig {
    ArrayGeometry geometry;
    SensingScenario scenario;
    EhCircuit circuit;
    std::vector<EhNodePlacement> nodes;
    double k_factor = 1.0;
    PowerBudget budget;
    int n_tau = 50;
    ScaSettings sca;

    int realizations = 100;
    std::uint64_t base_seed = 1;
    Scheme scheme = Scheme::both;
    std::string out_dir = "out";
    int parallel = 1;

    std::vector<double> fig2_p_avg;
    double fig3_p_avg = 0.5;
    std::vector<Fig3Case> fig3_cases;
    std::vector<double> fig3_r_hat_max;
    std::vector<SweepAxis> sweep_axes;

    /// The fully resolved JSON this config was built from.
    nlohmann::json resolved;
};

/// Names accepted by profile_json.
std::vector<std::string> profile_names();

/// Complete JSON for a named profile. \throws ConfigError for unknown names.
nlohmann::json profile_json(const std::string& profile);

/// Merges user onto the profile, checks keys and ranges, and builds the config.
/// \throws ConfigError naming the offending key path.
ExperimentConfig config_from_json(const nlohmann::json& user, const std::string& profile = "table1");

/// Reads a JSON file (an empty file counts as {}) and resolves it.
/// \throws ConfigError if the file cannot be read or parsed.
ExperimentConfig load_config(const std::string& path, const std::string& profile = "table1");

/// Reads a JSON file as a user object without resolving it.
nlohmann::json read_config_json(const std::string& path);

/// Sets a dotted key, e.g. "sensing.r_min_m=5". The value is parsed as JSON, falling back
/// to a plain string. \throws ConfigError on malformed assignments.
void apply_override(nlohmann::json& user, const std::string& assignment);

/// Sets a dotted key to a value.
void set_dotted(nlohmann::json& user, const std::string& key, const nlohmann::json& value);

/// FNV-1a 64 of the resolved JSON without the output directory and the parallelism degree,
/// as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

std::uint64_t fnv1a64(const std::string& bytes);

/// Problem instance for one channel realization.
IsaptInstance make_instance(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace isapt
