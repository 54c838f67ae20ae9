#include "isapt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "isapt/errors.hpp"

namespace isapt {

using nlohmann::json;

namespace {

json table1()
{
    json node = {{"distance_m", 5.0}, {"angle_deg", 45.0}, {"weight", 1.0}};
    json nodes = json::array();
    for (double angle : {45.0, 60.0, 75.0}) {
        node["angle_deg"] = angle;
        nodes.push_back(node);
    }
    return {
        {"array", {{"n_t", 10}, {"spacing_wavelengths", 0.5}, {"wavelength_m", 0.125}}},
        {"sensing",
         {{"r_min_m", 18.0},
          {"r_max_m", 20.0},
          {"alpha_deg", -60.0},
          {"sigma_rcs_m2", 1.0},
          {"bandwidth_hz", 10e6},
          {"sigma_n_dbm", -80.0},
          {"t_sen_s", 1e-3},
          {"t_coh_s", 1e-3},
          {"r_hat_max_m", 0.02}}},
        {"power", {{"p_avg_w", 0.5}, {"p_p_w", 0.5}}},
        {"eh", {{"a", 1.29}, {"c", 1.55e3}, {"i_s_a", 5e-6}, {"r_l_ohm", 10e3}, {"p_max_w", 25e-6}}},
        {"nodes", nodes},
        {"channel", {{"k_factor", 1.0}}},
        {"solver",
         {{"n_tau", 50},
          {"epsilon_sca_uw", 1e-7},
          {"epsilon_rel", 1e-6},
          {"max_iterations", 100},
          {"rank_tolerance", 1e-6},
          {"power_floor_w", 1e-15},
          {"compress_subspace", true},
          {"sdp_tolerance", 1e-11},
          {"sdp_max_iterations", 200}}},
        {"experiment",
         {{"realizations", 100}, {"base_seed", 1}, {"scheme", "both"}, {"out_dir", "out"}, {"parallel", 1}}},
        {"fig2", {{"p_avg_w", {0.1, 0.5}}}},
        {"fig3",
         {{"p_avg_w", 0.5},
          {"cases", {{{"r_min_m", 5.0}, {"p_p_w", 0.5}}, {{"r_min_m", 5.0}, {"p_p_w", 1.0}}, {{"r_min_m", 18.0}, {"p_p_w", 0.5}}}},
          {"r_hat_max_m", {0.01, 0.02, 0.04, 0.06}}}},
        {"sweep", {{"axes", {{{"key", "sensing.r_hat_max_m"}, {"values", {0.01, 0.02, 0.04, 0.06}}}}}}},
    };
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

bool same_kind(const json& a, const json& b)
{
    if (a.is_number() && b.is_number()) {
        return true;
    }
    return a.type() == b.type();
}

/// Element templates for arrays of objects, keyed by path.
json array_template(const std::string& path)
{
    if (path == "nodes") {
        return {{"distance_m", 5.0}, {"angle_deg", 0.0}, {"weight", 1.0}};
    }
    if (path == "fig3.cases") {
        return {{"r_min_m", 5.0}, {"p_p_w", 0.5}};
    }
    if (path == "sweep.axes") {
        return {{"key", ""}, {"values", json::array()}};
    }
    return nullptr;
}

void check_array(const json& value, const json& reference, const std::string& path);

/// Recursively overlays user onto base, rejecting unknown keys and type changes.
void merge(json& base, const json& user, const std::string& path)
{
    if (!user.is_object()) {
        throw ConfigError("config: '" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key_path = join(path, it.key());
        if (!base.contains(it.key())) {
            throw ConfigError("config: unknown key '" + key_path + "'");
        }
        json& slot = base[it.key()];
        if (slot.is_object()) {
            merge(slot, it.value(), key_path);
        } else if (!same_kind(slot, it.value())) {
            throw ConfigError("config: '" + key_path + "' has the wrong type (expected " + slot.type_name() + ")");
        } else {
            if (slot.is_array()) {
                check_array(it.value(), slot, key_path);
            }
            slot = it.value();
        }
    }
}

void check_array(const json& value, const json& reference, const std::string& path)
{
    const json element = array_template(path);
    for (std::size_t i = 0; i < value.size(); ++i) {
        const std::string item = path + "[" + std::to_string(i) + "]";
        if (element.is_object()) {
            json filled = element;
            merge(filled, value[i], item);
            for (auto it = element.begin(); it != element.end(); ++it) {
                if (!value[i].contains(it.key())) {
                    throw ConfigError("config: '" + item + "." + it.key() + "' is required");
                }
            }
        } else if (!value[i].is_number()) {
            throw ConfigError("config: '" + item + "' must be a number");
        }
    }
    (void)reference;
}

const json& at_path(const json& root, const std::string& path)
{
    const json* node = &root;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!node->is_object() || !node->contains(part)) {
            throw ConfigError("config: unknown key '" + path + "'");
        }
        node = &(*node)[part];
    }
    return *node;
}

double number(const json& root, const std::string& path)
{
    return at_path(root, path).get<double>();
}

double positive(const json& root, const std::string& path)
{
    const double v = number(root, path);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError("config: '" + path + "' must be positive and finite");
    }
    return v;
}

int positive_int(const json& root, const std::string& path)
{
    const double v = number(root, path);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
        throw ConfigError("config: '" + path + "' must be a positive integer");
    }
    return static_cast<int>(v);
}

std::vector<double> positive_list(const json& root, const std::string& path)
{
    const json& arr = at_path(root, path);
    if (arr.empty()) {
        throw ConfigError("config: '" + path + "' must not be empty");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const double v = arr[i].get<double>();
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("config: '" + path + "[" + std::to_string(i) + "]' must be positive and finite");
        }
        out.push_back(v);
    }
    return out;
}

json without_volatile(const json& resolved)
{
    json j = resolved;
    j["experiment"].erase("out_dir");
    j["experiment"].erase("parallel");
    return j;
}

}  // namespace

const char* to_string(Scheme scheme)
{
    switch (scheme) {
    case Scheme::proposed:
        return "proposed";
    case Scheme::baseline:
        return "baseline";
    case Scheme::both:
        return "both";
    }
    return "unknown";
}

std::vector<std::string> profile_names() { return {"table1"}; }

json profile_json(const std::string& profile)
{
    if (profile == "table1") {
        return table1();
    }
    throw ConfigError("config: unknown profile '" + profile + "'");
}

ExperimentConfig config_from_json(const json& user, const std::string& profile)
{
    json r = profile_json(profile);
    if (!user.is_null()) {
        merge(r, user, "");
    }
    ExperimentConfig c;
    c.resolved = r;

    c.geometry.n_t = positive_int(r, "array.n_t");
    c.geometry.wavelength = positive(r, "array.wavelength_m");
    c.geometry.spacing = positive(r, "array.spacing_wavelengths") * c.geometry.wavelength;

    SensingScenario& s = c.scenario;
    s.r_min = positive(r, "sensing.r_min_m");
    s.r_max = positive(r, "sensing.r_max_m");
    if (!(s.r_max > s.r_min)) {
        throw ConfigError("config: 'sensing.r_max_m' must exceed 'sensing.r_min_m'");
    }
    const double alpha_deg = number(r, "sensing.alpha_deg");
    if (!(std::abs(alpha_deg) <= 90.0)) {
        throw ConfigError("config: 'sensing.alpha_deg' must lie in [-90, 90]");
    }
    s.alpha = alpha_deg * kPi / 180.0;
    s.sigma_rcs = positive(r, "sensing.sigma_rcs_m2");
    s.bandwidth = positive(r, "sensing.bandwidth_hz");
    const double noise_dbm = number(r, "sensing.sigma_n_dbm");
    if (!std::isfinite(noise_dbm)) {
        throw ConfigError("config: 'sensing.sigma_n_dbm' must be finite");
    }
    s.noise_power = dbm_to_watt(noise_dbm);
    s.t_sen = positive(r, "sensing.t_sen_s");
    s.t_coh = positive(r, "sensing.t_coh_s");
    s.r_hat_max = positive(r, "sensing.r_hat_max_m");

    c.budget.p_avg = positive(r, "power.p_avg_w");
    c.budget.p_p = positive(r, "power.p_p_w");

    c.circuit.a = positive(r, "eh.a");
    c.circuit.c = positive(r, "eh.c");
    c.circuit.i_s = positive(r, "eh.i_s_a");
    c.circuit.r_l = positive(r, "eh.r_l_ohm");
    c.circuit.p_max = positive(r, "eh.p_max_w");

    const json& nodes = r["nodes"];
    if (nodes.empty()) {
        throw ConfigError("config: 'nodes' must not be empty");
    }
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string p = "nodes[" + std::to_string(i) + "]";
        EhNodePlacement n;
        n.distance = nodes[i]["distance_m"].get<double>();
        n.angle = nodes[i]["angle_deg"].get<double>() * kPi / 180.0;
        n.weight = nodes[i]["weight"].get<double>();
        if (!(n.distance > 0.0) || !std::isfinite(n.distance)) {
            throw ConfigError("config: '" + p + ".distance_m' must be positive");
        }
        if (!(n.weight >= 0.0) || !std::isfinite(n.weight)) {
            throw ConfigError("config: '" + p + ".weight' must be non-negative");
        }
        weight_sum += n.weight;
        c.nodes.push_back(n);
    }
    if (!(weight_sum > 0.0)) {
        throw ConfigError("config: 'nodes' weights must not all be zero");
    }
    for (auto& n : c.nodes) {
        n.weight /= weight_sum;
    }
    c.k_factor = number(r, "channel.k_factor");
    if (!(c.k_factor >= 0.0)) {
        throw ConfigError("config: 'channel.k_factor' must be non-negative");
    }

    c.n_tau = positive_int(r, "solver.n_tau");
    c.sca.epsilon_abs = positive(r, "solver.epsilon_sca_uw") * 1e-6;
    c.sca.epsilon_rel = number(r, "solver.epsilon_rel");
    if (!(c.sca.epsilon_rel >= 0.0)) {
        throw ConfigError("config: 'solver.epsilon_rel' must be non-negative");
    }
    c.sca.max_iterations = positive_int(r, "solver.max_iterations");
    c.sca.rank_tolerance = positive(r, "solver.rank_tolerance");
    c.sca.power_floor = positive(r, "solver.power_floor_w");
    c.sca.compress_subspace = r["solver"]["compress_subspace"].get<bool>();
    c.sca.sdp.tolerance = positive(r, "solver.sdp_tolerance");
    c.sca.sdp.max_iterations = positive_int(r, "solver.sdp_max_iterations");

    c.realizations = positive_int(r, "experiment.realizations");
    const double seed = number(r, "experiment.base_seed");
    if (!(seed >= 0.0) || seed != std::floor(seed) || seed > 9007199254740992.0) {
        throw ConfigError("config: 'experiment.base_seed' must be a non-negative integer");
    }
    c.base_seed = static_cast<std::uint64_t>(seed);
    const std::string scheme = r["experiment"]["scheme"].get<std::string>();
    if (scheme == "proposed") {
        c.scheme = Scheme::proposed;
    } else if (scheme == "baseline") {
        c.scheme = Scheme::baseline;
    } else if (scheme == "both") {
        c.scheme = Scheme::both;
    } else {
        throw ConfigError("config: 'experiment.scheme' must be proposed, baseline or both");
    }
    c.out_dir = r["experiment"]["out_dir"].get<std::string>();
    c.parallel = positive_int(r, "experiment.parallel");

    c.fig2_p_avg = positive_list(r, "fig2.p_avg_w");
    c.fig3_p_avg = positive(r, "fig3.p_avg_w");
    const json& cases = r["fig3"]["cases"];
    if (cases.empty()) {
        throw ConfigError("config: 'fig3.cases' must not be empty");
    }
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const std::string p = "fig3.cases[" + std::to_string(i) + "]";
        Fig3Case fc{cases[i]["r_min_m"].get<double>(), cases[i]["p_p_w"].get<double>()};
        if (!(fc.r_min > 0.0 && fc.r_min < s.r_max)) {
            throw ConfigError("config: '" + p + ".r_min_m' must lie in (0, sensing.r_max_m)");
        }
        if (!(fc.p_p > 0.0)) {
            throw ConfigError("config: '" + p + ".p_p_w' must be positive");
        }
        c.fig3_cases.push_back(fc);
    }
    c.fig3_r_hat_max = positive_list(r, "fig3.r_hat_max_m");

    const json& axes = r["sweep"]["axes"];
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string p = "sweep.axes[" + std::to_string(i) + "]";
        SweepAxis axis;
        axis.key = axes[i]["key"].get<std::string>();
        const json& leaf = at_path(r, axis.key);
        if (!leaf.is_number() || axis.key.rfind("sweep.", 0) == 0 || axis.key.rfind("experiment.", 0) == 0) {
            throw ConfigError("config: '" + p + ".key' must name a numeric model parameter");
        }
        for (const auto& v : axes[i]["values"]) {
            axis.values.push_back(v.get<double>());
        }
        if (axis.values.empty()) {
            throw ConfigError("config: '" + p + ".values' must not be empty");
        }
        c.sweep_axes.push_back(axis);
    }
    return c;
}

json read_config_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        return json::object();
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: '" + path + "': " + e.what());
    }
}

ExperimentConfig load_config(const std::string& path, const std::string& profile)
{
    return config_from_json(read_config_json(path), profile);
}

void set_dotted(json& user, const std::string& key, const json& value)
{
    if (key.empty()) {
        throw ConfigError("config: empty override key");
    }
    if (user.is_null()) {
        user = json::object();
    }
    json* node = &user;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) {
            throw ConfigError("config: malformed key '" + key + "'");
        }
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) {
            throw ConfigError("config: '" + key + "' descends into a non-object");
        }
        node = &(*node)[parts[i]];
        if (node->is_null()) {
            *node = json::object();
        }
    }
    if (!node->is_object()) {
        throw ConfigError("config: '" + key + "' descends into a non-object");
    }
    (*node)[parts.back()] = value;
}

void apply_override(json& user, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("config: override '" + assignment + "' is not of the form key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    set_dotted(user, key, value);
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& config)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(without_volatile(config.resolved).dump())));
    return buf;
}

IsaptInstance make_instance(const ExperimentConfig& config, std::uint64_t seed)
{
    IsaptInstance inst;
    inst.geometry = config.geometry;
    inst.scenario = config.scenario;
    inst.receivers.circuits.assign(config.nodes.size(), config.circuit);
    for (const auto& n : config.nodes) {
        inst.receivers.weights.push_back(n.weight);
    }
    inst.channels = generate_channels(seed, config.nodes, config.geometry, config.k_factor);
    inst.u = steering_vector(config.geometry, config.scenario.alpha);
    inst.budget = config.budget;
    inst.n_tau = config.n_tau;
    inst.sca = config.sca;
    return inst;
}

}  // namespace isapt
