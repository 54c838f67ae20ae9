// Command-line front end: single solves, figure sweeps, feasibility and EH-curve queries.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "isapt/config.hpp"
#include "isapt/errors.hpp"
#include "isapt/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kInfeasible = 3, kNumerical = 4 };

struct CommonOptions {
    std::string config_path;
    std::string profile = "table1";
    std::optional<std::string> out;
    std::optional<int> seeds;
    std::optional<long long> base_seed;
    std::optional<int> parallel;
    std::optional<std::string> scheme;
    std::vector<std::string> sets;
};

void add_common(CLI::App* app, CommonOptions& o)
{
    app->add_option("--config", o.config_path, "JSON config file");
    app->add_option("--profile", o.profile, "defaults profile")->capture_default_str();
    app->add_option("--out", o.out, "output directory");
    app->add_option("--seeds", o.seeds, "number of channel realizations");
    app->add_option("--base-seed", o.base_seed, "seed of the first realization");
    app->add_option("--parallel", o.parallel, "worker threads");
    app->add_option("--scheme", o.scheme, "proposed, baseline or both");
    app->add_option("--set", o.sets, "override a config key, e.g. --set sensing.r_min_m=5");
}

isapt::ExperimentConfig resolve(const CommonOptions& o)
{
    nlohmann::json user = o.config_path.empty() ? nlohmann::json::object() : isapt::read_config_json(o.config_path);
    if (o.out) {
        isapt::set_dotted(user, "experiment.out_dir", *o.out);
    }
    if (o.seeds) {
        isapt::set_dotted(user, "experiment.realizations", *o.seeds);
    }
    if (o.base_seed) {
        isapt::set_dotted(user, "experiment.base_seed", *o.base_seed);
    }
    if (o.parallel) {
        isapt::set_dotted(user, "experiment.parallel", *o.parallel);
    }
    if (o.scheme) {
        isapt::set_dotted(user, "experiment.scheme", *o.scheme);
    }
    for (const auto& s : o.sets) {
        isapt::apply_override(user, s);
    }
    return isapt::config_from_json(user, o.profile);
}

void list_files(const std::vector<std::string>& files)
{
    for (const auto& f : files) {
        std::cerr << "wrote " << f << '\n';
    }
}

int cmd_solve(const CommonOptions& o, std::optional<long long> seed_opt)
{
    const isapt::ExperimentConfig c = resolve(o);
    const std::uint64_t seed = seed_opt ? static_cast<std::uint64_t>(*seed_opt) : c.base_seed;
    const isapt::SolveOutcome out = isapt::run_solve(c, seed);
    isapt::write_solve_report(std::cout, c, out);
    std::filesystem::create_directories(c.out_dir);
    const std::filesystem::path dir(c.out_dir);
    const std::string tag = "solve_seed" + std::to_string(seed);
    std::ofstream curve(dir / (tag + "_curve.csv"), std::ios::binary);
    isapt::write_solve_curve(curve, c, out);
    std::ofstream beam(dir / (tag + "_beam.csv"), std::ios::binary);
    isapt::write_beam(beam, c, out);
    std::ofstream channels(dir / (tag + "_channels.csv"), std::ios::binary);
    isapt::write_channels(channels, c, out.instance.channels);
    if (!curve || !beam || !channels) {
        throw std::runtime_error("cannot write into '" + c.out_dir + "'");
    }
    list_files({(dir / (tag + "_curve.csv")).string(), (dir / (tag + "_beam.csv")).string(),
                (dir / (tag + "_channels.csv")).string()});
    return kOk;
}

int cmd_fig2(const CommonOptions& o)
{
    const isapt::ExperimentConfig c = resolve(o);
    const isapt::Fig2Result r = isapt::run_fig2(c);
    for (const auto& curve : r.curves) {
        std::cout << "p_avg " << isapt::format_number(curve.p_avg) << " W: tau* " << isapt::format_number(curve.tau_star)
                  << " s, peak " << isapt::format_number(curve.peak) << " W, duty "
                  << isapt::format_number(curve.duty_cycle) << '\n';
    }
    std::cerr << "elapsed " << r.record.seconds << " s\n";
    list_files(isapt::write_fig2(c, r));
    bool any = false;
    for (const auto& curve : r.curves) {
        any = any || std::isfinite(curve.peak);
    }
    return any ? kOk : kInfeasible;
}

int cmd_fig3(const CommonOptions& o)
{
    const isapt::ExperimentConfig c = resolve(o);
    const isapt::Fig3Result r = isapt::run_fig3(c);
    for (std::size_t i = 0; i + 1 < r.record.points.size(); i += 2) {
        const auto& p = r.record.points[i];
        const auto& b = r.record.points[i + 1];
        std::cout << "r_min " << p.axis_values[0] << " m, p_p " << p.axis_values[1] << " W, r_hat_max "
                  << p.axis_values[2] << " m: proposed " << isapt::format_number(p.mean()) << " W, baseline "
                  << isapt::format_number(b.mean()) << " W, feasible " << p.feasible_fraction() << '\n';
    }
    std::cerr << "elapsed " << r.record.seconds << " s\n";
    list_files(isapt::write_fig3(c, r));
    return kOk;
}

int cmd_sweep(const CommonOptions& o)
{
    const isapt::ExperimentConfig c = resolve(o);
    const isapt::GenericSweepResult r = isapt::run_sweep(c);
    isapt::write_sweep_summary(std::cout, r.record);
    std::cerr << "elapsed " << r.record.seconds << " s\n";
    list_files(isapt::write_sweep(c, r));
    return kOk;
}

int cmd_feasibility(const CommonOptions& o)
{
    const isapt::ExperimentConfig c = resolve(o);
    const isapt::IsaptInstance inst = isapt::make_instance(c, c.base_seed);
    const isapt::RadarConstants k = inst.constants();
    const isapt::TauBounds b = isapt::tau_bounds(inst.scenario, inst.u, k, inst.budget.p_p);
    std::cout << "z1 " << isapt::format_number(k.z1) << '\n'
              << "z2 " << isapt::format_number(k.z2) << '\n'
              << "z " << isapt::format_number(k.z) << '\n'
              << "z3 " << isapt::format_number(b.z3) << '\n'
              << "z4 " << isapt::format_number(b.z4) << '\n'
              << "discriminant " << isapt::format_number(b.discriminant) << '\n'
              << "tau_min_s " << isapt::format_number(b.tau_min) << '\n'
              << "tau_max_s " << isapt::format_number(b.tau_max) << '\n'
              << "feasible " << (b.feasible ? "yes" : "no") << '\n';
    return b.feasible ? kOk : kInfeasible;
}

int cmd_eh_curve(const CommonOptions& o, int points)
{
    const isapt::ExperimentConfig c = resolve(o);
    if (points < 2) {
        throw isapt::ConfigError("eh-curve: --points must be at least 2");
    }
    std::cout << "p_in_W,phi_W,dphi_dp\n";
    for (int i = 0; i < points; ++i) {
        const double p = c.circuit.p_max * i / (points - 1);
        const double d = p > 0.0 ? isapt::harvested_power_derivative(p, c.circuit) : 0.0;
        std::cout << isapt::format_number(p) << ',' << isapt::format_number(isapt::harvested_power(p, c.circuit)) << ','
                  << isapt::format_number(d) << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint pulse and beamformer design for integrated sensing and power transfer"};
    app.require_subcommand(1);
    CommonOptions common;
    std::optional<long long> seed;
    int points = 101;

    auto* solve = app.add_subcommand("solve", "one realization through the full grid search");
    add_common(solve, common);
    solve->add_option("--seed", seed, "channel seed (default: base seed)");
    auto* fig2 = app.add_subcommand("fig2", "harvested power over pulse duration for each average-power budget");
    add_common(fig2, common);
    auto* fig3 = app.add_subcommand("fig3", "harvested power over range-accuracy target, both schemes");
    add_common(fig3, common);
    auto* sweep = app.add_subcommand("sweep", "cartesian sweep over sweep.axes");
    add_common(sweep, common);
    auto* feas = app.add_subcommand("feasibility", "feasible pulse-duration interval");
    add_common(feas, common);
    auto* eh = app.add_subcommand("eh-curve", "harvested power over input power");
    add_common(eh, common);
    eh->add_option("--points", points, "number of samples")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (*solve) {
            return cmd_solve(common, seed);
        }
        if (*fig2) {
            return cmd_fig2(common);
        }
        if (*fig3) {
            return cmd_fig3(common);
        }
        if (*sweep) {
            return cmd_sweep(common);
        }
        if (*feas) {
            return cmd_feasibility(common);
        }
        if (*eh) {
            return cmd_eh_curve(common, points);
        }
    } catch (const isapt::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const isapt::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const isapt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kOther;
    }
    return kOther;
}
