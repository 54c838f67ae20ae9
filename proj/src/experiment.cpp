#include "isapt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "isapt/errors.hpp"

namespace isapt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SeedSample infeasible_sample(std::uint64_t seed, const std::string& status)
{
    SeedSample s;
    s.seed = seed;
    s.objective = kNaN;
    s.tau = kNaN;
    s.rank_ratio = kNaN;
    s.mixing_rho = kNaN;
    s.status = status;
    return s;
}

SeedSample proposed_sample(std::uint64_t seed, const DesignSolution& d)
{
    SeedSample s;
    s.seed = seed;
    s.objective = d.objective;
    s.tau = d.tau_star;
    s.iterations = d.at_star.iterations;
    s.rank_ratio = 0.0;
    for (const auto& p : d.curve) {
        if (p.status == ScaStatus::optimal || p.status == ScaStatus::rank_warning) {
            s.rank_ratio = std::max(s.rank_ratio, p.rank_ratio);
        }
    }
    s.mixing_rho = kNaN;
    s.status = to_string(d.at_star.status);
    return s;
}

SeedSample baseline_sample(std::uint64_t seed, const BaselineSolution& b)
{
    SeedSample s;
    s.seed = seed;
    s.objective = b.objective;
    s.tau = b.tau;
    s.iterations = 0;
    s.rank_ratio = 0.0;
    s.mixing_rho = b.mixing_rho;
    s.status = to_string(b.status);
    return s;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) {
        out.push_back(item);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& text)
{
    if (text == "nan") {
        return kNaN;
    }
    if (text == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (text == "-inf") {
        return -std::numeric_limits<double>::infinity();
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
        throw std::runtime_error("read_sweep_samples: bad number '" + text + "'");
    }
    return v;
}

void write_header(std::ostream& out, const std::string& title, const std::string& kind, const std::string& hash)
{
    out << "# " << title << '\n';
    out << "# kind: " << kind << '\n';
    out << "# config_hash: " << hash << '\n';
}

std::filesystem::path prepare_dir(const ExperimentConfig& config)
{
    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
}

/// Outcome of one realization for both schemes.
struct Trial {
    bool grid_infeasible = false;
    bool has_design = false;
    DesignSolution design;
    std::string proposed_status;
    bool has_baseline = false;
    BaselineSolution baseline;
    std::string baseline_status;
};

Trial run_trial(const IsaptInstance& inst, Scheme scheme)
{
    Trial t;
    std::vector<double> taus;
    try {
        taus = instance_tau_grid(inst);
    } catch (const InfeasibleError&) {
        t.grid_infeasible = true;
        t.proposed_status = "infeasible";
        t.baseline_status = "infeasible";
        return t;
    }
    if (scheme != Scheme::baseline) {
        try {
            t.design = grid_search(inst, taus);
            t.has_design = true;
        } catch (const InfeasibleError&) {
            t.proposed_status = "infeasible";
        } catch (const NumericalError&) {
            t.proposed_status = "numerical-failure";
        }
    }
    if (scheme != Scheme::proposed) {
        try {
            t.baseline = grid_search_baseline(inst, taus).best;
            t.has_baseline = true;
        } catch (const InfeasibleError&) {
            t.baseline_status = "infeasible";
        }
    }
    return t;
}

void append_trial(SweepRecord& rec, std::size_t proposed_point, std::size_t baseline_point, std::uint64_t seed,
                  const Trial& t, Scheme scheme)
{
    if (scheme != Scheme::baseline) {
        rec.points[proposed_point].samples.push_back(t.has_design ? proposed_sample(seed, t.design)
                                                                  : infeasible_sample(seed, t.proposed_status));
    }
    if (scheme != Scheme::proposed) {
        rec.points[baseline_point].samples.push_back(t.has_baseline ? baseline_sample(seed, t.baseline)
                                                                    : infeasible_sample(seed, t.baseline_status));
    }
}

std::vector<std::string> scheme_names(Scheme scheme)
{
    switch (scheme) {
    case Scheme::proposed:
        return {"proposed"};
    case Scheme::baseline:
        return {"baseline"};
    case Scheme::both:
        return {"proposed", "baseline"};
    }
    return {};
}

}  // namespace

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void run_indexed(std::size_t count, int parallel, const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, parallel));
    if (threads == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < std::min(threads, count); ++k) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

int SweepPoint::feasible_count() const
{
    return static_cast<int>(std::count_if(samples.begin(), samples.end(),
                                          [](const SeedSample& s) { return std::isfinite(s.objective); }));
}

double SweepPoint::feasible_fraction() const
{
    return samples.empty() ? 0.0 : static_cast<double>(feasible_count()) / static_cast<double>(samples.size());
}

double SweepPoint::mean() const
{
    double sum = 0.0;
    int n = 0;
    for (const auto& s : samples) {
        if (std::isfinite(s.objective)) {
            sum += s.objective;
            ++n;
        }
    }
    return n > 0 ? sum / n : kNaN;
}

double SweepPoint::standard_error() const
{
    const int n = feasible_count();
    if (n < 2) {
        return kNaN;
    }
    const double m = mean();
    double ss = 0.0;
    for (const auto& s : samples) {
        if (std::isfinite(s.objective)) {
            ss += (s.objective - m) * (s.objective - m);
        }
    }
    return std::sqrt(ss / (n - 1) / n);
}

double SweepPoint::mean_iterations() const
{
    double sum = 0.0;
    int n = 0;
    for (const auto& s : samples) {
        if (std::isfinite(s.objective)) {
            sum += s.iterations;
            ++n;
        }
    }
    return n > 0 ? sum / n : kNaN;
}

double SweepPoint::max_rank_ratio() const
{
    double r = 0.0;
    for (const auto& s : samples) {
        if (std::isfinite(s.rank_ratio)) {
            r = std::max(r, s.rank_ratio);
        }
    }
    return r;
}

void write_sweep_samples(std::ostream& out, const SweepRecord& record)
{
    write_header(out, "isapt sweep samples", record.kind, record.config_hash);
    out << "# units: objective_W [W], design_tau_s [s]; nan marks realizations without a feasible design\n";
    for (const auto& name : record.axis_names) {
        out << name << ',';
    }
    out << "scheme,seed,objective_W,design_tau_s,iterations,rank_ratio,mixing_rho,status\n";
    for (const auto& p : record.points) {
        for (const auto& s : p.samples) {
            for (double v : p.axis_values) {
                out << format_number(v) << ',';
            }
            out << p.scheme << ',' << s.seed << ',' << format_number(s.objective) << ',' << format_number(s.tau) << ','
                << s.iterations << ',' << format_number(s.rank_ratio) << ',' << format_number(s.mixing_rho) << ','
                << s.status << '\n';
        }
    }
}

SweepRecord read_sweep_samples(std::istream& in)
{
    SweepRecord rec;
    std::string line;
    std::vector<std::string> columns;
    std::map<std::pair<std::vector<double>, std::string>, std::size_t> index;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            if (line.rfind("# kind: ", 0) == 0) {
                rec.kind = line.substr(8);
            } else if (line.rfind("# config_hash: ", 0) == 0) {
                rec.config_hash = line.substr(15);
            }
            continue;
        }
        if (columns.empty()) {
            columns = split(line, ',');
            const auto it = std::find(columns.begin(), columns.end(), "scheme");
            if (it == columns.end() || columns.end() - it != 8) {
                throw std::runtime_error("read_sweep_samples: unexpected column header");
            }
            rec.axis_names.assign(columns.begin(), it);
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != columns.size()) {
            throw std::runtime_error("read_sweep_samples: wrong field count");
        }
        const std::size_t na = rec.axis_names.size();
        std::vector<double> axis;
        for (std::size_t i = 0; i < na; ++i) {
            axis.push_back(parse_number(fields[i]));
        }
        const std::string& scheme = fields[na];
        SeedSample s;
        s.seed = std::stoull(fields[na + 1]);
        s.objective = parse_number(fields[na + 2]);
        s.tau = parse_number(fields[na + 3]);
        s.iterations = std::stoi(fields[na + 4]);
        s.rank_ratio = parse_number(fields[na + 5]);
        s.mixing_rho = parse_number(fields[na + 6]);
        s.status = fields[na + 7];
        const auto key = std::make_pair(axis, scheme);
        auto found = index.find(key);
        if (found == index.end()) {
            found = index.emplace(key, rec.points.size()).first;
            rec.points.push_back({axis, scheme, {}});
        }
        rec.points[found->second].samples.push_back(s);
    }
    if (columns.empty()) {
        throw std::runtime_error("read_sweep_samples: no column header");
    }
    return rec;
}

void write_sweep_summary(std::ostream& out, const SweepRecord& record)
{
    write_header(out, "isapt sweep summary", record.kind, record.config_hash);
    out << "# units: mean_obj_W [W], stderr_obj_W [W]; means over feasible realizations only\n";
    for (const auto& name : record.axis_names) {
        out << name << ',';
    }
    out << "scheme,n_seeds,n_feasible,feasible_fraction,mean_obj_W,stderr_obj_W,mean_iters,max_rank_ratio\n";
    for (const auto& p : record.points) {
        for (double v : p.axis_values) {
            out << format_number(v) << ',';
        }
        out << p.scheme << ',' << p.samples.size() << ',' << p.feasible_count() << ','
            << format_number(p.feasible_fraction()) << ',' << format_number(p.mean()) << ','
            << format_number(p.standard_error()) << ',' << format_number(p.mean_iterations()) << ','
            << format_number(p.max_rank_ratio()) << '\n';
    }
}

SweepRecord aggregate(const std::vector<SweepRecord>& records)
{
    if (records.empty()) {
        throw std::invalid_argument("aggregate: no records");
    }
    SweepRecord out = records.front();
    out.seconds = 0.0;
    std::map<std::pair<std::vector<double>, std::string>, std::size_t> index;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
        index[{out.points[i].axis_values, out.points[i].scheme}] = i;
    }
    for (std::size_t r = 0; r < records.size(); ++r) {
        const SweepRecord& rec = records[r];
        out.seconds += rec.seconds;
        if (rec.config_hash != out.config_hash) {
            throw ConfigError("aggregate: config hash " + rec.config_hash + " differs from " + out.config_hash);
        }
        if (rec.kind != out.kind || rec.axis_names != out.axis_names) {
            throw ConfigError("aggregate: records have different sweep layouts");
        }
        if (r == 0) {
            continue;
        }
        for (const auto& p : rec.points) {
            const auto key = std::make_pair(p.axis_values, p.scheme);
            auto found = index.find(key);
            if (found == index.end()) {
                found = index.emplace(key, out.points.size()).first;
                out.points.push_back({p.axis_values, p.scheme, {}});
            }
            auto& dst = out.points[found->second].samples;
            dst.insert(dst.end(), p.samples.begin(), p.samples.end());
        }
    }
    return out;
}

void RunDiagnostics::add(const DesignSolution& d, double rank_tolerance)
{
    ++designs;
    for (const auto& p : d.curve) {
        ++fixed_tau_solves;
        const bool ok = p.status == ScaStatus::optimal || p.status == ScaStatus::rank_warning;
        if (!ok) {
            ++failed_solves;
        } else {
            max_rank_ratio = std::max(max_rank_ratio, p.rank_ratio);
            if (p.rank_ratio > rank_tolerance || p.status == ScaStatus::rank_warning) {
                ++rank_exceptions;
            }
        }
        max_kkt_residual = std::max(max_kkt_residual, p.max_kkt_residual);
        worst_ascent = std::min(worst_ascent, p.worst_ascent);
    }
    worst_slack = std::min(worst_slack, d.slacks.worst());
}

void RunDiagnostics::merge(const RunDiagnostics& o)
{
    fixed_tau_solves += o.fixed_tau_solves;
    failed_solves += o.failed_solves;
    rank_exceptions += o.rank_exceptions;
    max_rank_ratio = std::max(max_rank_ratio, o.max_rank_ratio);
    max_kkt_residual = std::max(max_kkt_residual, o.max_kkt_residual);
    worst_ascent = std::min(worst_ascent, o.worst_ascent);
    worst_slack = std::min(worst_slack, o.worst_slack);
    designs += o.designs;
}

Fig2Result run_fig2(const ExperimentConfig& config)
{
    const auto t0 = Clock::now();
    Fig2Result res;
    res.record.kind = "fig2";
    res.record.config_hash = config_hash(config);
    res.record.axis_names = {"p_avg_w", "tau_s"};

    const std::size_t nb = config.fig2_p_avg.size();
    const auto nseeds = static_cast<std::size_t>(config.realizations);
    std::vector<Trial> trials(nb * nseeds);
    std::vector<std::vector<double>> grids(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        ExperimentConfig c = config;
        c.budget.p_avg = config.fig2_p_avg[b];
        const IsaptInstance probe = make_instance(c, config.base_seed);
        try {
            grids[b] = instance_tau_grid(probe);
        } catch (const InfeasibleError&) {
            grids[b].clear();
        }
    }
    run_indexed(trials.size(), config.parallel, [&](std::size_t i) {
        const std::size_t b = i / nseeds;
        ExperimentConfig c = config;
        c.budget.p_avg = config.fig2_p_avg[b];
        trials[i] = run_trial(make_instance(c, config.base_seed + i % nseeds), Scheme::proposed);
    });

    for (std::size_t b = 0; b < nb; ++b) {
        Fig2Curve curve;
        curve.p_avg = config.fig2_p_avg[b];
        curve.taus = grids[b];
        const std::size_t first = res.record.points.size();
        for (double tau : grids[b]) {
            res.record.points.push_back({{curve.p_avg, tau}, "proposed", {}});
        }
        for (std::size_t s = 0; s < nseeds; ++s) {
            const Trial& t = trials[b * nseeds + s];
            const std::uint64_t seed = config.base_seed + s;
            if (t.has_design) {
                res.diagnostics.add(t.design, config.sca.rank_tolerance);
            }
            for (std::size_t k = 0; k < grids[b].size(); ++k) {
                SeedSample smp;
                if (t.has_design) {
                    const CurvePoint& p = t.design.curve[k];
                    smp.seed = seed;
                    smp.objective = p.objective;
                    smp.tau = p.tau;
                    smp.iterations = p.iterations;
                    smp.rank_ratio = p.rank_ratio;
                    smp.mixing_rho = kNaN;
                    smp.status = to_string(p.status);
                } else {
                    smp = infeasible_sample(seed, t.proposed_status);
                }
                res.record.points[first + k].samples.push_back(smp);
            }
        }
        bool have = false;
        for (std::size_t k = 0; k < grids[b].size(); ++k) {
            const SweepPoint& p = res.record.points[first + k];
            curve.mean.push_back(p.mean());
            curve.standard_error.push_back(p.standard_error());
            curve.feasible_fraction.push_back(p.feasible_fraction());
            if (std::isfinite(p.mean()) && (!have || p.mean() > curve.peak)) {
                have = true;
                curve.peak = p.mean();
                curve.tau_star = grids[b][k];
            }
        }
        if (have) {
            curve.duty_cycle = curve.tau_star / slot_duration(curve.tau_star, config.scenario);
        } else {
            curve.peak = kNaN;
            curve.tau_star = kNaN;
            curve.duty_cycle = kNaN;
        }
        res.curves.push_back(std::move(curve));
    }
    res.record.seconds = seconds_since(t0);
    return res;
}

Fig3Result run_fig3(const ExperimentConfig& config)
{
    const auto t0 = Clock::now();
    Fig3Result res;
    res.record.kind = "fig3";
    res.record.config_hash = config_hash(config);
    res.record.axis_names = {"r_min_m", "p_p_w", "r_hat_max_m"};

    const std::size_t nc = config.fig3_cases.size();
    const std::size_t nr = config.fig3_r_hat_max.size();
    const auto nseeds = static_cast<std::size_t>(config.realizations);
    auto point_config = [&](std::size_t c, std::size_t r) {
        ExperimentConfig pc = config;
        pc.scenario.r_min = config.fig3_cases[c].r_min;
        pc.budget.p_p = config.fig3_cases[c].p_p;
        pc.budget.p_avg = config.fig3_p_avg;
        pc.scenario.r_hat_max = config.fig3_r_hat_max[r];
        return pc;
    };
    std::vector<Trial> trials(nc * nr * nseeds);
    run_indexed(trials.size(), config.parallel, [&](std::size_t i) {
        const std::size_t point = i / nseeds;
        const ExperimentConfig pc = point_config(point / nr, point % nr);
        trials[i] = run_trial(make_instance(pc, config.base_seed + i % nseeds), Scheme::both);
    });

    for (std::size_t point = 0; point < nc * nr; ++point) {
        const std::size_t c = point / nr;
        const std::size_t r = point % nr;
        const std::vector<double> axis = {config.fig3_cases[c].r_min, config.fig3_cases[c].p_p,
                                          config.fig3_r_hat_max[r]};
        const std::size_t pi = res.record.points.size();
        res.record.points.push_back({axis, "proposed", {}});
        res.record.points.push_back({axis, "baseline", {}});
        for (std::size_t s = 0; s < nseeds; ++s) {
            const Trial& t = trials[point * nseeds + s];
            append_trial(res.record, pi, pi + 1, config.base_seed + s, t, Scheme::both);
            if (t.has_design) {
                res.diagnostics.add(t.design, config.sca.rank_tolerance);
            }
            if (t.has_baseline) {
                const double ours = t.has_design ? t.design.objective : 0.0;
                const double gap = t.baseline.objective - ours;
                if (gap > 1e-9 * std::max(1e-6, t.baseline.objective)) {
                    ++res.dominance_violations;
                }
                res.worst_dominance_gap = std::max(res.worst_dominance_gap, gap);
            }
        }
    }
    res.record.seconds = seconds_since(t0);
    return res;
}

GenericSweepResult run_sweep(const ExperimentConfig& config)
{
    const auto t0 = Clock::now();
    GenericSweepResult res;
    res.record.kind = "sweep";
    res.record.config_hash = config_hash(config);
    std::size_t npoints = 1;
    for (const auto& a : config.sweep_axes) {
        res.record.axis_names.push_back(a.key);
        npoints *= a.values.size();
    }
    std::vector<std::vector<double>> axis_values(npoints);
    std::vector<ExperimentConfig> configs;
    for (std::size_t p = 0; p < npoints; ++p) {
        nlohmann::json user = config.resolved;
        std::size_t rest = p;
        std::vector<double> vals(config.sweep_axes.size());
        for (std::size_t a = config.sweep_axes.size(); a-- > 0;) {
            const auto& axis = config.sweep_axes[a];
            vals[a] = axis.values[rest % axis.values.size()];
            rest /= axis.values.size();
            set_dotted(user, axis.key, vals[a]);
        }
        axis_values[p] = vals;
        configs.push_back(config_from_json(user, "table1"));
    }
    const auto nseeds = static_cast<std::size_t>(config.realizations);
    std::vector<Trial> trials(npoints * nseeds);
    run_indexed(trials.size(), config.parallel, [&](std::size_t i) {
        trials[i] = run_trial(make_instance(configs[i / nseeds], config.base_seed + i % nseeds), config.scheme);
    });
    const auto names = scheme_names(config.scheme);
    for (std::size_t p = 0; p < npoints; ++p) {
        const std::size_t first = res.record.points.size();
        for (const auto& n : names) {
            res.record.points.push_back({axis_values[p], n, {}});
        }
        const std::size_t prop = first;
        const std::size_t base = config.scheme == Scheme::both ? first + 1 : first;
        for (std::size_t s = 0; s < nseeds; ++s) {
            const Trial& t = trials[p * nseeds + s];
            append_trial(res.record, prop, base, config.base_seed + s, t, config.scheme);
            if (t.has_design) {
                res.diagnostics.add(t.design, config.sca.rank_tolerance);
            }
        }
    }
    res.record.seconds = seconds_since(t0);
    return res;
}

std::vector<std::string> write_fig2(const ExperimentConfig& config, const Fig2Result& result)
{
    const auto dir = prepare_dir(config);
    std::vector<std::string> files;
    for (const auto& c : result.curves) {
        char name[64];
        std::snprintf(name, sizeof name, "fig2_pavg_%g.csv", c.p_avg);
        const auto path = dir / name;
        auto out = open_out(path);
        write_header(out, "isapt harvested power over pulse duration", "fig2", result.record.config_hash);
        out << "# p_avg_w: " << format_number(c.p_avg) << '\n';
        out << "# tau_star_s: " << format_number(c.tau_star) << '\n';
        out << "# peak_obj_W: " << format_number(c.peak) << '\n';
        out << "# duty_cycle: " << format_number(c.duty_cycle) << '\n';
        out << "# units: tau_s [s], mean_obj_W [W], stderr_obj_W [W]\n";
        out << "tau_s,mean_obj_W,stderr_obj_W,feasible_fraction,mean_iters,max_rank_ratio\n";
        for (const auto& p : result.record.points) {
            if (p.axis_values[0] != c.p_avg) {
                continue;
            }
            out << format_number(p.axis_values[1]) << ',' << format_number(p.mean()) << ','
                << format_number(p.standard_error()) << ',' << format_number(p.feasible_fraction()) << ','
                << format_number(p.mean_iterations()) << ',' << format_number(p.max_rank_ratio()) << '\n';
        }
        files.push_back(path.string());
    }
    const auto samples = dir / "fig2_samples.csv";
    auto out = open_out(samples);
    write_sweep_samples(out, result.record);
    files.push_back(samples.string());
    return files;
}

std::vector<std::string> write_fig3(const ExperimentConfig& config, const Fig3Result& result)
{
    const auto dir = prepare_dir(config);
    const auto paired = dir / "fig3.csv";
    {
        auto out = open_out(paired);
        write_header(out, "isapt harvested power over range-accuracy target", "fig3", result.record.config_hash);
        out << "# p_avg_w: " << format_number(config.fig3_p_avg) << '\n';
        out << "# units: *_mean_W [W], *_stderr_W [W]; means over feasible realizations only\n";
        out << "r_min_m,p_p_w,r_hat_max_m,proposed_mean_W,proposed_stderr_W,proposed_feasible_fraction,"
               "proposed_mean_tau_s,baseline_mean_W,baseline_stderr_W,baseline_feasible_fraction,"
               "baseline_mean_rho\n";
        for (std::size_t i = 0; i + 1 < result.record.points.size(); i += 2) {
            const SweepPoint& p = result.record.points[i];
            const SweepPoint& b = result.record.points[i + 1];
            auto mean_of = [](const SweepPoint& sp, double SeedSample::*field) {
                double sum = 0.0;
                int n = 0;
                for (const auto& s : sp.samples) {
                    if (std::isfinite(s.objective)) {
                        sum += s.*field;
                        ++n;
                    }
                }
                return n > 0 ? sum / n : kNaN;
            };
            for (double v : p.axis_values) {
                out << format_number(v) << ',';
            }
            out << format_number(p.mean()) << ',' << format_number(p.standard_error()) << ','
                << format_number(p.feasible_fraction()) << ',' << format_number(mean_of(p, &SeedSample::tau)) << ','
                << format_number(b.mean()) << ',' << format_number(b.standard_error()) << ','
                << format_number(b.feasible_fraction()) << ',' << format_number(mean_of(b, &SeedSample::mixing_rho))
                << '\n';
        }
    }
    const auto samples = dir / "fig3_samples.csv";
    auto out = open_out(samples);
    write_sweep_samples(out, result.record);
    return {paired.string(), samples.string()};
}

std::vector<std::string> write_sweep(const ExperimentConfig& config, const GenericSweepResult& result)
{
    const auto dir = prepare_dir(config);
    const auto summary = dir / "sweep.csv";
    {
        auto out = open_out(summary);
        write_sweep_summary(out, result.record);
    }
    const auto samples = dir / "sweep_samples.csv";
    auto out = open_out(samples);
    write_sweep_samples(out, result.record);
    return {summary.string(), samples.string()};
}

SolveOutcome run_solve(const ExperimentConfig& config, std::uint64_t seed)
{
    SolveOutcome o;
    o.instance = make_instance(config, seed);
    const std::vector<double> taus = instance_tau_grid(o.instance);
    if (config.scheme != Scheme::baseline) {
        o.design = grid_search(o.instance, taus);
    }
    if (config.scheme != Scheme::proposed) {
        try {
            o.baseline = grid_search_baseline(o.instance, taus);
            o.has_baseline = true;
        } catch (const InfeasibleError&) {
            if (config.scheme == Scheme::baseline) {
                throw;
            }
        }
    }
    return o;
}

void write_solve_report(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& o)
{
    const IsaptInstance& inst = o.instance;
    const RadarConstants k = inst.constants();
    const TauBounds tb = tau_bounds(inst.scenario, inst.u, k, inst.budget.p_p);
    out << "config hash        " << config_hash(config) << '\n';
    out << "channel seed       " << inst.channels.seed << '\n';
    out << "tau range [s]      " << format_number(tb.tau_min) << " .. " << format_number(tb.tau_max) << '\n';
    if (config.scheme != Scheme::baseline) {
        const DesignSolution& d = o.design;
        const double slot = slot_duration(d.tau_star, inst.scenario);
        out << "proposed design\n";
        out << "  tau* [s]         " << format_number(d.tau_star) << '\n';
        out << "  T(tau*) [s]      " << format_number(slot) << '\n';
        out << "  duty cycle       " << format_number(d.tau_star / slot) << '\n';
        out << "  amplitude [sqrt W] " << format_number(d.amplitude_star) << '\n';
        out << "  avg harvested [W] " << format_number(d.objective) << '\n';
        out << "  range rmse [m]   " << format_number(d.range_rmse) << '\n';
        out << "  SCA iterations   " << d.at_star.iterations << " (" << to_string(d.at_star.status) << ")\n";
        out << "  rank ratio       " << format_number(d.at_star.rank_ratio) << '\n';
        out << "  slack C1 range   " << format_number(d.slacks.range_accuracy) << '\n';
        out << "  slack C2 avg     " << format_number(d.slacks.average_power) << '\n';
        out << "  slack C3 peak    " << format_number(d.slacks.peak_power) << '\n';
        for (std::size_t m = 0; m < d.slacks.peak_input.size(); ++m) {
            out << "  slack C4 node " << m << "   " << format_number(d.slacks.peak_input[m]) << '\n';
        }
        out << "  slack C5 pulse   " << format_number(d.slacks.pulse_duration) << '\n';
        for (std::size_t m = 0; m < d.received_power.size(); ++m) {
            out << "  node " << m << " received [W] " << format_number(d.received_power[m]) << " harvested [W] "
                << format_number(d.harvested_power[m]) << '\n';
        }
    }
    if (o.has_baseline) {
        const BaselineSolution& b = o.baseline.best;
        out << "baseline design\n";
        out << "  tau* [s]         " << format_number(b.tau) << '\n';
        out << "  mixing rho       " << format_number(b.mixing_rho) << '\n';
        out << "  amplitude [sqrt W] " << format_number(b.amplitude) << '\n';
        out << "  avg harvested [W] " << format_number(b.objective) << '\n';
    }
}

void write_solve_curve(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& o)
{
    write_header(out, "isapt single-realization curve", "solve", config_hash(config));
    out << "# seed: " << o.instance.channels.seed << '\n';
    out << "tau_s,proposed_obj_W,status,iterations,rank_ratio,baseline_obj_W,mixing_rho\n";
    const std::size_t n = std::max(o.design.curve.size(), o.has_baseline ? o.baseline.curve.size() : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const bool hp = i < o.design.curve.size();
        const bool hb = o.has_baseline && i < o.baseline.curve.size();
        const double tau = hp ? o.design.curve[i].tau : o.baseline.curve[i].tau;
        out << format_number(tau) << ',';
        if (hp) {
            const CurvePoint& p = o.design.curve[i];
            out << format_number(p.objective) << ',' << to_string(p.status) << ',' << p.iterations << ','
                << format_number(p.rank_ratio) << ',';
        } else {
            out << "nan,none,0,nan,";
        }
        if (hb) {
            const BaselineSolution& b = o.baseline.curve[i];
            out << format_number(b.status == BaselineStatus::optimal ? b.objective : kNaN) << ','
                << format_number(b.mixing_rho) << '\n';
        } else {
            out << "nan,nan\n";
        }
    }
}

void write_channels(std::ostream& out, const ExperimentConfig& config, const ChannelSet& channels)
{
    write_header(out, "isapt channel dump", "channels", config_hash(config));
    out << "# seed: " << channels.seed << '\n';
    out << "m,n,re,im\n";
    for (std::size_t m = 0; m < channels.vectors.size(); ++m) {
        for (Eigen::Index n = 0; n < channels.vectors[m].size(); ++n) {
            out << m << ',' << n << ',' << format_number(channels.vectors[m][n].real()) << ','
                << format_number(channels.vectors[m][n].imag()) << '\n';
        }
    }
}

void write_beam(std::ostream& out, const ExperimentConfig& config, const SolveOutcome& o)
{
    write_header(out, "isapt transmit beam", "beam", config_hash(config));
    out << "scheme,n,re,im,amplitude\n";
    if (config.scheme != Scheme::baseline) {
        for (Eigen::Index n = 0; n < o.design.beam_star.size(); ++n) {
            out << "proposed," << n << ',' << format_number(o.design.beam_star[n].real()) << ','
                << format_number(o.design.beam_star[n].imag()) << ',' << format_number(o.design.amplitude_star)
                << '\n';
        }
    }
    if (o.has_baseline) {
        const BaselineSolution& b = o.baseline.best;
        for (Eigen::Index n = 0; n < b.beam.size(); ++n) {
            out << "baseline," << n << ',' << format_number(b.beam[n].real()) << ','
                << format_number(b.beam[n].imag()) << ',' << format_number(b.amplitude) << '\n';
        }
    }
}

}  // namespace isapt
