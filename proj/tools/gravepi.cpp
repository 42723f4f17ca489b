/*
* Copyright (C) 2026 gravepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

// gravepi: command-line front end for the metapopulation dengue toolkit.
#include "gravepi/gravepi.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

using namespace gravepi;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t default_seed = 20140601;

struct Globals {
    std::uint64_t seed = default_seed;
    std::string out    = "out";
    double dt          = 0.1;
};

std::size_t workers()
{
    if (const char* env = std::getenv("GRAVEPI_WORKERS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) {
                return static_cast<std::size_t>(n);
            }
        }
        catch (const std::exception&) {
        }
        throw ConfigError("GRAVEPI_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

class Output {
public:
    explicit Output(const std::string& dir)
        : dir_(dir)
    {
        fs::create_directories(dir_);
    }

    std::ofstream open(const std::string& name)
    {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + (dir_ / name).string());
        }
        written_.push_back(name);
        return f;
    }

    void svg(const std::string& name, const svg::Chart& chart)
    {
        auto f = open(name);
        svg::write(f, chart);
    }

    void run_info(const std::string& command, const std::vector<std::pair<std::string, std::string>>& extra)
    {
        auto f = open("run_info.csv");
        csv::Writer w(f);
        w.row("key", "value");
        w.row("command", command);
        for (const auto& [k, v] : extra) {
            w.row(k, v);
        }
    }

    void report() const
    {
        for (const auto& n : written_) {
            std::cout << "  wrote " << (dir_ / n).string() << "\n";
        }
    }

private:
    fs::path dir_;
    std::vector<std::string> written_;
};

std::string num(double v)
{
    return csv::format_number(v);
}

std::pair<std::string, std::string> parse_assignment(const std::string& text)
{
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("expected NAME=VALUE, got '" + text + "'");
    }
    return {text.substr(0, eq), text.substr(eq + 1)};
}

// ---------------------------------------------------------------- patches

struct PatchOptions {
    std::string provinces;
    std::string centers;
    std::string mapping;
    std::string scheme = "three_patch";
    std::string cases;
    std::string window = "seasonal_2002_2008";
};

void add_patch_options(CLI::App* cmd, PatchOptions& o, bool with_cases)
{
    cmd->add_option("--provinces", o.provinces, "provinces.csv (province_id,name,region_class,population,lat,lon)");
    cmd->add_option("--centers", o.centers, "centers.csv (patch_id,lat,lon,population); used instead of --provinces");
    cmd->add_option("--mapping", o.mapping, "patches.csv (patch_id,province_id) for a custom grouping");
    cmd->add_option("--scheme", o.scheme,
                    "patch grouping: three_patch | per_province | with_cases (provinces reporting cases in --window)")
        ->capture_default_str();
    if (with_cases) {
        cmd->add_option("--cases", o.cases, "cases.csv (week,province_id,count)");
        cmd->add_option("--window", o.window,
                        "weeks used: seasonal_2002_2008 | epidemic_2000_2001 | FIRST-LAST [1-based weeks]")
            ->capture_default_str();
    }
}

struct Patches {
    std::vector<PatchGeometry> geoms;
    std::optional<data::PatchPlan> plan;
    std::optional<data::CaseSeries> cases;
};

Patches load_patches(const PatchOptions& o)
{
    Patches out;
    if (!o.cases.empty()) {
        out.cases = data::load_cases(o.cases);
    }
    if (!o.centers.empty()) {
        out.geoms = data::parse_centers(csv::read_file(o.centers));
        return out;
    }
    if (o.provinces.empty()) {
        throw ConfigError("either --provinces or --centers is required");
    }
    auto provinces = data::load_provinces(o.provinces);
    if (!o.mapping.empty()) {
        out.plan = data::build_patches(provinces, data::Scheme::custom,
                                       data::parse_patch_mapping(csv::read_file(o.mapping)));
    }
    else if (o.scheme == "three_patch") {
        out.plan = data::build_patches(provinces, data::Scheme::three_patch);
    }
    else if (o.scheme == "per_province") {
        out.plan = data::build_patches(provinces, data::Scheme::per_province);
    }
    else if (o.scheme == "with_cases") {
        if (!out.cases) {
            throw ConfigError("--scheme with_cases needs --cases");
        }
        auto keep = data::provinces_with_cases(*out.cases, data::parse_window(o.window));
        const std::set<std::string> keep_set(keep.begin(), keep.end());
        std::vector<data::ProvinceRecord> subset;
        std::vector<std::string> dropped;
        for (const auto& p : provinces) {
            (keep_set.count(p.province_id) ? subset.push_back(p) : dropped.push_back(p.province_id));
        }
        out.plan         = data::build_patches(subset, data::Scheme::per_province);
        out.plan->dropped = dropped;
    }
    else {
        throw ConfigError("unknown --scheme '" + o.scheme + "'");
    }
    for (const auto& w : out.plan->warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    out.geoms = out.plan->geometries();
    return out;
}

EpidemicSeries observed_series(const Patches& p, const std::string& window_text)
{
    if (!p.cases) {
        throw ConfigError("--cases is required");
    }
    if (!p.plan) {
        throw ConfigError("case data needs --provinces to map provinces to patches");
    }
    return data::select_window(data::aggregate_cases(*p.cases, *p.plan), data::parse_window(window_text));
}

// ----------------------------------------------------------- model params

struct ModelOptions {
    double beta0 = 0.3;
    double eps   = 0.1;
    double phi   = 0.0;
    double beta_h = 0.3;
    bool no_seasonal = false;
    std::string coupling = "identity";
    double weight        = 0.001;
    GravityParams gravity{1.0, 1.0, 2.0, 1.0};
    std::string distance = "haversine";
    std::vector<std::string> params;
};

void add_model_options(CLI::App* cmd, ModelOptions& o, bool values)
{
    if (values) {
        cmd->add_option("--beta0", o.beta0, "base host-to-vector transmission rate beta0 [1/day]")->capture_default_str();
        cmd->add_option("--eps", o.eps, "seasonal amplitude of the transmission rate [1/day]")->capture_default_str();
        cmd->add_option("--phi", o.phi, "seasonal phase offset [days, modulo 365]")->capture_default_str();
        cmd->add_option("--beta-h", o.beta_h, "vector-to-host transmission rate [1/day]")->capture_default_str();
        cmd->add_option("--weight", o.weight, "off-diagonal weight for --coupling uniform [dimensionless]")
            ->capture_default_str();
        cmd->add_option("--alpha", o.gravity.alpha, "gravity source-population exponent [dimensionless]")
            ->capture_default_str();
        cmd->add_option("--beta", o.gravity.beta, "gravity destination-population exponent [dimensionless]")
            ->capture_default_str();
        cmd->add_option("--gamma", o.gravity.gamma, "gravity distance-decay exponent [dimensionless]")
            ->capture_default_str();
        cmd->add_option("--theta", o.gravity.theta, "gravity scale factor [dimensionless]")->capture_default_str();
        cmd->add_option("--param", o.params,
                        "extra parameter NAME=VALUE, repeatable; NAME may carry a :patch_id suffix (e.g. beta0:jungle=0.35)");
    }
    cmd->add_flag("--no-seasonal", o.no_seasonal, "use constant transmission beta0 (non-seasonal model)");
    cmd->add_option("--coupling", o.coupling, "coupling matrix: identity | uniform | gravity")
        ->check(CLI::IsMember({"identity", "uniform", "gravity"}))
        ->capture_default_str();
    cmd->add_option("--distance", o.distance, "gravity distance: haversine [km] | euclidean [coordinate units]")
        ->check(CLI::IsMember({"haversine", "euclidean"}))
        ->capture_default_str();
}

fit::ModelConfig model_config(const std::vector<PatchGeometry>& geoms, const ModelOptions& o, double dt)
{
    fit::ModelConfig cfg;
    cfg.geoms = geoms;
    cfg.params.assign(geoms.size(), DiseaseParams{});
    cfg.seasonal = !o.no_seasonal;
    cfg.coupling = o.coupling == "uniform" ? fit::CouplingKind::uniform
                   : o.coupling == "gravity" ? fit::CouplingKind::gravity
                                             : fit::CouplingKind::identity;
    cfg.uniform_weight                = o.weight;
    cfg.gravity                       = o.gravity;
    cfg.gravity_options.distance_mode = o.distance == "euclidean" ? DistanceMode::euclidean : DistanceMode::haversine;
    cfg.dt                            = dt;
    return cfg;
}

fit::ParamValues model_values(const ModelOptions& o)
{
    fit::ParamValues v = {{"beta0", o.beta0}, {"eps", o.no_seasonal ? 0.0 : o.eps}, {"phi", o.phi}, {"beta_h", o.beta_h}};
    for (const auto& a : o.params) {
        auto [k, val] = parse_assignment(a);
        v.emplace_back(k, csv::parse_double(val));
    }
    return v;
}

void write_matrix(std::ostream& out, const CouplingMatrix& m, const std::vector<PatchGeometry>& geoms)
{
    csv::Writer w(out);
    std::vector<std::string> header{"patch_id"};
    for (const auto& g : geoms) {
        header.push_back(g.patch_id);
    }
    w.row(header);
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<std::string> row{geoms[i].patch_id};
        for (std::size_t j = 0; j < m.size(); ++j) {
            row.push_back(num(m(i, j)));
        }
        w.row(row);
    }
}

svg::Chart series_chart(const EpidemicSeries& s, const std::string& title, const std::string& x, const std::string& y)
{
    svg::Chart c{title, x, y, {}};
    for (std::size_t p = 0; p < s.patches(); ++p) {
        c.lines.push_back({s.patch_ids[p], s.times, s.values[p]});
    }
    return c;
}

// -------------------------------------------------------------- synthetic

struct SyntheticOptions {
    std::string mode = "gravity";
    double weight    = 0.01;
    GravityParams gravity{1.0, 1.0, 2.0, 1.0};
    double cap           = 0.01;
    std::size_t followers = 99;
    double horizon       = 2000.0;
    double beta_v        = 0.3;
    double beta_h        = 0.3;
    std::string sweep;
    std::vector<double> values = {0.1, 0.5, 1.0, 2.0};
    double distance_unit       = synthetic::half_width;
};

void write_scenario(Output& out, const synthetic::Scenario& sc)
{
    auto f = out.open("scenario.csv");
    csv::Writer w(f);
    w.row("patch_id", "x", "y", "population");
    for (const auto& g : sc.geoms) {
        w.row(g.patch_id, g.x, g.y, g.population);
    }
}

int cmd_synthetic(const Globals& g, const SyntheticOptions& o, CLI::App* cmd)
{
    Output out(g.out);
    auto sc = synthetic::generate_scenario(o.followers, g.seed);
    synthetic::RunOptions ro;
    ro.beta_v  = o.beta_v;
    ro.beta_h  = o.beta_h;
    ro.horizon = o.horizon;
    ro.dt      = g.dt;
    write_scenario(out, sc);

    if (!o.sweep.empty()) {
        // Unset exponents default to the sweep baseline alpha=0.5, beta=1, gamma=0.5, theta=0.5.
        GravityParams fixed{0.5, 1.0, 0.5, 0.5};
        auto given = [&](const char* name) { return cmd->get_option(name)->count() > 0; };
        if (given("--alpha")) {
            fixed.alpha = o.gravity.alpha;
        }
        if (given("--beta")) {
            fixed.beta = o.gravity.beta;
        }
        if (given("--gamma")) {
            fixed.gamma = o.gravity.gamma;
        }
        if (given("--theta")) {
            fixed.theta = o.gravity.theta;
        }
        synthetic::SweepOptions so;
        so.run           = ro;
        so.cap           = o.cap;
        so.distance_unit = o.distance_unit;
        so.workers       = workers();
        const auto which = synthetic::parse_sweep_param(o.sweep);
        auto curves      = synthetic::parameter_sweep(sc, which, o.values, fixed, so);

        auto f = out.open("sweep.csv");
        csv::Writer w(f);
        w.row(o.sweep, "patch_id", "distance", "correlation");
        auto s = out.open("sweep_summary.csv");
        csv::Writer ws(s);
        ws.row(o.sweep, "mean_correlation", "decay_steepness", "max_weight");
        svg::Chart chart{"Correlation with city 1 vs distance, " + o.sweep + " sweep", "distance [grid units]",
                         "Pearson correlation", {}};
        for (const auto& c : curves) {
            svg::Line line{o.sweep + "=" + num(c.value), {}, {}, true};
            for (const auto& p : c.curve) {
                w.row(c.value, p.patch_id, p.distance, p.correlation ? num(*p.correlation) : std::string("NA"));
                if (p.correlation) {
                    line.x.push_back(p.distance);
                    line.y.push_back(*p.correlation);
                }
            }
            ws.row(c.value, synthetic::mean_correlation(c.curve), synthetic::decay_steepness(c.curve),
                   c.coupling.max_off_diagonal());
            chart.lines.push_back(std::move(line));
        }
        f.close();
        s.close();
        out.svg("sweep.svg", chart);
        out.run_info("synthetic", {{"seed", std::to_string(g.seed)},
                                   {"sweep", o.sweep},
                                   {"alpha", num(fixed.alpha)},
                                   {"beta", num(fixed.beta)},
                                   {"gamma", num(fixed.gamma)},
                                   {"theta", num(fixed.theta)},
                                   {"cap", num(o.cap)},
                                   {"distance_unit", num(o.distance_unit)},
                                   {"dt", num(g.dt)},
                                   {"horizon", num(o.horizon)}});
        out.report();
        return 0;
    }

    std::vector<std::pair<std::string, std::string>> info = {{"seed", std::to_string(g.seed)}, {"mode", o.mode}};
    CouplingMatrix m = CouplingMatrix::identity(sc.geoms.size());
    if (o.mode == "uniform") {
        m = uniform_matrix(sc.geoms.size(), o.weight);
        info.emplace_back("weight", num(o.weight));
    }
    else {
        auto cg = synthetic::capped_gravity(sc, o.gravity, o.cap);
        m       = cg.matrix;
        info.insert(info.end(), {{"alpha", num(o.gravity.alpha)},
                                 {"beta", num(o.gravity.beta)},
                                 {"gamma", num(o.gravity.gamma)},
                                 {"theta", num(o.gravity.theta)},
                                 {"cap", num(o.cap)},
                                 {"implied_theta", num(cg.implied_theta)}});
    }
    info.insert(info.end(), {{"dt", num(g.dt)}, {"horizon", num(o.horizon)}});
    auto series = synthetic::run(sc, m, ro);
    {
        auto f = out.open("trajectories.csv");
        data::write_series(f, series, "day");
    }
    auto corr   = synthetic::correlation_vs_distance(series, sc.geoms, "1");
    auto delays = synthetic::peak_delay(series, "1");
    {
        auto f = out.open("correlation.csv");
        csv::Writer w(f);
        w.row("patch_id", "distance", "correlation");
        for (const auto& p : corr) {
            w.row(p.patch_id, p.distance, p.correlation ? num(*p.correlation) : std::string("NA"));
        }
    }
    svg::Line delay_line{"followers", {}, {}, true};
    {
        auto f = out.open("delay.csv");
        csv::Writer w(f);
        w.row("patch_id", "distance", "weight", "delay");
        for (std::size_t i = 1; i < sc.geoms.size(); ++i) {
            const double d = distance(sc.geoms[0], sc.geoms[i], DistanceMode::euclidean);
            w.row(sc.geoms[i].patch_id, d, m(i, 0), delays[i] ? num(*delays[i]) : std::string("NA"));
            if (delays[i]) {
                delay_line.x.push_back(d);
                delay_line.y.push_back(*delays[i]);
            }
        }
    }
    {
        auto f = out.open("coupling.csv");
        write_matrix(f, m, sc.geoms);
    }
    svg::Chart curves{"I_h per city (" + o.mode + " links)", "day", "infected hosts I_h", {}};
    for (std::size_t i = 0; i < series.patches(); ++i) {
        curves.lines.push_back({series.patch_ids[i], series.times, series.values[i]});
    }
    out.svg("trajectories.svg", curves);
    svg::Chart cc{"Correlation with city 1 vs distance", "distance [grid units]", "Pearson correlation", {}};
    svg::Line cl{"followers", {}, {}, true};
    for (const auto& p : corr) {
        if (p.correlation) {
            cl.x.push_back(p.distance);
            cl.y.push_back(*p.correlation);
        }
    }
    cc.lines.push_back(std::move(cl));
    out.svg("correlation.svg", cc);
    out.svg("delay.svg", {"Peak delay behind city 1 vs distance", "distance [grid units]", "delay [days]", {delay_line}});
    out.run_info("synthetic", info);
    out.report();
    return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
    PatchOptions patches;
    ModelOptions model;
    std::size_t weeks = 52;
    std::string seed_patch;
    double seed_count = 1.0;
};

int cmd_simulate(const Globals& g, const SimulateOptions& o)
{
    Output out(g.out);
    auto patches = load_patches(o.patches);
    auto cfg     = model_config(patches.geoms, o.model, g.dt);
    auto values  = model_values(o.model);
    if (cfg.coupling == fit::CouplingKind::gravity) {
        values.insert(values.end(), {{"alpha", o.model.gravity.alpha},
                                     {"beta", o.model.gravity.beta},
                                     {"gamma", o.model.gravity.gamma},
                                     {"theta", o.model.gravity.theta}});
    }
    std::vector<PatchState> init;
    std::string init_note;
    double t_start = 0.0;
    if (patches.cases) {
        auto obs  = observed_series(patches, o.patches.window);
        init      = fit::initial_from_data(cfg, obs);
        t_start   = 7.0 * (obs.times.front() - 1.0);
        init_note = "first observed week of " + o.patches.window;
    }
    else {
        const std::string seed_patch = o.seed_patch.empty() ? patches.geoms.front().patch_id : o.seed_patch;
        bool found                   = false;
        for (const auto& geom : patches.geoms) {
            const bool here = geom.patch_id == seed_patch;
            found           = found || here;
            init.push_back(seeded_state(geom.population, 3.0, here ? o.seed_count : 0.0));
        }
        if (!found) {
            throw ConfigError("unknown --seed-patch '" + seed_patch + "'");
        }
        init_note = num(o.seed_count) + " infected in " + seed_patch;
    }
    auto model = fit::resolve(cfg, values);
    IntegrationOptions io;
    io.dt       = g.dt;
    io.seasonal = cfg.seasonal;
    for (const auto& geom : patches.geoms) {
        io.patch_ids.push_back(geom.patch_id);
    }
    auto traj = integrate(init, model.params, model.coupling, t_start, t_start + 7.0 * static_cast<double>(o.weeks), io);
    auto inc  = weekly_incidence(traj);
    {
        auto f = out.open("trajectory.csv");
        csv::Writer w(f);
        w.row("day", "patch_id", "S_v", "E_v", "I_v", "S_h", "E_h", "I_h", "R_h");
        for (std::size_t k = 0; k < traj.length(); ++k) {
            for (std::size_t i = 0; i < traj.patches(); ++i) {
                const auto& s = traj.states[k][i];
                w.row(traj.times[k], traj.patch_ids[i], s.s_v, s.e_v, s.i_v, s.s_h, s.e_h, s.i_h, s.r_h);
            }
        }
    }
    auto with_total = inc;
    auto total      = inc.total("total");
    with_total.patch_ids.push_back("total");
    with_total.values.push_back(total.values[0]);
    {
        auto f = out.open("incidence.csv");
        data::write_series(f, with_total, "week");
    }
    {
        auto f = out.open("coupling.csv");
        write_matrix(f, model.coupling, patches.geoms);
    }
    if (patches.plan) {
        auto f = out.open("centers.csv");
        data::write_centers(f, *patches.plan);
        auto m = out.open("patches.csv");
        data::write_patch_mapping(m, *patches.plan);
    }
    out.svg("incidence.svg", series_chart(patches.geoms.size() > 12 ? total : with_total, "Weekly model incidence",
                                          "week", "new host infections per week"));
    std::vector<std::pair<std::string, std::string>> info = {{"seed", std::to_string(g.seed)},
                                                             {"seasonal", cfg.seasonal ? "true" : "false"},
                                                             {"coupling", o.model.coupling},
                                                             {"dt", num(g.dt)},
                                                             {"weeks", std::to_string(o.weeks)},
                                                             {"initial", init_note}};
    for (const auto& [k, v] : values) {
        info.emplace_back(k, num(v));
    }
    out.run_info("simulate", info);
    out.report();
    return 0;
}

// -------------------------------------------------------------------- fit

struct FitOptions {
    PatchOptions patches;
    ModelOptions model;
    std::string mode      = "nonlinked";
    std::string objective = "least_squares";
    std::size_t iterations = 10000;
    std::size_t top_k      = 5;
    bool aggregate         = false;
    std::vector<std::string> samples;
};

std::map<std::string, fit::Sampler> default_samplers(const std::string& mode, bool seasonal)
{
    std::map<std::string, fit::Sampler> s;
    s["beta0"] = fit::Sampler::uniform(0, 1);
    if (seasonal) {
        s["eps"] = fit::Sampler::uniform(0, 1);
        s["phi"] = fit::Sampler::circular(365);
    }
    if (mode == "gravity") {
        s["alpha"] = fit::Sampler::uniform(0, 1);
        s["beta"]  = fit::Sampler::uniform(0, 1);
        s["gamma"] = fit::Sampler::uniform(0, 2);
        s["theta"] = fit::Sampler::log_decade(-10, 0);
    }
    if (mode == "two_stage") {
        s["alpha"] = fit::Sampler::uniform(0, 1);
        s["beta"]  = fit::Sampler::uniform(0, 1);
        s["gamma"] = fit::Sampler::uniform(0, 2);
        s["theta"] = fit::Sampler::log_decade(-10, 0);
    }
    return s;
}

void write_candidates(csv::Writer& w, const std::string& group, const fit::FitResult& r)
{
    for (std::size_t k = 0; k < r.top_k.size(); ++k) {
        const auto& c = r.top_k[k];
        for (const auto& [name, v] : c.params) {
            w.row(group, static_cast<long long>(k + 1), c.score, static_cast<long long>(c.iteration), name, v);
        }
    }
}

void write_ranges(csv::Writer& w, const std::string& group, const fit::FitResult& r)
{
    std::map<std::string, std::vector<double>> by_name;
    std::vector<std::string> order;
    for (const auto& c : r.top_k) {
        for (const auto& [name, v] : c.params) {
            if (!by_name.count(name)) {
                order.push_back(name);
            }
            by_name[name].push_back(v);
        }
    }
    for (const auto& name : order) {
        const auto& v = by_name[name];
        const bool circular = name == "phi" || name.rfind("phi:", 0) == 0;
        if (circular) {
            auto [lo, hi] = fit::circular_range(v);
            w.row(group, name, lo, hi, "circular");
        }
        else {
            w.row(group, name, *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()), "linear");
        }
    }
}

int cmd_fit(const Globals& g, const FitOptions& o)
{
    Output out(g.out);
    auto patches  = load_patches(o.patches);
    auto observed = observed_series(patches, o.patches.window);
    auto cfg      = model_config(patches.geoms, o.model, g.dt);
    cfg.t_start   = 7.0 * (observed.times.front() - 1.0);
    if (o.mode == "nonlinked") {
        cfg.coupling = fit::CouplingKind::identity;
    }
    else {
        cfg.coupling = fit::CouplingKind::gravity;
    }

    auto samplers = default_samplers(o.mode, cfg.seasonal);
    for (const auto& s : o.samples) {
        auto [name, text] = parse_assignment(s);
        samplers[name]    = fit::Sampler::parse(text);
    }
    // Fixed values supplied with --param act as degenerate samplers.
    for (const auto& a : o.model.params) {
        auto [name, text] = parse_assignment(a);
        samplers[name]    = fit::Sampler::fixed(csv::parse_double(text));
    }

    fit::FitProblem base;
    base.model      = cfg;
    base.iterations = o.iterations;
    base.objective  = fit::parse_objective(o.objective);
    base.rng_seed   = g.seed;
    base.top_k      = o.top_k;
    base.aggregate  = o.aggregate;
    base.workers    = workers();

    auto results = out.open("fit_results.csv");
    csv::Writer rw(results);
    rw.row("group", "rank", "score", "iteration", "parameter", "value");
    auto ranges = out.open("fit_ranges.csv");
    csv::Writer gw(ranges);
    gw.row("group", "parameter", "low", "high", "kind");
    auto diag = out.open("diagnostics.csv");
    csv::Writer dw(diag);
    dw.row("group", "series", "peak_week_error", "magnitude_ratio", "best_score", "evaluations", "rejected", "failures");

    EpidemicSeries best;
    best.times      = observed.times;
    best.provenance = Provenance::model;
    std::vector<std::string> failure_log;

    auto record = [&](const std::string& group, const fit::FitResult& r) {
        write_candidates(rw, group, r);
        write_ranges(gw, group, r);
        for (const auto& d : r.diagnostics) {
            dw.row(group, d.series, static_cast<long long>(d.peak_week_error),
                   d.magnitude_ratio ? num(*d.magnitude_ratio) : std::string("NA"), r.best_score,
                   static_cast<long long>(r.evaluations), static_cast<long long>(r.rejected),
                   static_cast<long long>(r.failures));
        }
        for (const auto& f : r.failure_log) {
            failure_log.push_back(group + ": " + f);
        }
        std::cout << group << ": best score " << num(r.best_score) << " (" << r.evaluations << " scored, " << r.rejected
                  << " rejected, " << r.failures << " failed)\n";
        for (const auto& [name, v] : r.best_params) {
            std::cout << "  " << name << " = " << num(v) << "\n";
        }
    };

    auto free_list = [&](const std::vector<std::string>& skip) {
        std::vector<fit::FreeParam> fp;
        for (const auto& [name, s] : samplers) {
            if (std::find(skip.begin(), skip.end(), name) == skip.end()) {
                fp.push_back({name, s});
            }
        }
        return fp;
    };

    if (o.mode == "nonlinked") {
        // Each patch fitted on its own.
        for (std::size_t i = 0; i < patches.geoms.size(); ++i) {
            fit::FitProblem p = base;
            p.model.geoms     = {patches.geoms[i]};
            p.model.params    = {cfg.params[i]};
            p.observed        = observed;
            p.observed.patch_ids = {observed.patch_ids[observed.index_of(patches.geoms[i].patch_id)]};
            p.observed.values    = {observed.values[observed.index_of(patches.geoms[i].patch_id)]};
            p.free_params        = free_list({});
            p.aggregate          = false;
            auto r               = fit::fit(p);
            record(patches.geoms[i].patch_id, r);
            best.patch_ids.push_back(patches.geoms[i].patch_id);
            best.values.push_back(r.best_incidence.values[0]);
        }
    }
    else if (o.mode == "gravity") {
        fit::FitProblem p = base;
        p.observed        = observed;
        p.free_params     = free_list({});
        auto r            = fit::fit(p);
        record("gravity", r);
        best.patch_ids = r.best_incidence.patch_ids;
        best.values    = r.best_incidence.values;
    }
    else {
        fit::FitProblem p = base;
        p.observed        = observed;
        p.free_params     = free_list({"alpha", "beta", "gamma", "theta"});
        auto r = fit::fit_two_stage_gravity(p, samplers.at("beta"), samplers.at("theta"), samplers.at("alpha"),
                                            samplers.at("gamma"));
        record("stage1", r.stage1);
        record("stage2", r.stage2);
        best.patch_ids = r.stage2.best_incidence.patch_ids;
        best.values    = r.stage2.best_incidence.values;
    }
    results.close();
    ranges.close();
    diag.close();
    {
        auto f = out.open("observed.csv");
        data::write_series(f, observed, "week");
    }
    {
        auto f = out.open("best_incidence.csv");
        data::write_series(f, best, "week");
    }
    if (!failure_log.empty()) {
        auto f = out.open("failures.txt");
        for (const auto& line : failure_log) {
            f << line << "\n";
        }
    }
    svg::Chart chart{"Observed (points) and best-fit weekly incidence", "week", "cases per week", {}};
    auto obs_plot  = o.aggregate || observed.patches() > 6 ? observed.total() : observed;
    auto best_plot = o.aggregate || best.patches() > 6 ? best.total() : best;
    for (std::size_t p = 0; p < obs_plot.patches(); ++p) {
        chart.lines.push_back({obs_plot.patch_ids[p] + " data", obs_plot.times, obs_plot.values[p], true});
        chart.lines.push_back({best_plot.patch_ids[p] + " model", best_plot.times, best_plot.values[p]});
    }
    out.svg("fit.svg", chart);
    std::vector<std::pair<std::string, std::string>> info = {{"seed", std::to_string(g.seed)},
                                                             {"mode", o.mode},
                                                             {"objective", o.objective},
                                                             {"iterations", std::to_string(o.iterations)},
                                                             {"window", o.patches.window},
                                                             {"seasonal", cfg.seasonal ? "true" : "false"},
                                                             {"aggregate", o.aggregate ? "true" : "false"},
                                                             {"dt", num(g.dt)}};
    for (const auto& [name, s] : samplers) {
        info.emplace_back("sampler:" + name, s.describe());
    }
    out.run_info("fit", info);
    out.report();
    return 0;
}

// ---------------------------------------------------------------- climate

int cmd_climate(const Globals& g, const std::string& input)
{
    Output out(g.out);
    auto series = data::load_climate(input);
    auto f      = out.open("climate_fit.csv");
    csv::Writer w(f);
    w.row("patch_id", "t0_f", "eps_f", "sine_coefficient_f", "pct_variation", "residual_sse", "samples");
    auto cf = out.open("climate_curve.csv");
    csv::Writer cw(cf);
    cw.row("patch_id", "day", "tmin_f", "fit_f");
    svg::Chart chart{"Minimum temperature and sinusoidal fit", "day of year", "T_min [F]", {}};
    for (const auto& s : series) {
        auto fit = climate::fit_sinusoid(s);
        for (const auto& warn : fit.warnings) {
            std::cerr << "warning: " << warn << "\n";
        }
        w.row(fit.label, fit.t0, fit.eps, fit.sine_coefficient,
              fit.pct_variation ? num(*fit.pct_variation) : std::string("NA"), fit.residual_sse,
              static_cast<long long>(fit.samples));
        svg::Line fitted{s.label + " fit", {}, {}};
        for (std::size_t k = 0; k < s.days.size(); ++k) {
            cw.row(s.label, s.days[k], s.tmin[k], fit.at(s.days[k]));
            fitted.x.push_back(s.days[k]);
            fitted.y.push_back(fit.at(s.days[k]));
        }
        chart.lines.push_back({s.label, s.days, s.tmin, true});
        chart.lines.push_back(std::move(fitted));
        std::cout << fit.label << ": T0 = " << num(fit.t0) << " F, eps = " << num(fit.eps) << " F";
        if (fit.pct_variation) {
            std::cout << ", variation = " << num(*fit.pct_variation) << " %";
        }
        std::cout << "\n";
    }
    f.close();
    cf.close();
    out.svg("climate.svg", chart);
    out.run_info("climate", {{"input", input}});
    out.report();
    return 0;
}

// ---------------------------------------------------------------- gravity

struct GravityCmdOptions {
    PatchOptions patches;
    bool synthetic_scenario = false;
    std::size_t followers   = 99;
    GravityParams params{1.0, 1.0, 2.0, 1.0};
    std::string distance;
    std::string focal;
    bool normalize = false;
    double diagonal = 1.0;
    std::string sweep;
    std::vector<double> values;
};

int cmd_gravity(const Globals& g, const GravityCmdOptions& o)
{
    Output out(g.out);
    std::vector<PatchGeometry> geoms;
    std::string mode_name = o.distance;
    if (o.synthetic_scenario) {
        geoms = synthetic::generate_scenario(o.followers, g.seed).geoms;
        if (mode_name.empty()) {
            mode_name = "euclidean";
        }
    }
    else {
        geoms = load_patches(o.patches).geoms;
        if (mode_name.empty()) {
            mode_name = "haversine";
        }
    }
    GravityOptions go;
    go.distance_mode  = mode_name == "euclidean" ? DistanceMode::euclidean : DistanceMode::haversine;
    go.normalize_rows = o.normalize;
    go.diagonal       = o.diagonal;
    std::string focal = o.focal;
    if (focal.empty()) {
        focal = std::max_element(geoms.begin(), geoms.end(), [](const auto& a, const auto& b) {
                    return a.population < b.population;
                })->patch_id;
    }

    std::vector<double> values = {0.0};
    if (!o.sweep.empty()) {
        if (o.sweep != "alpha" && o.sweep != "beta" && o.sweep != "gamma" && o.sweep != "theta") {
            throw ConfigError("--sweep must be alpha, beta, gamma or theta");
        }
        if (o.values.empty()) {
            throw ConfigError("--sweep needs --values");
        }
        values = o.values;
    }
    auto f = out.open("weight_vs_distance.csv");
    csv::Writer w(f);
    w.row(o.sweep.empty() ? std::string("run") : o.sweep, "patch_id", "distance", "weight", "relative_weight");
    svg::Chart chart{"Gravity weight from " + focal + " vs distance (scaled to each curve's maximum)",
                     go.distance_mode == DistanceMode::haversine ? "distance [km]" : "distance [grid units]",
                     "relative weight", {}};
    for (double v : values) {
        GravityParams gp = o.params;
        if (o.sweep == "alpha") {
            gp.alpha = v;
        }
        else if (o.sweep == "beta") {
            gp.beta = v;
        }
        else if (o.sweep == "gamma") {
            gp.gamma = v;
        }
        else if (o.sweep == "theta") {
            gp.theta = v;
        }
        auto m     = gravity_matrix(geoms, gp, go);
        auto curve = weight_vs_distance(m, geoms, focal, go.distance_mode);
        double top = 0.0;
        for (const auto& p : curve) {
            top = std::max(top, p.weight);
        }
        svg::Line line{o.sweep.empty() ? std::string("weights") : o.sweep + "=" + num(v), {}, {}, true};
        for (const auto& p : curve) {
            const double rel = top > 0.0 ? p.weight / top : 0.0;
            w.row(v, p.patch_id, p.distance, p.weight, rel);
            line.x.push_back(p.distance);
            line.y.push_back(rel);
        }
        chart.lines.push_back(std::move(line));
        if (o.sweep.empty()) {
            auto mf = out.open("matrix.csv");
            write_matrix(mf, m, geoms);
        }
        else {
            auto mf = out.open("matrix_" + o.sweep + "_" + num(v) + ".csv");
            write_matrix(mf, m, geoms);
        }
    }
    f.close();
    out.svg("gravity.svg", chart);
    out.run_info("gravity", {{"seed", std::to_string(g.seed)},
                             {"alpha", num(o.params.alpha)},
                             {"beta", num(o.params.beta)},
                             {"gamma", num(o.params.gamma)},
                             {"theta", num(o.params.theta)},
                             {"distance", mode_name},
                             {"focal", focal},
                             {"sweep", o.sweep}});
    out.report();
    return 0;
}

// --------------------------------------------------------------- fixtures

int cmd_fixtures(const Globals& g, double noise)
{
    Output out(g.out);
    auto provinces = fixtures::provinces(g.seed);
    auto cases     = fixtures::cases(provinces, g.seed);
    {
        auto f = out.open("provinces.csv");
        data::write_provinces(f, provinces);
    }
    {
        auto f = out.open("cases.csv");
        data::write_cases(f, cases);
    }
    auto plan = data::build_patches(provinces, data::Scheme::three_patch);
    {
        auto f = out.open("patches.csv");
        data::write_patch_mapping(f, plan);
    }
    {
        auto f = out.open("centers.csv");
        data::write_centers(f, plan);
    }
    std::vector<climate::TemperatureSeries> climate;
    for (const auto& ref : fixtures::reference_climate()) {
        climate.push_back(fixtures::temperature(ref, noise, g.seed));
    }
    {
        auto f = out.open("climate.csv");
        fixtures::write_climate(f, climate);
    }
    out.run_info("fixtures", {{"seed", std::to_string(g.seed)}, {"climate_noise_f", num(noise)}});
    out.report();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gravepi: gravity-linked metapopulation vector-host epidemic toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file of option values; command-line flags take precedence over it");

    Globals g;
    app.add_option("--seed", g.seed, "random seed (integer); every randomized output depends only on it")
        ->capture_default_str();
    app.add_option("--out", g.out, "output directory, created if absent")->capture_default_str();
    app.add_option("--dt", g.dt, "integration step [days]")->check(CLI::PositiveNumber)->capture_default_str();

    // synthetic
    SyntheticOptions so;
    auto* syn = app.add_subcommand("synthetic", "100-city driver/follower experiments (uniform or gravity links, sweeps)");
    syn->add_option("--mode", so.mode, "link model: uniform | gravity")
        ->check(CLI::IsMember({"uniform", "gravity"}))
        ->capture_default_str();
    syn->add_option("--weight", so.weight, "uniform off-diagonal weight [dimensionless]")->capture_default_str();
    syn->add_option("--alpha", so.gravity.alpha, "gravity source exponent [dimensionless]")->capture_default_str();
    syn->add_option("--beta", so.gravity.beta, "gravity destination exponent [dimensionless]")->capture_default_str();
    syn->add_option("--gamma", so.gravity.gamma, "gravity distance exponent [dimensionless]")->capture_default_str();
    syn->add_option("--theta", so.gravity.theta, "gravity scale [dimensionless]")->capture_default_str();
    syn->add_option("--cap", so.cap, "largest off-diagonal gravity weight after rescaling [dimensionless]")
        ->capture_default_str();
    syn->add_option("--followers", so.followers, "number of follower cities [count]")->capture_default_str();
    syn->add_option("--horizon", so.horizon, "simulated time [days]")->capture_default_str();
    syn->add_option("--beta-v", so.beta_v, "constant host-to-vector transmission rate [1/day]")->capture_default_str();
    syn->add_option("--beta-h", so.beta_h, "vector-to-host transmission rate [1/day]")->capture_default_str();
    syn->add_option("--sweep", so.sweep, "sweep one gravity parameter: alpha | gamma | theta")
        ->check(CLI::IsMember({"alpha", "gamma", "theta"}));
    syn->add_option("--values", so.values, "comma-separated sweep values [dimensionless]")
        ->delimiter(',')
        ->capture_default_str();
    syn->add_option("--distance-unit", so.distance_unit, "length scale dividing distances in sweeps [grid units]")
        ->capture_default_str();

    // simulate
    SimulateOptions sim;
    auto* simc = app.add_subcommand("simulate", "integrate the patch model and write trajectories and weekly incidence");
    add_patch_options(simc, sim.patches, true);
    add_model_options(simc, sim.model, true);
    simc->add_option("--weeks", sim.weeks, "simulated span [weeks]")->capture_default_str();
    simc->add_option("--seed-patch", sim.seed_patch, "patch holding the initial infections when --cases is absent");
    simc->add_option("--seed-count", sim.seed_count, "initially infected hosts in --seed-patch [individuals]")
        ->capture_default_str();

    // fit
    FitOptions fo;
    auto* fitc = app.add_subcommand("fit", "random-search calibration against weekly case counts");
    add_patch_options(fitc, fo.patches, true);
    add_model_options(fitc, fo.model, false);
    fitc->add_option("--param", fo.model.params, "hold a parameter fixed, NAME=VALUE, repeatable");
    fitc->add_option("--mode", fo.mode,
                     "nonlinked (each patch alone) | gravity (all gravity parameters at once) | two_stage "
                     "(alpha=gamma=1 first, then alpha and gamma)")
        ->check(CLI::IsMember({"nonlinked", "gravity", "two_stage"}))
        ->capture_default_str();
    fitc->add_option("--sample", fo.samples,
                     "sampler NAME=uniform(a,b) | circular(0,365) | log_decade(lo,hi) | fixed(v), repeatable");
    fitc->add_option("--objective", fo.objective, "least_squares | pearson_chi2")
        ->check(CLI::IsMember({"least_squares", "ls", "pearson_chi2", "chi2"}))
        ->capture_default_str();
    fitc->add_option("--iterations", fo.iterations, "random draws [count]")->check(CLI::PositiveNumber)->capture_default_str();
    fitc->add_option("--top-k", fo.top_k, "ranked candidates reported [count]")->capture_default_str();
    fitc->add_flag("--aggregate", fo.aggregate, "score the sum over patches instead of each patch");

    // climate
    std::string climate_input;
    auto* cli = app.add_subcommand("climate", "fit T(t) = T0 + eps sin(2 pi t / 365) to daily minimum temperatures");
    cli->add_option("--input", climate_input, "climate.csv (date,patch_id,tmin_f) [F]")->required();

    // gravity
    GravityCmdOptions go;
    auto* grav = app.add_subcommand("gravity", "gravity coupling matrices and weight-vs-distance data");
    add_patch_options(grav, go.patches, false);
    grav->add_flag("--synthetic", go.synthetic_scenario, "use the synthetic 100-city scenario (seeded by --seed)");
    grav->add_option("--followers", go.followers, "follower cities with --synthetic [count]")->capture_default_str();
    grav->add_option("--alpha", go.params.alpha, "source-population exponent [dimensionless]")->capture_default_str();
    grav->add_option("--beta", go.params.beta, "destination-population exponent [dimensionless]")->capture_default_str();
    grav->add_option("--gamma", go.params.gamma, "distance-decay exponent [dimensionless]")->capture_default_str();
    grav->add_option("--theta", go.params.theta, "scale factor [dimensionless]")->capture_default_str();
    grav->add_option("--distance", go.distance, "haversine [km] | euclidean [coordinate units]")
        ->check(CLI::IsMember({"haversine", "euclidean"}));
    grav->add_option("--focal", go.focal, "patch whose row is plotted (default: most populous)");
    grav->add_flag("--normalize", go.normalize, "divide each row by its sum");
    grav->add_option("--diagonal", go.diagonal, "diagonal entry P_ii [dimensionless]")->capture_default_str();
    grav->add_option("--sweep", go.sweep, "vary one parameter: alpha | beta | gamma | theta");
    grav->add_option("--values", go.values, "comma-separated values for --sweep")->delimiter(',');

    // fixtures
    double noise = 1.0;
    auto* fix    = app.add_subcommand("fixtures", "write the synthetic Peru-shaped provinces, cases and climate files");
    fix->add_option("--noise", noise, "climate noise standard deviation [F]")->capture_default_str();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*syn) {
            return cmd_synthetic(g, so, syn);
        }
        if (*simc) {
            return cmd_simulate(g, sim);
        }
        if (*fitc) {
            return cmd_fit(g, fo);
        }
        if (*cli) {
            return cmd_climate(g, climate_input);
        }
        if (*grav) {
            return cmd_gravity(g, go);
        }
        if (*fix) {
            return cmd_fixtures(g, noise);
        }
    }
    catch (const NumericalBlowup& e) {
        std::cerr << "error: " << e.what() << " (failure time " << e.time() << " days)\n";
        return 3;
    }
    catch (const AllFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
