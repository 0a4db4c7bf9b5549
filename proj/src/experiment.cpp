#include "lab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "lab/correlation.hpp"
#include "lab/csv.hpp"
#include "lab/levelstats.hpp"
#include "lab/lindblad.hpp"
#include "lab/markov.hpp"
#include "lab/reduced.hpp"
#include "lab/runs.hpp"
#include "lab/svg.hpp"

namespace lab::cli {

namespace {

using nlohmann::json;

struct RecipeSpec {
    std::string description;
    json model_overrides;  // recipe-specific model defaults
    json default_options;
};

const std::map<std::string, RecipeSpec>& registry() {
    static const std::map<std::string, RecipeSpec> specs = {
        {"fig1a",
         {"entanglement growth G(t) and reduced-matrix elements for a pure product start",
          json::object(),
          {{"target_energy", 2.8361}, {"up_weight", 0.7}, {"g_stride", 1}}}},
        {"fig1b",
         {"same observables for the smoother eigenstate-window ensemble, plus the decay fit",
          json::object(),
          {{"window_min", 2.45},
           {"window_max", 3.21},
           {"up_weight", 0.7},
           {"g_stride", 2},
           {"floor_fraction", 0.1}}}},
        {"fig2",
         {"factorization test: both sides of the bath-contracted identity over time",
          json::object(),
          {{"use_ensemble", true},
           {"window_min", 2.45},
           {"window_max", 3.21},
           {"target_energy", 2.8361},
           {"up_weight", 0.7}}}},
        {"fig3",
         {"integrated level-spacing distributions and density of states at two couplings",
          json::object(),
          {{"epsilons", json::array({0.0, 0.2})},
           {"bins", 50},
           {"fit_degree", 7},
           {"s_max", 4.0},
           {"s_step", 0.04}}}},
        {"fig4",
         {"bath correlation function at an anchored time, with a regular-bath comparison",
          json::object(),
          {{"anchor_t", 100.0},
           {"tau_max", 20.0},
           {"tau_count", 201},
           {"window_min", 2.45},
           {"window_max", 3.21},
           {"up_weight", 0.7},
           {"compare_regular", true},
           {"envelope_bins", 12}}}},
        {"fig5",
         {"von Neumann entropy and reduced-matrix eigenvalues along the pure run",
          json::object(),
          {{"target_energy", 2.8361}, {"up_weight", 0.7}}}},
        {"fig6",
         {"bath eigenbasis expansion of the dominant reduced-bath eigenvectors",
          json::object(),
          {{"expansion_t", 200.0}, {"target_energy", 2.8361}, {"up_weight", 0.7}}}},
        {"fig7",
         {"transition matrix element statistics and the spectral correlation function",
          {{"N", 7}, {"L", 8}},
          {{"j_count", 50},
           {"bin_width_frac", 0.005},
           {"envelope_groups", 15},
           {"tau_max", 20.0},
           {"tau_count", 201}}}},
        {"eps_scan",
         {"level-statistics sweep over the coupling for several bath sizes",
          json::object(),
          {{"sizes", json::array({json::array({5, 6}), json::array({6, 7})})},
           {"eps_grid", json::array({0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.25, 0.3})},
           {"threshold", 0.05},
           {"fit_degree", 7},
           {"edge_discard_frac", 0.05},
           {"rate_scan", true},
           {"rate_eps_list", json::array({0.1, 0.15, 0.2})}}}},
        {"custom",
         {"configurable run: reduced-matrix series with optional G and entropy output",
          json::object(),
          {{"initial", "ensemble"},
           {"target_energy", 2.8361},
           {"window_min", 2.45},
           {"window_max", 3.21},
           {"up_weight", 0.7},
           {"g_stride", 0},
           {"entropy", true}}}},
    };
    return specs;
}

std::string joined_recipes() {
    std::string out;
    for (const auto& [name, spec] : registry()) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

int require_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

void apply_model(ops::ModelParams& model, const json& doc, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "J") model.hopping = require_number(value, where + ".J");
        else if (key == "U") model.interaction = require_number(value, where + ".U");
        else if (key == "L") model.sites = require_int(value, where + ".L");
        else if (key == "N") model.bosons = require_int(value, where + ".N");
        else if (key == "delta") model.splitting = require_number(value, where + ".delta");
        else if (key == "epsilon") model.coupling = require_number(value, where + ".epsilon");
        else throw ConfigError(where + "." + key + ": unknown key (valid: J, U, L, N, delta, epsilon)");
    }
}

void apply_grid(evo::TimeGrid& grid, const json& doc, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "t0") grid.t0 = require_number(value, where + ".t0");
        else if (key == "dt") grid.dt = require_number(value, where + ".dt");
        else if (key == "steps") grid.steps = require_int(value, where + ".steps");
        else throw ConfigError(where + "." + key + ": unknown key (valid: t0, dt, steps)");
    }
}

json model_to_json(const ops::ModelParams& m) {
    return {{"J", m.hopping},     {"U", m.interaction},  {"L", m.sites},
            {"N", m.bosons},      {"delta", m.splitting}, {"epsilon", m.coupling}};
}

json grid_to_json(const evo::TimeGrid& g) {
    return {{"t0", g.t0}, {"dt", g.dt}, {"steps", g.steps}};
}

}  // namespace

std::vector<std::string> recipe_names() {
    std::vector<std::string> names;
    for (const auto& [name, spec] : registry()) names.push_back(name);
    return names;
}

std::string recipe_description(const std::string& recipe) {
    const auto it = registry().find(recipe);
    if (it == registry().end()) {
        throw ConfigError("recipe '" + recipe + "' is unknown; valid recipes: " + joined_recipes());
    }
    return it->second.description;
}

ExperimentConfig default_config(const std::string& recipe) {
    const auto it = registry().find(recipe);
    if (it == registry().end()) {
        throw ConfigError("recipe '" + recipe + "' is unknown; valid recipes: " + joined_recipes());
    }
    ExperimentConfig config;
    config.recipe = recipe;
    if (!it->second.model_overrides.empty()) {
        apply_model(config.model, it->second.model_overrides, "defaults");
    }
    config.grid = evo::TimeGrid{0.0, 1.0, 201};
    config.output_dir = std::filesystem::path("out") / recipe;
    config.options = it->second.default_options;
    return config;
}

json to_json(const ExperimentConfig& config) {
    return {{"recipe", config.recipe},
            {"model", model_to_json(config.model)},
            {"grid", grid_to_json(config.grid)},
            {"output_dir", config.output_dir.string()},
            {"cache_dir", config.cache_dir.string()},
            {"options", config.options}};
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    if (!doc.contains("recipe") || !doc["recipe"].is_string()) {
        throw ConfigError("config.recipe: required string; valid recipes: " + joined_recipes());
    }
    ExperimentConfig config = default_config(doc["recipe"].get<std::string>());

    for (const auto& [key, value] : doc.items()) {
        if (key == "recipe") continue;
        if (key == "model") {
            apply_model(config.model, value, "config.model");
        } else if (key == "grid") {
            apply_grid(config.grid, value, "config.grid");
        } else if (key == "output_dir") {
            if (!value.is_string()) throw ConfigError("config.output_dir: expected a string");
            config.output_dir = value.get<std::string>();
        } else if (key == "cache_dir") {
            if (!value.is_string()) throw ConfigError("config.cache_dir: expected a string");
            config.cache_dir = value.get<std::string>();
        } else if (key == "options") {
            if (!value.is_object()) throw ConfigError("config.options: expected an object");
            for (const auto& [opt, opt_value] : value.items()) {
                if (!config.options.contains(opt)) {
                    std::string valid;
                    for (const auto& [k, v] : config.options.items()) {
                        if (!valid.empty()) valid += ", ";
                        valid += k;
                    }
                    throw ConfigError("config.options." + opt + ": unknown option for recipe '" +
                                      config.recipe + "' (valid: " + valid + ")");
                }
                config.options[opt] = opt_value;
            }
        } else {
            throw ConfigError("config." + key +
                              ": unknown key (valid: recipe, model, grid, output_dir, cache_dir, "
                              "options)");
        }
    }

    if (config.model.sites < 1) throw ConfigError("config.model.L: must be >= 1");
    if (config.model.bosons < 0) throw ConfigError("config.model.N: must be >= 0");
    try {
        fock::dimension(config.model.bosons, config.model.sites);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config.model: basis dimension not representable (") +
                          e.what() + ")");
    }
    if (config.grid.dt <= 0.0) throw ConfigError("config.grid.dt: must be positive");
    if (config.grid.steps < 1) throw ConfigError("config.grid.steps: must be >= 1");
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

namespace {

double fast_abs(const std::complex<double>& z) {
    return std::sqrt(z.real() * z.real() + z.imag() * z.imag());
}

struct RunContext {
    const ExperimentConfig& config;
    cache::EigenCache cache;
    std::ostream& log;
    std::vector<std::string> outputs;
    json results = json::object();

    explicit RunContext(const ExperimentConfig& cfg, std::ostream& out)
        : config(cfg), cache(cfg.cache_dir), log(out) {}

    std::filesystem::path path(const std::string& name) {
        outputs.push_back(name);
        return config.output_dir / name;
    }
};

std::vector<std::string> csv_meta(const RunContext& ctx, std::vector<std::string> extra = {}) {
    std::vector<std::string> meta = {
        std::string("generator=") + kCodeVersion,
        "recipe=" + ctx.config.recipe,
        "model=J:" + csv::format_double(ctx.config.model.hopping) +
            ",U:" + csv::format_double(ctx.config.model.interaction) +
            ",L:" + std::to_string(ctx.config.model.sites) +
            ",N:" + std::to_string(ctx.config.model.bosons) +
            ",delta:" + csv::format_double(ctx.config.model.splitting) +
            ",epsilon:" + csv::format_double(ctx.config.model.coupling)};
    meta.insert(meta.end(), extra.begin(), extra.end());
    return meta;
}

levels::Goe2Table goe2_table(RunContext& ctx) {
    if (ctx.cache.enabled()) {
        const auto file = ctx.cache.dir() / "goe2_table.tbl";
        if (std::filesystem::exists(file)) {
            try {
                std::ifstream in(file);
                return levels::Goe2Table::load(in);
            } catch (const std::exception& e) {
                ctx.log << "lab: regenerating 2xGOE table (" << e.what() << ")\n";
            }
        }
        ctx.log << "lab: generating 2xGOE reference table (seed "
                << levels::Goe2Table::kDefaultSeed << ")\n";
        const levels::Goe2Table table = levels::Goe2Table::generate();
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        table.save(out);
        return table;
    }
    return levels::Goe2Table::generate();
}

// --------------------------- shared emitters --------------------------------

void emit_rho_series(RunContext& ctx, const std::vector<Eigen::Matrix2cd>& rho_s,
                     const evo::TimeGrid& grid) {
    csv::Writer w(ctx.path("rho_s_elements.csv"),
                  {"t", "rho_uu", "rho_dd", "re_rho_ud", "im_rho_ud", "abs_rho_ud"},
                  csv_meta(ctx));
    svg::Series s_uu{"rho_uu", {}, {}};
    svg::Series s_dd{"rho_dd", {}, {}};
    svg::Series s_od{"abs_rho_ud", {}, {}};
    for (std::size_t k = 0; k < rho_s.size(); ++k) {
        const double t = grid.time(static_cast<int>(k));
        const auto& r = rho_s[k];
        w.row({t, r(0, 0).real(), r(1, 1).real(), r(0, 1).real(), r(0, 1).imag(),
               fast_abs(r(0, 1))});
        s_uu.x.push_back(t);
        s_uu.y.push_back(r(0, 0).real());
        s_dd.x.push_back(t);
        s_dd.y.push_back(r(1, 1).real());
        s_od.x.push_back(t);
        s_od.y.push_back(fast_abs(r(0, 1)));
    }
    w.close();
    svg::write_line_chart(ctx.path("rho_s_elements.svg"), {s_uu, s_dd, s_od},
                          {"reduced density matrix elements", "t", "matrix element"});
}

void emit_g_series(RunContext& ctx, const std::vector<double>& times,
                   const std::vector<double>& g) {
    csv::Writer w(ctx.path("g_of_t.csv"), {"t", "G"}, csv_meta(ctx));
    for (std::size_t k = 0; k < times.size(); ++k) w.row({times[k], g[k]});
    w.close();
    svg::write_line_chart(ctx.path("g_of_t.svg"), {{"G", times, g}},
                          {"entanglement measure", "t", "G"});
}

void emit_correlation(RunContext& ctx, const std::string& stem,
                      const corr::CorrelationSeries& series) {
    csv::Writer w(ctx.path(stem + ".csv"), {"tau", "re_alpha", "im_alpha"},
                  csv_meta(ctx, {"t_anchor=" + csv::format_double(series.t_anchor)}));
    svg::Series re{"re_alpha", {}, {}};
    svg::Series im{"im_alpha", {}, {}};
    for (std::size_t i = 0; i < series.taus.size(); ++i) {
        w.row({series.taus[i], series.values[i].real(), series.values[i].imag()});
        re.x.push_back(series.taus[i]);
        re.y.push_back(series.values[i].real());
        im.x.push_back(series.taus[i]);
        im.y.push_back(series.values[i].imag());
    }
    w.close();
    svg::write_line_chart(ctx.path(stem + ".svg"), {re, im},
                          {"bath correlation function", "tau", "alpha"});
}

// ------------------------------- recipes ------------------------------------

void run_time_series_recipe(RunContext& ctx, bool ensemble_initial) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;

    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const spectra::EigenSystem composite = runs::composite_eigensystem(cfg.model, &ctx.cache);

    evo::Ensemble initial;
    if (ensemble_initial) {
        initial = runs::window_ensemble(cfg.model, bath, opt.at("window_min").get<double>(),
                                        opt.at("window_max").get<double>(),
                                        opt.at("up_weight").get<double>());
        ctx.results["ensemble_size"] = initial.size();
    } else {
        initial = evo::uniform_ensemble({runs::pure_initial_state(
            cfg.model, bath, opt.at("target_energy").get<double>(),
            opt.at("up_weight").get<double>())});
        const int k = spectra::select_by_energy(bath, opt.at("target_energy").get<double>());
        ctx.results["bath_state_energy"] = bath.energies(k);
    }

    const int g_stride = opt.at("g_stride").get<int>();
    std::vector<Eigen::Matrix2cd> rho_s;
    std::vector<double> g_times;
    std::vector<double> g_values;
    evo::for_each_time(composite, initial, cfg.grid, [&](int k, double t, const evo::Ensemble& at) {
        rho_s.push_back(reduced::trace_out_bath(at));
        if (g_stride > 0 && k % g_stride == 0) {
            g_times.push_back(t);
            g_values.push_back(at.size() == 1 ? reduced::entanglement_G(at.members.front().state)
                                              : reduced::entanglement_G(at));
        }
    });

    emit_rho_series(ctx, rho_s, cfg.grid);
    if (g_stride > 0) emit_g_series(ctx, g_times, g_values);

    if (ensemble_initial) {
        std::vector<double> times;
        std::vector<double> offdiag;
        for (std::size_t k = 0; k < rho_s.size(); ++k) {
            times.push_back(cfg.grid.time(static_cast<int>(k)));
            offdiag.push_back(fast_abs(rho_s[k](0, 1)));
        }
        const lindblad::DecayFit fit =
            lindblad::fit_decay(times, offdiag, opt.at("floor_fraction").get<double>());
        ctx.results["decay_fit"] = {{"exponential", fit.exponential},
                                    {"rate", fit.rate},
                                    {"amplitude", fit.amplitude},
                                    {"rms_log_residual", fit.rms_log_residual}};
        ctx.results["final_populations"] = {rho_s.back()(0, 0).real(),
                                            rho_s.back()(1, 1).real()};

        // Lindblad comparator: same splitting, raising/lowering rates set to
        // the fitted decay rate, integrated from the exact initial rho_S.
        if (fit.exponential) {
            const auto model = lindblad::high_temperature_model(cfg.model.splitting, fit.rate);
            const auto lind = lindblad::integrate(model, rho_s.front(), cfg.grid);
            csv::Writer w(ctx.path("lindblad_rho.csv"),
                          {"t", "rho_uu", "rho_dd", "re_rho_ud", "im_rho_ud"},
                          csv_meta(ctx, {"rate=" + csv::format_double(fit.rate)}));
            svg::Series exact_od{"exact |rho_ud|", {}, {}};
            svg::Series lind_od{"lindblad |rho_ud|", {}, {}};
            double sup_diff = 0.0;
            for (std::size_t k = 0; k < lind.size(); ++k) {
                const double t = cfg.grid.time(static_cast<int>(k));
                w.row({t, lind[k](0, 0).real(), lind[k](1, 1).real(), lind[k](0, 1).real(),
                       lind[k](0, 1).imag()});
                exact_od.x.push_back(t);
                exact_od.y.push_back(offdiag[k]);
                lind_od.x.push_back(t);
                lind_od.y.push_back(fast_abs(lind[k](0, 1)));
                if (static_cast<int>(k) <= fit.window_end) {
                    sup_diff = std::max(sup_diff, std::abs(offdiag[k] - fast_abs(lind[k](0, 1))));
                }
            }
            w.close();
            svg::write_line_chart(ctx.path("lindblad_vs_exact.svg"), {exact_od, lind_od},
                                  {"exact vs Lindblad coherence decay", "t", "|rho_ud|"});
            ctx.results["lindblad_supnorm_diff"] = sup_diff;
            ctx.results["lindblad_supnorm_rel"] = sup_diff / offdiag.front();
        }
    }
}

void run_fig2(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const fock::FockBasis basis(cfg.model.bosons, cfg.model.sites);
    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const spectra::EigenSystem composite = runs::composite_eigensystem(cfg.model, &ctx.cache);
    const ops::SparseOperator lambda =
        ops::build_bath_observable(ops::BathObservable::a1dag_a2_a2dag_a1, basis);

    evo::Ensemble initial;
    if (opt.at("use_ensemble").get<bool>()) {
        initial = runs::window_ensemble(cfg.model, bath, opt.at("window_min").get<double>(),
                                        opt.at("window_max").get<double>(),
                                        opt.at("up_weight").get<double>());
    } else {
        initial = evo::uniform_ensemble({runs::pure_initial_state(
            cfg.model, bath, opt.at("target_energy").get<double>(),
            opt.at("up_weight").get<double>())});
    }

    const markov::FactorizationReport report =
        markov::factorization_test(composite, initial, lambda, cfg.grid);

    csv::Writer w(ctx.path("factorization.csv"),
                  {"t", "lhs_uu", "lhs_dd", "re_lhs_ud", "im_lhs_ud", "rhs_uu", "rhs_dd",
                   "re_rhs_ud", "im_rhs_ud", "residual_sum"},
                  csv_meta(ctx));
    svg::Series lhs_uu{"lhs_uu", {}, {}}, rhs_uu{"rhs_uu", {}, {}};
    svg::Series lhs_od{"re_lhs_ud", {}, {}}, rhs_od{"re_rhs_ud", {}, {}};
    for (const auto& p : report.points) {
        w.row({p.t, p.lhs(0, 0).real(), p.lhs(1, 1).real(), p.lhs(0, 1).real(), p.lhs(0, 1).imag(),
               p.rhs(0, 0).real(), p.rhs(1, 1).real(), p.rhs(0, 1).real(), p.rhs(0, 1).imag(),
               p.residual_sum});
        lhs_uu.x.push_back(p.t);
        lhs_uu.y.push_back(p.lhs(0, 0).real());
        rhs_uu.x.push_back(p.t);
        rhs_uu.y.push_back(p.rhs(0, 0).real());
        lhs_od.x.push_back(p.t);
        lhs_od.y.push_back(p.lhs(0, 1).real());
        rhs_od.x.push_back(p.t);
        rhs_od.y.push_back(p.rhs(0, 1).real());
    }
    w.close();
    svg::write_line_chart(ctx.path("factorization.svg"), {lhs_uu, rhs_uu, lhs_od, rhs_od},
                          {"factorization test: contracted bath observable", "t", "value"});

    const auto invariance = markov::bath_invariance_test(composite, initial, lambda, cfg.grid);
    csv::Writer wi(ctx.path("bath_invariance.csv"), {"t", "relative_deviation"}, csv_meta(ctx));
    svg::Series dev{"deviation", {}, {}};
    for (const auto& p : invariance) {
        wi.row({p.t, p.deviation});
        dev.x.push_back(p.t);
        dev.y.push_back(p.deviation);
    }
    wi.close();
    svg::write_line_chart(ctx.path("bath_invariance.svg"), {dev},
                          {"bath observable invariance", "t", "relative deviation"});

    ctx.results["time_avg_residual"] = report.time_avg_residual;
    ctx.results["time_avg_lhs"] = report.time_avg_lhs;
    ctx.results["residual_over_lhs"] = report.time_avg_residual / report.time_avg_lhs;
}

void run_fig3(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const fock::FockBasis basis(cfg.model.bosons, cfg.model.sites);
    const levels::Goe2Table table = goe2_table(ctx);
    const std::vector<double> s_grid =
        levels::default_s_grid(opt.at("s_max").get<double>(), opt.at("s_step").get<double>());
    const int bins = opt.at("bins").get<int>();
    const int fit_degree = opt.at("fit_degree").get<int>();

    json distances = json::array();
    std::vector<spectra::Histogram> dos;
    std::vector<double> eps_values;
    for (const auto& eps_json : opt.at("epsilons")) {
        const double eps = eps_json.get<double>();
        eps_values.push_back(eps);
        ops::ModelParams p = cfg.model;
        p.coupling = eps;
        const ops::SparseOperator h = ops::build_total_hamiltonian(p, basis);
        const spectra::EigenSystem es = spectra::eigenvalues_only(h);
        std::vector<double> energies(es.energies.data(), es.energies.data() + es.dim());
        const levels::UnfoldedSpectrum us = levels::unfold(energies, fit_degree);
        const levels::SpacingDistribution sd = levels::integrated_spacing(us, s_grid, table);
        dos.push_back(spectra::density_of_states(es, bins));

        const std::string stem = "spacing_eps" + csv::format_label(eps);
        csv::Writer w(ctx.path(stem + ".csv"), {"s", "I_emp", "I_GOE", "I_Poisson", "I_2GOE"},
                      csv_meta(ctx, {"epsilon=" + csv::format_double(eps)}));
        svg::Series emp{"empirical", sd.s_grid, sd.empirical};
        svg::Series goe{"GOE", sd.s_grid, sd.ref_goe};
        svg::Series goe2{"2xGOE", sd.s_grid, sd.ref_goe2};
        svg::Series poisson{"Poisson", sd.s_grid, sd.ref_poisson};
        for (std::size_t i = 0; i < sd.s_grid.size(); ++i) {
            w.row({sd.s_grid[i], sd.empirical[i], sd.ref_goe[i], sd.ref_poisson[i], sd.ref_goe2[i]});
        }
        w.close();
        svg::write_line_chart(ctx.path(stem + ".svg"), {emp, goe, goe2, poisson},
                              {"integrated level-spacing distribution (epsilon = " +
                                   csv::format_label(eps) + ")",
                               "s", "I(s)"});

        distances.push_back({{"epsilon", eps},
                             {"dist_goe", levels::goe_distance(sd, levels::Reference::goe)},
                             {"dist_goe2", levels::goe_distance(sd, levels::Reference::goe2)},
                             {"dist_poisson", levels::goe_distance(sd, levels::Reference::poisson)}});
    }

    csv::Writer wd(ctx.path("distances.csv"),
                   {"epsilon", "goe_distance", "goe2_distance", "poisson_distance"}, csv_meta(ctx));
    for (const auto& d : distances) {
        wd.row({d.at("epsilon").get<double>(), d.at("dist_goe").get<double>(),
                d.at("dist_goe2").get<double>(), d.at("dist_poisson").get<double>()});
    }
    wd.close();

    std::vector<svg::Series> dos_series;
    for (std::size_t i = 0; i < dos.size(); ++i) {
        csv::Writer w(ctx.path("dos_eps" + csv::format_label(eps_values[i]) + ".csv"),
                      {"energy", "weight"},
                      csv_meta(ctx, {"epsilon=" + csv::format_double(eps_values[i])}));
        for (std::size_t b = 0; b < dos[i].centers.size(); ++b) {
            w.row({dos[i].centers[b], dos[i].weights[b]});
        }
        w.close();
        dos_series.push_back(
            {"epsilon=" + csv::format_label(eps_values[i]), dos[i].centers, dos[i].weights});
    }
    svg::write_line_chart(ctx.path("dos.svg"), dos_series,
                          {"density of states", "E", "fraction per bin"});
    ctx.results["distances"] = distances;
}

void run_fig4(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const fock::FockBasis basis(cfg.model.bosons, cfg.model.sites);
    const int tau_count = opt.at("tau_count").get<int>();
    const evo::TimeGrid taus{0.0, opt.at("tau_max").get<double>() / (tau_count - 1), tau_count};
    const int envelope_bins = opt.at("envelope_bins").get<int>();

    const auto correlation_at = [&](const ops::ModelParams& model, double anchor_t) {
        const spectra::EigenSystem bath = runs::bath_eigensystem(model, &ctx.cache);
        const spectra::EigenSystem composite = runs::composite_eigensystem(model, &ctx.cache);
        const ops::SparseOperator hop =
            ops::build_bath_observable(ops::BathObservable::a1dag_a2, basis);
        const evo::Ensemble initial = runs::window_ensemble(
            model, bath, opt.at("window_min").get<double>(), opt.at("window_max").get<double>(),
            opt.at("up_weight").get<double>());
        const evo::Ensemble at_anchor = evo::evolve_ensemble_to(composite, initial, anchor_t);
        const reduced::BathMatrix rho_b = reduced::trace_out_system(at_anchor);
        return corr::correlation_time_domain(bath, hop, rho_b, taus, anchor_t);
    };

    const double anchor = opt.at("anchor_t").get<double>();
    const corr::CorrelationSeries main_series = correlation_at(cfg.model, anchor);
    emit_correlation(ctx, "correlation", main_series);
    const corr::CorrelationTime tstar = corr::correlation_time(main_series, envelope_bins);
    ctx.results["regular"] = tstar.regular;
    if (!tstar.regular) {
        ctx.results["tau_star"] = tstar.tau_star;
        ctx.results["extinction_time"] = tstar.extinction_time;
    }
    ctx.results["alpha0"] = fast_abs(main_series.values.front());

    if (opt.at("compare_regular").get<bool>()) {
        ops::ModelParams regular = cfg.model;
        regular.interaction = 0.0;
        const corr::CorrelationSeries reg_series = correlation_at(regular, anchor);
        emit_correlation(ctx, "correlation_regular", reg_series);
        const corr::CorrelationTime reg_tstar = corr::correlation_time(reg_series, envelope_bins);
        ctx.results["regular_bath_signal"] = reg_tstar.regular;
    }
}

void run_fig5(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const spectra::EigenSystem composite = runs::composite_eigensystem(cfg.model, &ctx.cache);
    const evo::StateVector psi0 =
        runs::pure_initial_state(cfg.model, bath, opt.at("target_energy").get<double>(),
                                 opt.at("up_weight").get<double>());

    csv::Writer w(ctx.path("entropy.csv"), {"t", "entropy", "w1", "w2"}, csv_meta(ctx));
    svg::Series s_ent{"S(t)", {}, {}};
    svg::Series s_w1{"w1", {}, {}};
    svg::Series s_w2{"w2", {}, {}};
    evo::for_each_time(composite, evo::uniform_ensemble({psi0}), cfg.grid,
                       [&](int, double t, const evo::Ensemble& at) {
                           const auto sd = reduced::decompose(reduced::trace_out_bath(at));
                           const double s = reduced::entropy(sd);
                           w.row({t, s, sd.weights(0), sd.weights(1)});
                           s_ent.x.push_back(t);
                           s_ent.y.push_back(s);
                           s_w1.x.push_back(t);
                           s_w1.y.push_back(sd.weights(0));
                           s_w2.x.push_back(t);
                           s_w2.y.push_back(sd.weights(1));
                       });
    w.close();
    svg::write_line_chart(ctx.path("entropy.svg"), {s_ent, s_w1, s_w2},
                          {"von Neumann entropy and reduced weights", "t", "value"});
}

void run_fig6(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const spectra::EigenSystem composite = runs::composite_eigensystem(cfg.model, &ctx.cache);
    const double target = opt.at("target_energy").get<double>();
    const evo::StateVector psi0 =
        runs::pure_initial_state(cfg.model, bath, target, opt.at("up_weight").get<double>());

    const double t_expand = opt.at("expansion_t").get<double>();
    const evo::StateVector psi_t = evo::evolve_to(composite, psi0, t_expand);
    const reduced::BathExpansion expansion =
        reduced::bath_eigenstate_expansion(reduced::trace_out_system(psi_t), bath);

    csv::Writer w(ctx.path("expansion.csv"), {"E_j", "abs2_c1", "abs2_c2"},
                  csv_meta(ctx, {"t=" + csv::format_double(t_expand)}));
    svg::Series c1{"|c_j(1)|^2", {}, {}};
    svg::Series c2{"|c_j(2)|^2", {}, {}};
    for (int j = 0; j < bath.dim(); ++j) {
        const double a1 = std::norm(expansion.coefficients(j, 0));
        const double a2 = expansion.weights.size() > 1 ? std::norm(expansion.coefficients(j, 1)) : 0.0;
        w.row({bath.energies(j), a1, a2});
        c1.x.push_back(bath.energies(j));
        c1.y.push_back(a1);
        c2.x.push_back(bath.energies(j));
        c2.y.push_back(a2);
    }
    w.close();
    svg::write_line_chart(ctx.path("expansion.svg"), {c1, c2},
                          {"bath eigenbasis expansion at t=" + csv::format_double(t_expand), "E_j",
                           "|c_j|^2"});

    // Fraction of each eigenvector's weight inside the three windows around
    // the initial energy (half-width 4 delta, centres E and E +- 2 delta).
    const double e_centre = bath.energies(spectra::select_by_energy(bath, target));
    const double d = cfg.model.splitting;
    json masses = json::array();
    for (Eigen::Index n = 0; n < expansion.weights.size(); ++n) {
        double inside = 0.0;
        for (int j = 0; j < bath.dim(); ++j) {
            const double e = bath.energies(j);
            const bool in_windows = std::abs(e - e_centre) <= 4 * d ||
                                    std::abs(e - (e_centre + 2 * d)) <= 4 * d ||
                                    std::abs(e - (e_centre - 2 * d)) <= 4 * d;
            if (in_windows) inside += std::norm(expansion.coefficients(j, n));
        }
        masses.push_back(inside);
    }
    ctx.results["weights"] = std::vector<double>(expansion.weights.data(),
                                                 expansion.weights.data() + expansion.weights.size());
    ctx.results["window_mass"] = masses;
    ctx.results["centre_energy"] = e_centre;
}

void run_fig7(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const fock::FockBasis basis(cfg.model.bosons, cfg.model.sites);
    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const ops::SparseOperator hop = ops::build_bath_observable(ops::BathObservable::a1dag_a2, basis);

    // Initial states: the j_count eigenstates nearest the spectral median.
    const double median = bath.energies(bath.dim() / 2);
    const int j_count = std::min(opt.at("j_count").get<int>(), bath.dim());
    std::vector<int> order(static_cast<std::size_t>(bath.dim()));
    for (int k = 0; k < bath.dim(); ++k) order[static_cast<std::size_t>(k)] = k;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(bath.energies(a) - median) < std::abs(bath.energies(b) - median);
    });
    std::vector<int> j_set(order.begin(), order.begin() + j_count);
    std::sort(j_set.begin(), j_set.end());

    const double span = bath.energies(bath.dim() - 1) - bath.energies(0);
    const double bin_width = span * opt.at("bin_width_frac").get<double>();
    const corr::MatrixElementStats stats = corr::matrix_element_statistics(
        bath, hop, j_set, bin_width, opt.at("envelope_groups").get<int>());

    csv::Writer w(ctx.path("v_of_de.csv"), {"dE", "V"},
                  csv_meta(ctx, {"bin_width=" + csv::format_double(bin_width),
                                 "j_count=" + std::to_string(j_count)}));
    for (std::size_t i = 0; i < stats.bin_centers.size(); ++i) {
        w.row({stats.bin_centers[i], stats.v_mean[i]});
    }
    w.close();
    svg::write_line_chart(ctx.path("v_of_de.svg"),
                          {{"V(dE)", stats.bin_centers, stats.v_mean}},
                          {"transition matrix element statistics", "dE", "V", true});

    const int tau_count = opt.at("tau_count").get<int>();
    const evo::TimeGrid taus{0.0, opt.at("tau_max").get<double>() / (tau_count - 1), tau_count};
    const corr::CorrelationSeries series =
        corr::correlation_spectral(bath, hop, j_set[static_cast<std::size_t>(j_count / 2)], taus);
    emit_correlation(ctx, "correlation_spectral", series);

    ctx.results["gaussian_sigma"] = stats.fit.sigma;
    ctx.results["gaussian_amplitude"] = stats.fit.amplitude;
    ctx.results["tau_star"] = stats.tau_star;
}

void run_eps_scan(RunContext& ctx) {
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const levels::Goe2Table table = goe2_table(ctx);
    const double threshold = opt.at("threshold").get<double>();
    const int fit_degree = opt.at("fit_degree").get<int>();
    std::vector<double> eps_grid;
    for (const auto& e : opt.at("eps_grid")) eps_grid.push_back(e.get<double>());

    json scan = json::array();
    for (const auto& size : opt.at("sizes")) {
        if (!size.is_array() || size.size() != 2) {
            throw ConfigError("options.sizes: expected [N, L] pairs");
        }
        ops::ModelParams p = cfg.model;
        p.bosons = size[0].get<int>();
        p.sites = size[1].get<int>();
        const int dim = 2 * static_cast<int>(fock::dimension(p.bosons, p.sites));
        const int edge = static_cast<int>(
            std::lround(opt.at("edge_discard_frac").get<double>() * dim));
        ctx.log << "lab: eps scan at N=" << p.bosons << " L=" << p.sites << "\n";
        const levels::CriticalResult result =
            levels::critical_epsilon(p, eps_grid, threshold, table, fit_degree, edge);

        const std::string stem =
            "eps_scan_N" + std::to_string(p.bosons) + "_L" + std::to_string(p.sites);
        csv::Writer w(ctx.path(stem + ".csv"),
                      {"epsilon", "goe_distance", "goe2_distance", "poisson_distance"},
                      csv_meta(ctx, {"N=" + std::to_string(p.bosons),
                                     "L=" + std::to_string(p.sites),
                                     "threshold=" + csv::format_double(threshold)}));
        svg::Series dist{"dist to GOE", {}, {}};
        for (const auto& point : result.curve) {
            w.row({point.epsilon, point.dist_goe, point.dist_goe2, point.dist_poisson});
            dist.x.push_back(point.epsilon);
            dist.y.push_back(point.dist_goe);
        }
        w.close();
        svg::write_line_chart(ctx.path(stem + ".svg"), {dist},
                              {"GOE distance vs coupling (N=" + std::to_string(p.bosons) +
                                   ", L=" + std::to_string(p.sites) + ")",
                               "epsilon", "sup-norm distance"});

        json entry = {{"N", p.bosons}, {"L", p.sites}, {"converged", result.converged}};
        if (result.converged) entry["epsilon_cr"] = result.epsilon_cr;
        scan.push_back(entry);
    }
    ctx.results["scan"] = scan;

    // Decay-rate scaling over the coupling at the configured model size.
    if (opt.at("rate_scan").get<bool>()) {
        std::vector<double> rate_eps;
        for (const auto& e : opt.at("rate_eps_list")) rate_eps.push_back(e.get<double>());
        ctx.log << "lab: decay-rate scan over " << rate_eps.size() << " couplings\n";
        const auto rate_table =
            lindblad::epsilon_scaling_check(cfg.model, rate_eps, cfg.grid, &ctx.cache);
        csv::Writer w(ctx.path("rate_scaling.csv"), {"epsilon", "rate", "rate_over_eps2"},
                      csv_meta(ctx));
        svg::Series norm{"rate/eps^2", {}, {}};
        for (const auto& row : rate_table.rows) {
            w.row({row.epsilon, row.rate, row.rate_over_eps2});
            norm.x.push_back(row.epsilon);
            norm.y.push_back(row.rate_over_eps2);
        }
        w.close();
        svg::write_line_chart(ctx.path("rate_scaling.svg"), {norm},
                              {"decay rate over coupling squared", "epsilon", "rate/eps^2"});
        ctx.results["rate_scan"] = {{"relative_spread", rate_table.relative_spread},
                                    {"proportional", rate_table.proportional}};
    }
}

void run_custom(RunContext& ctx) {
    const std::string initial = ctx.config.options.at("initial").get<std::string>();
    if (initial != "pure" && initial != "ensemble") {
        throw ConfigError("options.initial: must be \"pure\" or \"ensemble\"");
    }
    const bool ensemble = initial == "ensemble";
    const auto& cfg = ctx.config;
    const auto& opt = cfg.options;
    const spectra::EigenSystem bath = runs::bath_eigensystem(cfg.model, &ctx.cache);
    const spectra::EigenSystem composite = runs::composite_eigensystem(cfg.model, &ctx.cache);

    evo::Ensemble init;
    if (ensemble) {
        init = runs::window_ensemble(cfg.model, bath, opt.at("window_min").get<double>(),
                                     opt.at("window_max").get<double>(),
                                     opt.at("up_weight").get<double>());
    } else {
        init = evo::uniform_ensemble({runs::pure_initial_state(
            cfg.model, bath, opt.at("target_energy").get<double>(),
            opt.at("up_weight").get<double>())});
    }

    const int g_stride = opt.at("g_stride").get<int>();
    const bool with_entropy = opt.at("entropy").get<bool>();
    std::vector<Eigen::Matrix2cd> rho_s;
    std::vector<double> g_times, g_values;
    std::vector<double> ent;
    evo::for_each_time(composite, init, cfg.grid, [&](int k, double t, const evo::Ensemble& at) {
        rho_s.push_back(reduced::trace_out_bath(at));
        if (with_entropy) ent.push_back(reduced::entropy(reduced::decompose(rho_s.back())));
        if (g_stride > 0 && k % g_stride == 0) {
            g_times.push_back(t);
            g_values.push_back(at.size() == 1 ? reduced::entanglement_G(at.members.front().state)
                                              : reduced::entanglement_G(at));
        }
    });
    emit_rho_series(ctx, rho_s, cfg.grid);
    if (g_stride > 0) emit_g_series(ctx, g_times, g_values);
    if (with_entropy) {
        csv::Writer w(ctx.path("entropy.csv"), {"t", "entropy"}, csv_meta(ctx));
        svg::Series s{"S(t)", {}, {}};
        for (std::size_t k = 0; k < ent.size(); ++k) {
            const double t = cfg.grid.time(static_cast<int>(k));
            w.row({t, ent[k]});
            s.x.push_back(t);
            s.y.push_back(ent[k]);
        }
        w.close();
        svg::write_line_chart(ctx.path("entropy.svg"), {s}, {"entropy", "t", "S"});
    }
}

}  // namespace

RunResult run(const ExperimentConfig& config, std::ostream& log) {
    if (registry().find(config.recipe) == registry().end()) {
        throw ConfigError("recipe '" + config.recipe + "' is unknown; valid recipes: " +
                          joined_recipes());
    }
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(config.output_dir);

    RunContext ctx(config, log);
    if (config.recipe == "fig1a") run_time_series_recipe(ctx, false);
    else if (config.recipe == "fig1b") run_time_series_recipe(ctx, true);
    else if (config.recipe == "fig2") run_fig2(ctx);
    else if (config.recipe == "fig3") run_fig3(ctx);
    else if (config.recipe == "fig4") run_fig4(ctx);
    else if (config.recipe == "fig5") run_fig5(ctx);
    else if (config.recipe == "fig6") run_fig6(ctx);
    else if (config.recipe == "fig7") run_fig7(ctx);
    else if (config.recipe == "eps_scan") run_eps_scan(ctx);
    else if (config.recipe == "custom") run_custom(ctx);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunResult result;
    result.outputs = ctx.outputs;
    result.manifest = {{"schema_version", kManifestSchemaVersion},
                       {"code_version", kCodeVersion},
                       {"recipe", config.recipe},
                       {"model", model_to_json(config.model)},
                       {"grid", grid_to_json(config.grid)},
                       {"options", config.options},
                       {"seeds", {{"goe2_table", levels::Goe2Table::kDefaultSeed}}},
                       {"cache",
                        {{"dir", config.cache_dir.string()},
                         {"hits", ctx.cache.hits()},
                         {"misses", ctx.cache.misses()}}},
                       {"outputs", ctx.outputs},
                       {"results", ctx.results},
                       {"wall_time_s", wall}};

    std::ofstream mf(config.output_dir / "manifest.json", std::ios::binary | std::ios::trunc);
    mf << result.manifest.dump(2) << "\n";
    if (!mf) throw std::runtime_error("run: failed to write manifest");
    result.outputs.push_back("manifest.json");
    return result;
}

}  // namespace lab::cli
