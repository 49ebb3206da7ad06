#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "levymfg/config.hpp"
#include "levymfg/ergodic.hpp"
#include "levymfg/game.hpp"
#include "levymfg/nplayer.hpp"
#include "levymfg/reflect.hpp"
#include "levymfg/solver.hpp"
#include "levymfg/stationary.hpp"

using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

mfg::Config load_config(const CommonArgs& args) {
    auto cfg = mfg::Config::from_file(args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw mfg::ConfigError("--set expects section.key=value, got: " + kv);
        cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // environment overrides are deliberately limited to these two knobs
    if (const char* w = std::getenv("LEVYMFG_WORKERS")) cfg.apply_override("mc.workers", w);
    if (const char* d = std::getenv("LEVYMFG_OUTPUT_DIR")) cfg.apply_override("output.dir", d);
    return cfg;
}

std::filesystem::path output_dir(const mfg::Config& cfg) {
    std::filesystem::path dir = cfg.get_string("output.dir", ".");
    std::filesystem::create_directories(dir);
    return dir;
}

// fixed shortest-round-trip formatting so reruns are bit-identical
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json stamp(const mfg::Config& cfg, const mfg::McSettings& mc, const std::string& sub) {
    return json{{"subcommand", sub},
                {"config_hash", cfg.hash()},
                {"seed", mc.seed},
                {"workers", mc.workers}};
}

void emit(const json& out, const std::filesystem::path& path) {
    std::ofstream file(path);
    file << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
}

const mfg::CompoundPoissonTwoExp& require_cp(const mfg::LevyModel& model,
                                             const std::string& who) {
    const auto* cp = std::get_if<mfg::CompoundPoissonTwoExp>(&model);
    if (!cp) throw mfg::ConfigError("model.family: " + who + " needs compound_poisson");
    return *cp;
}

double require_positive(const mfg::Config& cfg, const std::string& key, double fallback) {
    const double v = cfg.get_double(key, fallback);
    if (!(v > 0)) throw mfg::ConfigError(key + " must be positive, got " + num(v));
    return v;
}

int run_solve_discounted(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto& cp = require_cp(model, "the closed-form discounted solver");
    const auto cost = mfg::cost_from_config(cfg);
    const auto mode = mfg::mode_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);
    const double eps = require_positive(cfg, "solver.eps", 0.1);
    mfg::SolveOptions opts;
    opts.damping = cfg.get_double("solver.damping", 0.5);
    opts.tol = require_positive(cfg, "solver.tol", 1e-9);
    opts.max_iter = static_cast<int>(cfg.get_int("solver.max_iter", 200));
    const double a_lo = cfg.get_double("solver.grid_a_lo", -8.0);
    const double b_hi = cfg.get_double("solver.grid_b_hi", 8.0);
    const int n = static_cast<int>(cfg.get_int("solver.grid_n", 5));
    if (a_lo > 0 || b_hi < 0) throw mfg::ConfigError("solver grid must straddle zero");

    const auto result = mfg::multi_start(cp, cost, eps, mfg::grid_inits(a_lo, b_hi, n),
                                         opts, mode);
    if (result.equilibria.empty())
        throw mfg::ConvergenceError("no start converged to an equilibrium");

    const auto dir = output_dir(cfg);
    const auto csv_path = dir / "solve_discounted_trace.csv";
    {
        std::ofstream csv(csv_path);
        csv << "equilibrium_index,step,a,b\n";
        for (std::size_t i = 0; i < result.equilibria.size(); ++i) {
            const auto& tr = result.equilibria[i].trace;
            for (std::size_t k = 0; k < tr.size(); ++k)
                csv << i << "," << k << "," << num(tr[k].first) << ","
                    << num(tr[k].second) << "\n";
        }
    }

    json out = stamp(cfg, mc, "solve-discounted");
    out["mode"] =
        mode == mfg::ConstantsMode::LegacyTables ? "legacy_tables" : "consistent";
    out["eps"] = eps;
    out["starts"] = result.starts;
    out["failures"] = result.failures;
    out["trace_csv_path"] = csv_path.string();
    out["equilibria"] = json::array();
    for (const auto& r : result.equilibria)
        out["equilibria"].push_back({{"a", r.a_star},
                                     {"b", r.b_star},
                                     {"p", r.p_star},
                                     {"residual", r.fixed_point_residual},
                                     {"iterations", r.iterations},
                                     {"newton_fallback", r.newton_fallback}});
    emit(out, dir / "solve_discounted.json");
    return 0;
}

int run_solve_ergodic(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto* st = std::get_if<mfg::StrictlyStable>(&model);
    if (!st) throw mfg::ConfigError("model.family: the closed-form ergodic solver needs stable");
    const auto cost = mfg::cost_from_config(cfg);
    if (cost.q_u != cost.q_d)
        throw mfg::ConfigError("cost: the closed-form ergodic solver needs q_u == q_d");
    if (cost.h != mfg::FieldWeight::OnePlusAbs || cost.f != mfg::FieldFunction::Square)
        throw mfg::ConfigError(
            "cost: the closed-form ergodic solver is specific to h = one_plus_abs, f = square");
    const auto mc = mfg::mc_from_config(cfg);

    const auto eq =
        mfg::stable_ergodic_equilibrium(st->alpha, st->c_plus, st->c_minus, cost.q_u);

    json out = stamp(cfg, mc, "solve-ergodic");
    out["a_star"] = eq.a_star;
    out["b_star"] = eq.b_star;
    out["d_star"] = eq.d_star;
    out["rho"] = eq.rho;
    out["p_star"] = eq.p_star;
    out["j_value"] = eq.j_value;
    out["loss_rate_unit_band"] = eq.loss_rate_1;
    out["stationarity_residual"] = eq.stationarity_residual;
    out["legacy_display_residual"] = eq.legacy_display_residual;

    if (cfg.get_bool("ergodic.mc_verify", false)) {
        mfg::ErgodicOptions eopts;
        eopts.horizon = mc.horizon;
        eopts.grid_step = mc.grid_step;
        eopts.seed = mc.seed;
        eopts.workers = mc.workers;
        const auto est =
            mfg::ergodic_cost_mc(model, cost, eq.a_star, eq.b_star, eq.p_star, eopts);
        out["mc"] = {{"ratio", est.ratio},
                     {"stderr", est.stderr_},
                     {"batches", est.cycle_count},
                     {"batch_means", est.batch_means},
                     {"batch_correlation", est.batch_correlation}};
        out["mc_gap_sigma"] =
            est.stderr_ > 0 ? (est.ratio - eq.j_value) / est.stderr_ : 0.0;
    }
    emit(out, output_dir(cfg) / "solve_ergodic.json");
    return 0;
}

int run_best_response(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto& cp = require_cp(model, "the threshold solver");
    const auto cost = mfg::cost_from_config(cfg);
    const auto mode = mfg::mode_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);
    const double eps = require_positive(cfg, "solver.eps", 0.1);
    double delta;
    if (cfg.has("solver.delta")) {
        delta = require_positive(cfg, "solver.delta", 0.0);
    } else {
        if (cost.q_u != cost.q_d)
            throw mfg::ConfigError("cost: the threshold solver needs q_u == q_d");
        const double p = cfg.get_double("solver.p", 0.0);
        delta = eps * cost.q_u / (2.0 * mfg::apply(cost.h, p));
    }

    const auto con = mfg::cp_threshold_constants(cp, eps, mode);
    const auto sol = mfg::cp_best_response(cp, eps, delta, mode);
    if (!sol.converged)
        throw mfg::ConvergenceError("threshold solve not converged, residuals " +
                                    num(sol.residual_a) + ", " + num(sol.residual_b));

    json out = stamp(cfg, mc, "best-response");
    out["mode"] =
        mode == mfg::ConstantsMode::LegacyTables ? "legacy_tables" : "consistent";
    out["eps"] = eps;
    out["delta"] = delta;
    out["a_star"] = sol.a_star;
    out["b_star"] = sol.b_star;
    out["residual_a"] = sol.residual_a;
    out["residual_b"] = sol.residual_b;
    out["iterations"] = sol.iterations;
    out["newton_used"] = sol.newton_used;
    out["constants"] = {{"r_i", con.r_i}, {"r_s", con.r_s}, {"pi_i", con.pi_i},
                        {"pi_s", con.pi_s}, {"e_i", con.e_i}, {"e_s", con.e_s},
                        {"f_i", con.f_i}, {"f_s", con.f_s}, {"g_i", con.g_i},
                        {"g_s", con.g_s}};
    emit(out, output_dir(cfg) / "best_response.json");
    return 0;
}

int run_simulate(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);
    const mfg::Barriers band{cfg.get_double("band.a"), cfg.get_double("band.b")};
    const double x0 = cfg.get_double("sim.x0", 0.0);
    const double horizon = require_positive(cfg, "sim.horizon", 100.0);
    const double grid_step = require_positive(cfg, "sim.grid_step", mc.grid_step);

    auto rng = mfg::path_rng(mc.seed, 0);
    const auto path = mfg::simulate_path(model, x0, horizon, grid_step, rng);
    const auto rp = mfg::reflect(path, band);
    const auto comp = mfg::complementarity(rp, band);

    const auto dir = output_dir(cfg);
    const auto csv_path = dir / "simulate_path.csv";
    {
        std::ofstream csv(csv_path);
        csv << "time,x_free,x_reflected,u,d\n";
        for (std::size_t k = 0; k < path.times.size(); ++k)
            csv << num(path.times[k]) << "," << num(path.values[k]) << ","
                << num(rp.x_reflected[k]) << "," << num(rp.u[k]) << "," << num(rp.d[k])
                << "\n";
    }

    json out = stamp(cfg, mc, "simulate");
    out["n_points"] = path.times.size();
    out["exact_jumps"] = path.exact_jumps;
    out["u0"] = rp.u0;
    out["d0"] = rp.d0;
    out["complementarity"] = {{"lower", comp.lower},
                              {"upper", comp.upper},
                              {"control_total_variation", comp.control_total_variation}};
    out["csv_path"] = csv_path.string();
    emit(out, dir / "simulate.json");
    return 0;
}

int run_stationary(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);
    const double a = cfg.get_double("band.a");
    const double b = cfg.get_double("band.b");
    const int bins = static_cast<int>(cfg.get_int("stationary.bins", 50));

    mfg::McStationaryOptions opts;
    opts.horizon = mc.horizon;
    opts.grid_step = mc.grid_step;
    opts.bins = bins;
    opts.seed = mc.seed;
    opts.workers = mc.workers;
    opts.x0 = cfg.get_double("sim.x0", 0.5 * (a + b));
    const auto est = mfg::mc_stationary(model, a, b, opts);

    json out = stamp(cfg, mc, "stationary");
    out["a"] = a;
    out["b"] = b;
    out["mc"] = {{"atom_a", est.law.atom_a}, {"se_atom_a", est.se_atom_a},
                 {"atom_b", est.law.atom_b}, {"se_atom_b", est.se_atom_b},
                 {"mean", est.mean}, {"se_mean", est.se_mean},
                 {"second_moment", est.second_moment},
                 {"se_second_moment", est.se_second_moment},
                 {"total_time", est.total_time}};

    mfg::StationaryLaw closed;
    bool have_closed = false;
    if (const auto* cp = std::get_if<mfg::CompoundPoissonTwoExp>(&model)) {
        closed = mfg::cp_stationary(*cp, a, b);
        have_closed = true;
        out["closed_form"] = {{"atom_a", closed.atom_a},
                              {"atom_b", closed.atom_b},
                              {"mean", mfg::cp_stationary_mean(*cp, a, b)},
                              {"mean_legacy_display", mfg::cp_stationary_mean_legacy(*cp, a, b)}};
    } else if (const auto* st = std::get_if<mfg::StrictlyStable>(&model)) {
        closed = mfg::stable_stationary(st->alpha, st->c_plus, st->c_minus, a, b);
        have_closed = true;
        const double rho = mfg::stable_rho(st->alpha, st->c_plus, st->c_minus);
        const double d = b - a;
        out["closed_form"] = {{"rho", rho},
                              {"mean", a + d * rho},
                              {"variance", d * d * rho * (1 - rho) / (st->alpha + 1)}};
    }

    const auto dir = output_dir(cfg);
    const auto csv_path = dir / "stationary_law.csv";
    {
        std::ofstream csv(csv_path);
        csv << "x_lo,x_hi,mc_mass,mc_se,closed_mass\n";
        const double width = (b - a) / bins;
        for (int k = 0; k < bins; ++k) {
            const double lo = a + k * width, hi = lo + width;
            double closed_mass = 0.0;
            if (have_closed && closed.interior_cdf) {
                closed_mass = closed.interior_cdf(hi) - closed.interior_cdf(lo);
            } else if (have_closed && closed.density) {
                // Simpson on the bin
                const double mid = 0.5 * (lo + hi);
                closed_mass = (closed.density(lo + 1e-12 * width) +
                               4.0 * closed.density(mid) +
                               closed.density(hi - 1e-12 * width)) *
                              width / 6.0;
            }
            csv << num(lo) << "," << num(hi) << "," << num(est.law.bin_mass[k]) << ","
                << num(est.se_bin[k]) << "," << num(closed_mass) << "\n";
        }
    }
    out["csv_path"] = csv_path.string();
    emit(out, dir / "stationary.json");
    return 0;
}

int run_abelian(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto cost = mfg::cost_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);
    const double a = cfg.get_double("band.a");
    const double b = cfg.get_double("band.b");
    const double p = cfg.get_double("abelian.p", 0.0);

    std::vector<double> eps_list;
    {
        std::istringstream in(cfg.get_string("abelian.eps_list", "0.2,0.1,0.05,0.02"));
        std::string tok;
        while (std::getline(in, tok, ',')) {
            if (tok.empty()) continue;
            eps_list.push_back(std::stod(tok));
        }
        if (eps_list.empty()) throw mfg::ConfigError("abelian.eps_list is empty");
    }

    mfg::AbelianOptions opts;
    opts.n_paths = mc.n_paths;
    opts.seed = mc.seed;
    opts.workers = mc.workers;
    opts.horizon_eps_product = cfg.get_double("abelian.horizon_eps_product", 12.0);
    opts.ergodic_horizon = cfg.get_double("abelian.ergodic_horizon", 2e5);
    opts.x0 = cfg.get_double("abelian.x0", 0.0);
    const auto report = mfg::abelian_check(model, cost, a, b, p, eps_list, opts);

    json out = stamp(cfg, mc, "abelian");
    out["ergodic_j"] = report.ergodic_j;
    out["ergodic_stderr"] = report.ergodic_stderr;
    out["gaps_decreasing"] = report.gaps_decreasing;
    out["separated_3sigma"] = report.separated_3sigma;
    out["points"] = json::array();
    for (const auto& pt : report.points)
        out["points"].push_back({{"eps", pt.eps},
                                 {"eps_j_eps", pt.eps_j_eps},
                                 {"stderr", pt.stderr_},
                                 {"gap", pt.gap}});
    emit(out, output_dir(cfg) / "abelian.json");
    return 0;
}

int run_nplayer_check(const mfg::Config& cfg) {
    const auto model = mfg::model_from_config(cfg);
    const auto cost = mfg::cost_from_config(cfg);
    const auto mc = mfg::mc_from_config(cfg);

    mfg::PlayerEnsemble ensemble;
    ensemble.model = model;
    ensemble.n_players = static_cast<int>(cfg.get_int("nplayer.n", 50));
    ensemble.a = cfg.get_double("band.a");
    ensemble.b = cfg.get_double("band.b");
    ensemble.master_seed = mc.seed;

    mfg::NashGapOptions opts;
    opts.horizon = mc.horizon;
    opts.burn_in = cfg.get_double("nplayer.burn_in", 200.0);
    opts.grid_step = mc.grid_step;
    opts.workers = mc.workers;
    opts.replicas = static_cast<int>(cfg.get_int("nplayer.replicas", 1));

    const double radius = require_positive(cfg, "nplayer.dev_radius", 0.25);
    std::vector<std::pair<double, double>> deviations;
    for (int i = -1; i <= 1; ++i)
        for (int j = -1; j <= 1; ++j)
            deviations.emplace_back(ensemble.a + radius * i, ensemble.b + radius * j);

    const double delta = require_positive(cfg, "nplayer.delta", 0.01);
    const auto report = mfg::nash_gap(ensemble, cost, deviations, delta, opts);

    json out = stamp(cfg, mc, "nplayer-check");
    out["n_players"] = ensemble.n_players;
    out["deviating_player"] = report.deviating_player;
    out["equilibrium_cost"] = report.equilibrium_cost;
    out["equilibrium_stderr"] = report.equilibrium_stderr;
    out["best_deviation_cost"] = report.best_deviation_cost;
    out["empirical_gap"] = report.empirical_gap;
    out["gap_stderr"] = report.gap_stderr;
    out["k_estimate"] = report.k_estimate;
    out["r_bound"] = report.r_bound;
    out["r_bound_rescaled"] = mfg::hoeffding_r_rescaled(
        report.k_estimate, delta, ensemble.a, ensemble.b, ensemble.n_players,
        mfg::max_h_squared(cost.h, ensemble.a, ensemble.b));
    out["gap_within_bound"] = report.empirical_gap <= report.r_bound;
    out["deviations"] = json::array();
    for (const auto& devn : report.deviations)
        out["deviations"].push_back({{"a", devn.a_dev},
                                     {"b", devn.b_dev},
                                     {"cost", devn.cost},
                                     {"stderr", devn.stderr_}});
    emit(out, output_dir(cfg) / "nplayer_check.json");
    return 0;
}

int fail(int code, const std::string& type, const std::string& message) {
    const json err{{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}};
    std::cout << err.dump(2) << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"equilibria and simulation for two-sided reflected Levy models"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string chosen;
    for (const auto& [name, help] :
         std::vector<std::pair<std::string, std::string>>{
             {"solve-discounted", "discounted equilibria by multi-start fixed point"},
             {"solve-ergodic", "closed-form ergodic equilibrium for the stable family"},
             {"best-response", "threshold constants and band for a fixed offset"},
             {"simulate", "dump one reflected path"},
             {"stationary", "stationary-law estimate against the closed form"},
             {"abelian", "discounted-to-ergodic limit check"},
             {"nplayer-check", "empirical Nash gap against the concentration bound"}}) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", args.config_path, "config file (INI-style)")
            ->required();
        sub->add_option("--set", args.overrides,
                        "override section.key=value (repeatable)");
        sub->callback([&chosen, name = name] { chosen = name; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        const auto cfg = load_config(args);
        if (chosen == "solve-discounted") return run_solve_discounted(cfg);
        if (chosen == "solve-ergodic") return run_solve_ergodic(cfg);
        if (chosen == "best-response") return run_best_response(cfg);
        if (chosen == "simulate") return run_simulate(cfg);
        if (chosen == "stationary") return run_stationary(cfg);
        if (chosen == "abelian") return run_abelian(cfg);
        if (chosen == "nplayer-check") return run_nplayer_check(cfg);
        return fail(1, "config_error", "unknown subcommand");
    } catch (const mfg::ConfigError& e) {
        return fail(1, "config_error", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(1, "config_error", e.what());
    } catch (const mfg::ConvergenceError& e) {
        return fail(2, "convergence_error", e.what());
    } catch (const mfg::BudgetError& e) {
        return fail(3, "budget_error", e.what());
    } catch (const std::exception& e) {
        return fail(1, "error", e.what());
    }
}
