// polymerlab CLI: config-driven experiment drivers with CSV + JSON output.
//
// Subcommands: logz, replicas, free-energy, concentration, rate, influence,
// exponents, ng-cert, skeleton. Every run is a pure function of
// (config, seed): reruns produce byte-identical outputs at any thread
// count. Exit codes: 0 success, 1 validation failure, 2 resource-cap
// refusal, 3 numeric failure. Errors are also emitted as structured JSON
// on standard error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "polymerlab/polymerlab.hpp"

using namespace polymerlab;
using nlohmann::ordered_json;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_prefix;
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    std::string density_csv;  // ng-cert only
    double envelope_b = -1.0; // ng-cert only; <0 means auto
};

template <int D>
Coord<D> endpoint_of(const ExperimentConfig& cfg) {
    Coord<D> z{};
    for (int i = 0; i < D; ++i) {
        z[static_cast<std::size_t>(i)] = cfg.endpoint[static_cast<std::size_t>(i)];
    }
    return z;
}

ordered_json config_echo(const ExperimentConfig& cfg) {
    return ordered_json::parse(serialize_config(cfg));
}

struct Outputs {
    std::string csv;
    ordered_json summary;
};

// ---------------------------------------------------------------- logz

template <int D>
Outputs run_logz(const ExperimentConfig& cfg, int) {
    const auto model = make_model(cfg.model);
    std::vector<std::string> cols{"N"};
    for (int i = 0; i < D; ++i) cols.push_back("x" + std::to_string(i + 1));
    cols.push_back("log_z_p2p");
    cols.push_back("prob");
    CsvBuilder csv(cols);
    ordered_json per_n = ordered_json::array();
    const Environment<D> env(model, cfg.base_seed, 0);
    for (const std::int64_t N : cfg.N_grid) {
        const PolymerParams p{N, cfg.beta};
        const auto field = log_partition_field<D>(env, p);
        const double logZ = field.logsumexp();
        double msd = 0.0;
        for (std::size_t i = 0; i < field.size(); ++i) {
            const auto x = field.coord_at(i);
            const double lw = field.values()[i];
            const double prob = std::exp(lw - logZ);
            csv.cell(N);
            for (int k = 0; k < D; ++k) csv.cell(x[static_cast<std::size_t>(k)]);
            csv.cell(lw).cell(prob).end_row();
            double r2 = 0.0;
            for (int k = 0; k < D; ++k) {
                const double c = static_cast<double>(x[static_cast<std::size_t>(k)]);
                r2 += c * c;
            }
            msd += prob * r2;
        }
        per_n.push_back({{"N", N}, {"log_partition", logZ}, {"endpoint_msd", msd}});
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "logz"}, {"config", config_echo(cfg)}, {"results", per_n}};
    return out;
}

// ------------------------------------------------------------ replicas

ordered_json stats_json(const ReplicaStats& stats) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : stats.entries) {
        ordered_json q;
        static const char* names[7] = {"q01", "q05", "q25", "q50", "q75", "q95", "q99"};
        for (int i = 0; i < 7; ++i) q[names[i]] = e.quantiles[static_cast<std::size_t>(i)];
        arr.push_back({{"N", e.N},
                       {"R", e.R},
                       {"mean", e.mean},
                       {"variance", e.variance},
                       {"stderr", e.stderr_of_mean},
                       {"quantiles", q},
                       {"mean_msd", e.mean_msd},
                       {"msd_stderr", e.msd_stderr}});
    }
    return arr;
}

void stats_rows(CsvBuilder& csv, const ReplicaStats& stats) {
    for (const auto& e : stats.entries) {
        csv.cell(e.N).cell(e.R).cell(e.mean).cell(e.variance).cell(e.stderr_of_mean);
        for (const double q : e.quantiles) csv.cell(q);
        csv.cell(e.mean_msd).cell(e.msd_stderr).end_row();
    }
}

template <int D>
Outputs run_replicas_cmd(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    const auto stats = run_replicas<D>(model, cfg.beta, cfg.N_grid, cfg.replicas,
                                       cfg.base_seed, threads, cfg.caps.max_memory_mb);
    CsvBuilder csv({"N", "R", "mean", "variance", "stderr", "q01", "q05", "q25", "q50", "q75",
                    "q95", "q99", "mean_msd", "msd_stderr"});
    stats_rows(csv, stats);
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "replicas"},
                   {"config", config_echo(cfg)},
                   {"results", stats_json(stats)}};
    return out;
}

// --------------------------------------------------------- free-energy

template <int D>
Outputs run_free_energy(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    const auto stats = run_replicas<D>(model, cfg.beta, cfg.N_grid, cfg.replicas,
                                       cfg.base_seed, threads, cfg.caps.max_memory_mb);
    const auto est = estimate_free_energy(stats);
    CsvBuilder csv({"N", "mean_per_N", "stderr_per_N"});
    for (const auto& e : stats.entries) {
        const double n = static_cast<double>(e.N);
        csv.cell(e.N).cell(e.mean / n).cell(e.stderr_of_mean / n).end_row();
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "free-energy"},
                   {"config", config_echo(cfg)},
                   {"p_hat", est.p_hat},
                   {"argmax_N", est.argmax_N},
                   {"stderr_at_argmax", est.stderr_at_argmax},
                   {"lambda_beta", model.log_mgf(cfg.beta)},
                   {"note", "p_hat is a lower-biased plug-in for the true limit"}};
    return out;
}

// ------------------------------------------------------- concentration

template <int D>
Outputs run_concentration(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    CsvBuilder csv({"N", "t", "exceedance"});
    ordered_json fits = ordered_json::array();
    for (const std::int64_t N : cfg.N_grid) {
        const auto profile = concentration_profile<D>(model, {N, cfg.beta}, cfg.replicas,
                                                      cfg.t_grid, cfg.base_seed, threads);
        for (std::size_t i = 0; i < profile.t_grid.size(); ++i) {
            csv.cell(N).cell(profile.t_grid[i]).cell(profile.exceedance[i]).end_row();
        }
        fits.push_back({{"N", N},
                        {"scale", profile.scale},
                        {"degenerate", profile.degenerate},
                        {"small_sample", profile.small_sample},
                        {"slope_defined", profile.slope_defined},
                        {"fitted_log_slope",
                         profile.slope_defined ? ordered_json(profile.fitted_log_slope)
                                               : ordered_json(nullptr)},
                        {"fit_r_squared",
                         profile.slope_defined ? ordered_json(profile.fit_r_squared)
                                               : ordered_json(nullptr)},
                        {"window", {profile.window_lo, profile.window_hi}}});
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "concentration"},
                   {"config", config_echo(cfg)},
                   {"results", fits}};
    return out;
}

// ---------------------------------------------------------------- rate

template <int D>
Outputs run_rate(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    const auto stats = run_replicas<D>(model, cfg.beta, cfg.N_grid, cfg.replicas,
                                       cfg.base_seed, threads, cfg.caps.max_memory_mb);
    const auto est = estimate_free_energy(stats);
    const auto rep = convergence_gap(stats, est.p_hat);
    CsvBuilder csv({"N", "mean", "stderr", "gap", "gap_stderr", "normalized_gap"});
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        const auto& e = rep.entries[i];
        const auto& s = stats.entries[i];
        csv.cell(e.N).cell(s.mean).cell(s.stderr_of_mean).cell(e.gap).cell(e.gap_stderr);
        csv.cell(e.normalized_defined ? format_double(e.normalized_gap) : std::string("nan"));
        csv.end_row();
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "rate"},
                   {"config", config_echo(cfg)},
                   {"p_hat", est.p_hat},
                   {"argmax_N", est.argmax_N},
                   {"note", "gap checks are one-sided: p_hat is lower-biased"}};
    return out;
}

// ----------------------------------------------------------- influence

template <int D>
std::vector<Site<D>> influence_sites_of(const ExperimentConfig& cfg) {
    std::vector<Site<D>> sites;
    for (const auto& row : cfg.influence_sites) {
        Site<D> s;
        s.n = row.at(0);
        for (int i = 0; i < D; ++i) {
            s.x[static_cast<std::size_t>(i)] = row.at(static_cast<std::size_t>(i) + 1);
        }
        sites.push_back(s);
    }
    if (!sites.empty()) return sites;
    // default probe set: on-axis and slightly off-axis sites across layers
    const std::int64_t N = cfg.N_grid.back();
    for (const std::int64_t frac : {4, 2, 1}) {
        const std::int64_t m = std::max<std::int64_t>(1, N / frac);
        for (const std::int64_t off : {0, 2}) {
            Site<D> s;
            s.n = m;
            s.x[0] = ((m + off) % 2 == 0) ? off : off + 1;
            if (reachable<D>(s.n, s.x)) sites.push_back(s);
        }
    }
    return sites;
}

template <int D>
Outputs run_influence(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    const PolymerParams params{cfg.N_grid.back(), cfg.beta};
    const auto sites = influence_sites_of<D>(cfg);
    const auto rep = site_influence<D>(model, params, sites, endpoint_of<D>(cfg),
                                       cfg.replicas, cfg.resamples_per_replica,
                                       cfg.base_seed, threads);
    std::vector<std::string> cols{"m"};
    for (int i = 0; i < D; ++i) cols.push_back("y" + std::to_string(i + 1));
    for (const char* c : {"reachable", "y_mean", "y2_mean", "y2_stderr", "l2_mean",
                          "l2_stderr", "lplus2_mean", "lplus2_stderr"}) {
        cols.push_back(c);
    }
    CsvBuilder csv(cols);
    for (const auto& s : rep.sites) {
        csv.cell(s.m);
        for (int i = 0; i < D; ++i) csv.cell(s.y[static_cast<std::size_t>(i)]);
        csv.cell(s.reachable_site)
            .cell(s.y_mean)
            .cell(s.y2_mean)
            .cell(s.y2_stderr)
            .cell(s.l2_mean)
            .cell(s.l2_stderr)
            .cell(s.lplus2_mean)
            .cell(s.lplus2_stderr)
            .end_row();
    }
    const double bound =
        std::exp(model.log_mgf(-2.0 * cfg.beta) + 2.0 * model.log_mgf(cfg.beta));
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "influence"},
                   {"config", config_echo(cfg)},
                   {"p2p_positive_part_moment_bound", bound},
                   {"y_sum_mean", rep.y_sum_mean},
                   {"y_sum_stderr", rep.y_sum_stderr},
                   {"full_cone_coverage", rep.full_coverage}};
    return out;
}

// ----------------------------------------------------------- exponents

template <int D>
Outputs run_exponents(const ExperimentConfig& cfg, int threads) {
    const auto model = make_model(cfg.model);
    const auto stats = run_replicas<D>(model, cfg.beta, cfg.N_grid, cfg.replicas,
                                       cfg.base_seed, threads, cfg.caps.max_memory_mb);
    const auto rep = scaling_exponents(stats);
    CsvBuilder csv({"N", "variance", "mean_msd"});
    for (const auto& e : stats.entries) {
        csv.cell(e.N).cell(e.variance).cell(e.mean_msd).end_row();
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {
        {"experiment", "exponents"},
        {"config", config_echo(cfg)},
        {"chi_defined", rep.chi_defined},
        {"chi_hat", rep.chi_defined ? ordered_json(rep.chi_hat) : ordered_json(nullptr)},
        {"chi_r_squared",
         rep.chi_defined ? ordered_json(rep.chi_r_squared) : ordered_json(nullptr)},
        {"xi_hat", rep.xi_hat},
        {"xi_r_squared", rep.xi_r_squared},
        {"hyperscaling_residual", rep.hyperscaling_defined
                                      ? ordered_json(rep.hyperscaling_residual)
                                      : ordered_json(nullptr)}};
    return out;
}

// ------------------------------------------------------------- ng-cert

std::vector<double> default_psi_grid(const DensitySpec& spec) {
    std::vector<double> probs;
    for (double k = 14.0; k >= 2.5; k -= 0.5) probs.push_back(std::pow(10.0, -k));
    for (int i = 0; i <= 198; ++i) probs.push_back(0.005 + (0.99 * i) / 198.0);
    for (double k = 2.5; k <= 14.0; k += 0.5) probs.push_back(1.0 - std::pow(10.0, -k));
    std::vector<double> grid;
    grid.reserve(probs.size());
    for (const double p : probs) grid.push_back(spec.quantile(p));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

DensitySpec density_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ng-cert: cannot open density CSV " + path);
    std::vector<double> y, h, H;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c, ',')) {
            throw std::invalid_argument("ng-cert: CSV rows must be y,h,H");
        }
        try {
            y.push_back(std::stod(a));
            h.push_back(std::stod(b));
            H.push_back(std::stod(c));
        } catch (const std::exception&) {
            if (y.empty() && h.empty()) continue; // header row
            throw std::invalid_argument("ng-cert: non-numeric CSV row: " + line);
        }
    }
    return tabulated_spec(std::move(y), std::move(h), std::move(H));
}

ordered_json cond_iv_json(const std::vector<ConditionIVReport>& reps) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reps) {
        arr.push_back({{"side", r.side},
                       {"endpoint", r.endpoint},
                       {"alpha_estimate", r.alpha_estimate},
                       {"ratio_band", r.ratio_band},
                       {"pass", r.pass}});
    }
    return arr;
}

ordered_json cond_v_json(const std::vector<ConditionVReport>& reps) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : reps) {
        ordered_json o = {{"side", r.side},
                          {"ratio_min", r.ratio_min},
                          {"ratio_max", r.ratio_max},
                          {"pass", r.pass}};
        if (!r.note.empty()) o["note"] = r.note;
        arr.push_back(o);
    }
    return arr;
}

Outputs run_ng_cert(const ExperimentConfig& cfg, const CliOptions& opt) {
    DensitySpec spec = opt.density_csv.empty() ? make_density_spec(make_model(cfg.model))
                                               : density_from_csv(opt.density_csv);
    const auto grid = default_psi_grid(spec);
    const double B = opt.envelope_b >= 0.0 ? opt.envelope_b : default_envelope_B(spec, grid);
    const auto rep = certify(spec, grid, B);
    CsvBuilder csv({"y", "psi", "psi_squared", "tail_asymptotic"});
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        csv.cell(rep.grid[i])
            .cell(rep.psi_values[i])
            .cell(rep.psi_values[i] * rep.psi_values[i])
            .cell(rep.tail_flagged[i] != 0)
            .end_row();
    }
    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "ng-cert"},
                   {"law", rep.law},
                   {"grid_points", rep.grid.size()},
                   {"B", rep.B},
                   {"A_fit", rep.A_fit},
                   {"witness_y", rep.witness_y},
                   {"moment_threshold", json_number(rep.moment_threshold)},
                   {"cond_iv", cond_iv_json(rep.cond_iv)},
                   {"cond_v", cond_v_json(rep.cond_v)},
                   {"note", "grid certificate: the envelope is checked at grid resolution; "
                            "conditions (iv)/(v) cover the tails"}};
    return out;
}

// -------------------------------------------------------------- skeleton

template <int D>
Outputs run_skeleton(const ExperimentConfig& cfg, int threads) {
    if (cfg.block_length < 3) {
        throw std::invalid_argument("skeleton experiment requires block_length >= 3");
    }
    const auto model = make_model(cfg.model);
    const std::int64_t n = cfg.block_length;
    const auto stats = run_replicas<D>(model, cfg.beta, cfg.N_grid, cfg.replicas,
                                       cfg.base_seed, threads, cfg.caps.max_memory_mb);
    const auto est = estimate_free_energy(stats);
    const auto smap =
        s_map<D>(model, n, cfg.beta, cfg.replicas, est.p_hat, cfg.base_seed, threads);
    const ScaleFns scale{cfg.K13};
    const auto cls = classify(smap, scale);

    std::vector<std::string> cols{"n"};
    for (int i = 0; i < D; ++i) cols.push_back("x" + std::to_string(i + 1));
    for (const char* c : {"s_hat", "stderr", "adequate", "efficient"}) cols.push_back(c);
    CsvBuilder csv(cols);
    for (const auto& e : smap.entries) {
        csv.cell(n);
        for (int i = 0; i < D; ++i) csv.cell(e.x[static_cast<std::size_t>(i)]);
        csv.cell(e.s_hat)
            .cell(e.stderr_of_mean)
            .cell(e.s_hat <= cls.adequate_threshold)
            .cell(e.s_hat <= cls.efficient_threshold)
            .end_row();
    }

    // Exact decomposition residual on replica 0 at N = 2n, when enumerable.
    ordered_json decomposition = nullptr;
    try {
        const Environment<D> env(model, cfg.base_seed, 0);
        const double residual = decomposition_check<D>(env, {2 * n, cfg.beta}, n, Coord<D>{},
                                                       cfg.caps.max_enumeration);
        decomposition = residual;
    } catch (const CapExceeded&) {
        // left null: residual skipped under the enumeration cap, not failed
    }

    Outputs out;
    out.csv = csv.str();
    out.summary = {{"experiment", "skeleton"},
                   {"config", config_echo(cfg)},
                   {"p_hat", est.p_hat},
                   {"adequate_threshold", cls.adequate_threshold},
                   {"efficient_threshold", cls.efficient_threshold},
                   {"adequate_count", cls.adequate_set.size()},
                   {"efficient_count", cls.efficient_set.size()},
                   {"h_n", cls.h_n},
                   {"u_n", cls.u_n},
                   {"u_n_clamped", cls.u_n_clamped},
                   {"decomposition_residual", decomposition},
                   {"note", "s_hat is biased up: p_hat underestimates the free energy"}};
    return out;
}

// ------------------------------------------------------------- plumbing

ExperimentConfig load_config(const CliOptions& opt) {
    auto cfg = parse_config(read_file(opt.config_path));
    if (opt.seed_override) cfg.base_seed = *opt.seed_override;
    return cfg;
}

template <int D>
Outputs dispatch_dim(const std::string& cmd, const ExperimentConfig& cfg,
                     const CliOptions& opt) {
    if (cmd == "logz") return run_logz<D>(cfg, opt.threads);
    if (cmd == "replicas") return run_replicas_cmd<D>(cfg, opt.threads);
    if (cmd == "free-energy") return run_free_energy<D>(cfg, opt.threads);
    if (cmd == "concentration") return run_concentration<D>(cfg, opt.threads);
    if (cmd == "rate") return run_rate<D>(cfg, opt.threads);
    if (cmd == "influence") return run_influence<D>(cfg, opt.threads);
    if (cmd == "exponents") return run_exponents<D>(cfg, opt.threads);
    if (cmd == "skeleton") return run_skeleton<D>(cfg, opt.threads);
    throw std::invalid_argument("unknown subcommand '" + cmd + "'");
}

int run_command(const std::string& cmd, const CliOptions& opt) {
    const auto cfg = load_config(opt);
    // The concentration experiments assume E[exp(4 beta |omega|)] < inf.
    // Larger beta is still simulable, so this only warns.
    const auto model = make_model(cfg.model);
    const auto [lo, hi] = model.mgf_interval();
    if (4.0 * cfg.beta >= hi || -4.0 * cfg.beta <= lo) {
        ordered_json warn = {
            {"warning",
             {{"type", "exponential_moment"},
              {"message", "4*beta lies outside the disorder's moment range (" +
                              format_double(lo) + ", " + format_double(hi) +
                              "); concentration-scale results are heuristic here"}}}};
        std::cerr << warn.dump(2) << std::endl;
    }
    Outputs out;
    if (cmd == "ng-cert") {
        out = run_ng_cert(cfg, opt);
    } else if (cfg.dimension == 1) {
        out = dispatch_dim<1>(cmd, cfg, opt);
    } else {
        out = dispatch_dim<2>(cmd, cfg, opt);
    }
    atomic_write(opt.out_prefix + ".csv", out.csv);
    atomic_write(opt.out_prefix + ".json", out.summary.dump(2) + "\n");
    return 0;
}

void emit_error(const std::string& type, const std::string& message,
                const std::vector<std::string>& details = {}) {
    ordered_json err = {{"error", {{"type", type}, {"message", message}}}};
    if (!details.empty()) err["error"]["details"] = details;
    std::cerr << err.dump(2) << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"directed-polymer simulation and verification toolkit"};
    app.require_subcommand(1);

    CliOptions opt;
    static const std::vector<std::string> commands = {
        "logz",      "replicas",  "free-energy", "concentration", "rate",
        "influence", "exponents", "ng-cert",     "skeleton"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out_prefix, "output prefix (writes .csv and .json)")
            ->required();
        sub->add_option("--seed", opt.seed_override, "override config base_seed");
        sub->add_option("--threads", opt.threads, "worker threads (performance only)")
            ->check(CLI::PositiveNumber);
        if (name == "ng-cert") {
            sub->add_option("--density-csv", opt.density_csv,
                            "tabulated (y,h,H) density instead of the config model");
            sub->add_option("--envelope-b", opt.envelope_b,
                            "envelope offset B (default: fitted near the origin)");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        emit_error("usage", e.what());
        return 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run_command(cmd, opt);
    } catch (const ConfigError& e) {
        emit_error("config", "configuration is invalid", e.problems());
        return 1;
    } catch (const CapExceeded& e) {
        emit_error("resource_cap", e.what());
        return 2;
    } catch (const NumericError& e) {
        emit_error("numeric", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        emit_error("validation", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        emit_error("validation", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 3;
    }
}
