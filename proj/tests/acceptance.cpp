// Acceptance suite: the toolkit's exit gate. Each criterion prints exactly
// one PASS/FAIL line; the process exit code is the number of failures.
//
// The underlying limit theorems are asymptotic with existential constants,
// so acceptance is property-based: exact identities and inequalities are
// checked at tight floating-point tolerances, Monte Carlo shadows at 3-4
// standard errors, and determinism as byte equality of CLI outputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polymerlab/polymerlab.hpp"

using namespace polymerlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s  criterion %2d: %s  [%s] (%.1fs)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_criterion(int id, const std::string& name,
                   const std::function<std::pair<bool, std::string>()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        const auto r = body();
        pass = r.first;
        detail = r.second;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, pass, detail, secs);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

const DisorderModel kGauss = DisorderModel::make_gaussian(1.0);

// ---------------------------------------------------------------------
// 1. Oracle equivalence: DP vs brute force for point-to-line,
//    point-to-point and skeleton-constrained partition functions.
// ---------------------------------------------------------------------

template <int D>
double oracle_max_err(const std::vector<std::int64_t>& Ns) {
    double worst = 0.0;
    for (const std::int64_t N : Ns) {
        for (const double beta : {0.3, 1.0}) {
            for (int r = 0; r < 100; ++r) {
                const Environment<D> env(kGauss, 101 + static_cast<std::uint64_t>(N), r);
                const PolymerParams p{N, beta};

                const auto field = log_partition_field<D>(env, p);
                const double line = field.logsumexp();
                worst = std::max(worst,
                                 std::fabs(line - brute_force_log_partition<D>(env, p)));

                // endpoint: walk deterministically to a reachable z
                Coord<D> z{};
                z[0] = (N % 2 == 0) ? 2 : 1;
                worst = std::max(
                    worst, std::fabs(field.at(z) - brute_force_log_partition<D>(env, p, z)));

                // skeleton through a deterministic waypoint path
                const std::int64_t block = (N % 2 == 0) ? N / 2 : N;
                Skeleton<D> skel;
                skel.block_length = block;
                skel.waypoints.push_back(Site<D>{0, {}});
                if (block < N) {
                    Coord<D> mid{};
                    mid[0] = (block % 2 == 0) ? 0 : 1;
                    skel.waypoints.push_back(Site<D>{block, mid});
                }
                skel.waypoints.push_back(Site<D>{N, z});
                worst = std::max(
                    worst,
                    std::fabs(log_partition_skeleton<D>(env, p, skel) -
                              brute_force_log_partition<D>(env, p, std::nullopt, &skel)));
            }
        }
    }
    return worst;
}

void criterion1() {
    run_criterion(1, "oracle equivalence (DP vs enumeration)", [] {
        const double e1 = oracle_max_err<1>({4, 6, 8, 10});
        const double e2 = oracle_max_err<2>({3, 4, 5});
        const double worst = std::max(e1, e2);
        return std::make_pair(worst <= 1e-9, "max |dp - brute| = " + fmt(worst));
    });
}

// ---------------------------------------------------------------------
// 2. Gradient identity: finite differences of log Z against
//    beta * occupation probability.
// ---------------------------------------------------------------------

void criterion2() {
    run_criterion(2, "gradient identity d(logZ)/d(omega) = beta*occupation", [] {
        const PolymerParams p{16, 0.8};
        const Environment<1> env(kGauss, 2222, 0);
        const auto occ = occupation_probabilities<1>(env, p);
        CounterStream pick(99);
        const double h = 1e-5;
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const std::int64_t m =
                1 + static_cast<std::int64_t>(pick.next_u01() * static_cast<double>(p.N));
            const LayerIndex<1> idx(m);
            std::size_t i =
                static_cast<std::size_t>(pick.next_u01() * static_cast<double>(idx.size()));
            i = std::min(i, idx.size() - 1);
            const Site<1> site{m, idx.coord_at(i)};
            const double w = env.omega(site);
            const double up = log_partition<1>(env.with_override(site, w + h), p);
            const double dn = log_partition<1>(env.with_override(site, w - h), p);
            const double fd = (up - dn) / (2.0 * h);
            const double exact = p.beta * occ.at(site.n, site.x);
            worst = std::max(worst, std::fabs(fd - exact) / std::fabs(exact));
        }
        return std::make_pair(worst <= 1e-6, "max relative error = " + fmt(worst));
    });
}

// ---------------------------------------------------------------------
// 3. Exact identities: endpoint partition of unity, occupation sums,
//    skeleton decomposition.
// ---------------------------------------------------------------------

void criterion3() {
    run_criterion(3, "exact identities (partition of unity, occupation, decomposition)", [] {
        double worst_rel = 0.0, worst_abs = 0.0;
        for (int r = 0; r < 20; ++r) {
            const Environment<1> env(kGauss, 3333, r);
            const PolymerParams p{12, 1.0};
            const auto field = log_partition_field<1>(env, p);
            const double direct = log_partition<1>(env, p);
            worst_rel = std::max(worst_rel,
                                 std::fabs(field.logsumexp() - direct) / std::fabs(direct));

            const auto occ = occupation_probabilities<1>(env, p);
            for (std::int64_t m = 1; m <= p.N; ++m) {
                worst_abs = std::max(worst_abs, std::fabs(occ.layer_sum(m) - 1.0));
            }
            worst_abs = std::max(
                worst_abs, std::fabs(occ.total() - static_cast<double>(p.N)));
        }
        double worst_dec = 0.0;
        for (int r = 0; r < 20; ++r) {
            const Environment<1> env(kGauss, 3334, r);
            worst_dec = std::max(worst_dec, decomposition_check<1>(env, {8, 1.0}, 2));
        }
        const bool ok = worst_rel <= 1e-12 && worst_abs <= 1e-10 && worst_dec <= 1e-10;
        return std::make_pair(ok, "unity rel = " + fmt(worst_rel) +
                                      ", occupation abs = " + fmt(worst_abs) +
                                      ", decomposition = " + fmt(worst_dec));
    });
}

// ---------------------------------------------------------------------
// 4. Annealed identity: sample mean of Z matches exp(N lambda(beta)).
// ---------------------------------------------------------------------

void criterion4() {
    run_criterion(4, "annealed identity E[Z] = exp(N lambda)", [] {
        const double beta = 0.5;
        const std::int64_t N = 16, R = 100000;
        std::vector<double> z(static_cast<std::size_t>(R));
        parallel_for(R, 1, [&](std::int64_t r) {
            const Environment<1> env(kGauss, 4444, r);
            z[static_cast<std::size_t>(r)] = std::exp(log_partition<1>(env, {N, beta}));
        });
        const auto mv = mean_var(z);
        const double target = std::exp(static_cast<double>(N) * kGauss.log_mgf(beta));
        const double dev = std::fabs(mv.mean - target) / mv.stderr_of_mean;
        return std::make_pair(dev <= 4.0, "|mean - e^{N lambda}| = " + fmt(dev) +
                                              " standard errors");
    });
}

// ---------------------------------------------------------------------
// 5. Jensen sandwich and doubling superadditivity over N in {8..512}.
// ---------------------------------------------------------------------

void criterion5() {
    run_criterion(5, "Jensen sandwich and doubling superadditivity", [] {
        const double beta = 0.5;
        const std::int64_t R = 2000;
        const double lambda = kGauss.log_mgf(beta);
        const std::vector<std::int64_t> grid{8, 16, 32, 64, 128, 256, 512};
        const auto stats = run_replicas<1>(kGauss, beta, grid, R, 5555);
        bool ok = true;
        std::string why;
        for (const auto& e : stats.entries) {
            const double n = static_cast<double>(e.N);
            const double per = e.mean / n;
            const double se = e.stderr_of_mean / n;
            if (!(per >= -3.0 * se && per <= lambda + 3.0 * se)) {
                ok = false;
                why = "sandwich violated at N=" + std::to_string(e.N);
            }
        }
        // doubling superadditivity through the origin waypoint
        double worst_t = kInf;
        for (const std::int64_t N : {8, 16, 32, 64, 128, 256}) {
            std::vector<double> diff(static_cast<std::size_t>(R));
            parallel_for(R, 1, [&](std::int64_t r) {
                const Environment<1> env(kGauss, 5555, r);
                const double whole = log_partition<1>(env, {2 * N, beta});
                const double left = log_partition_p2p<1>(env, {N, beta}, {0});
                const double right =
                    log_partition_shifted<1>(env, {N, beta}, Site<1>{N, {0}});
                diff[static_cast<std::size_t>(r)] = whole - left - right;
            });
            const auto mv = mean_var(diff);
            worst_t = std::min(worst_t, mv.mean / mv.stderr_of_mean);
            if (mv.mean < -3.0 * mv.stderr_of_mean) {
                ok = false;
                why = "superadditivity violated at N=" + std::to_string(N);
            }
        }
        return std::make_pair(ok, ok ? "sandwich held on the grid; min superadd t-stat = " +
                                           fmt(worst_t)
                                     : why);
    });
}

// ---------------------------------------------------------------------
// 6. Nearly-gamma golden cases.
// ---------------------------------------------------------------------

void criterion6() {
    run_criterion(6, "nearly-gamma golden cases", [] {
        std::string why;
        // gaussian: psi == 1, certificate (A,B) = (0,1)
        const auto gspec = standard_normal_spec();
        std::vector<double> ggrid;
        for (int i = 0; i <= 200; ++i) ggrid.push_back(-5.0 + 0.05 * i);
        for (const double y : ggrid) {
            if (std::fabs(psi(gspec, y) - 1.0) > 1e-8) {
                return std::make_pair(false, "gaussian psi deviates at y=" + fmt(y));
            }
        }
        const auto grep = fit_envelope(gspec, ggrid, 1.0);
        if (grep.A_fit != 0.0) return std::make_pair(false, std::string("gaussian A_fit != 0"));

        // centered exponential: condition (v) ratio == 1, A_fit in [1.8, 2.6]
        const auto espec = make_density_spec(DisorderModel::make_centered_exponential(1.0));
        const auto vrep = check_condition_v(espec, TailSide::upper);
        if (!vrep.pass || std::fabs(vrep.ratio_min - 1.0) > 1e-8 ||
            std::fabs(vrep.ratio_max - 1.0) > 1e-8) {
            return std::make_pair(false, std::string("exponential condition (v) ratio not 1"));
        }
        std::vector<double> egrid;
        for (double y = -0.99; y <= 30.0; y += 0.0775) egrid.push_back(y);
        const auto erep = fit_envelope(espec, egrid, std::pow(psi(espec, 0.0), 2));
        if (!(erep.A_fit >= 1.8 && erep.A_fit <= 2.6)) {
            return std::make_pair(false, "exponential A_fit = " + fmt(erep.A_fit));
        }

        // centered uniform: condition (iv) passes with alpha near 0
        const auto uspec = make_density_spec(DisorderModel::make_centered_uniform(1.0));
        const auto ivrep = check_condition_iv(uspec, 1.0, EndpointSide::right);
        if (!ivrep.pass || std::fabs(ivrep.alpha_estimate) > 0.1) {
            return std::make_pair(false, std::string("uniform condition (iv) failed"));
        }

        // transport map: KS distance below 0.006 at 1e5 samples, all models
        double worst_ks = 0.0;
        for (const auto& m : {DisorderModel::make_gaussian(1.0),
                              DisorderModel::make_centered_exponential(1.0),
                              DisorderModel::make_centered_gamma(2.0, 1.0),
                              DisorderModel::make_centered_uniform(1.0)}) {
            const auto spec = make_density_spec(m);
            CounterStream stream(hash_chain(0x6e672d63657274ULL, 6));
            std::vector<double> sample;
            sample.reserve(100000);
            for (int i = 0; i < 100000; ++i) {
                sample.push_back(gaussian_transport(spec, norm_quantile(stream.next_u01())));
            }
            std::sort(sample.begin(), sample.end());
            double d = 0.0;
            const double nn = static_cast<double>(sample.size());
            for (std::size_t i = 0; i < sample.size(); ++i) {
                const double h = m.cdf(sample[i]);
                d = std::max(d, std::fabs(h - static_cast<double>(i) / nn));
                d = std::max(d, std::fabs(h - static_cast<double>(i + 1) / nn));
            }
            worst_ks = std::max(worst_ks, d);
        }
        if (worst_ks >= 0.006) {
            return std::make_pair(false, "transport KS distance = " + fmt(worst_ks));
        }
        return std::make_pair(true, "exp A_fit = " + fmt(erep.A_fit) +
                                        ", worst transport KS = " + fmt(worst_ks));
    });
}

// ---------------------------------------------------------------------
// 7. Concentration shadow on the sqrt(N / log N) scale.
// ---------------------------------------------------------------------

void criterion7() {
    run_criterion(7, "concentration shadow (tails and variance scale)", [] {
        const double beta = 1.0;
        std::vector<double> t_grid;
        for (int i = 0; i <= 24; ++i) t_grid.push_back(0.25 * i);
        const auto profile =
            concentration_profile<1>(kGauss, {256, beta}, 2000, t_grid, 7777);
        for (std::size_t i = 1; i < profile.exceedance.size(); ++i) {
            if (profile.exceedance[i] > profile.exceedance[i - 1]) {
                return std::make_pair(false, std::string("exceedance not non-increasing"));
            }
        }
        if (!profile.slope_defined || profile.fitted_log_slope >= 0.0) {
            return std::make_pair(false, std::string("log-linear fit slope not negative"));
        }
        const auto stats = run_replicas<1>(kGauss, beta, {32, 512}, 2000, 7778);
        auto ratio = [&](const ReplicaEntry& e) {
            return e.variance * std::log(static_cast<double>(e.N)) /
                   static_cast<double>(e.N);
        };
        const double r32 = ratio(stats.entries[0]);
        const double r512 = ratio(stats.entries[1]);
        const bool ok = r512 <= 2.0 * r32;
        return std::make_pair(
            ok, "slope = " + fmt(profile.fitted_log_slope) + " (R^2 = " +
                    fmt(profile.fit_r_squared) + "), var-scale ratio 512/32 = " +
                    fmt(r512 / r32));
    });
}

// ---------------------------------------------------------------------
// 8. Rate shadow: one-sided gaps and bounded normalized gaps.
// ---------------------------------------------------------------------

void criterion8() {
    run_criterion(8, "rate shadow (gap positivity and normalized boundedness)", [] {
        const double beta = 0.5;
        const std::vector<std::int64_t> grid{8, 16, 32, 64, 128, 256, 512, 1024};
        const auto stats = run_replicas<1>(kGauss, beta, grid, 2000, 8888);
        const auto est = estimate_free_energy(stats);
        const auto rep = convergence_gap(stats, est.p_hat);
        double norm_first = 0.0, norm_last = 0.0;
        for (const auto& e : rep.entries) {
            if (e.N > 512) continue;
            if (e.gap < -3.0 * e.gap_stderr) {
                return std::make_pair(false, "gap negative at N=" + std::to_string(e.N));
            }
            if (e.N == 8) norm_first = e.normalized_gap;
            if (e.N == 512) norm_last = e.normalized_gap;
        }
        const bool bounded = norm_last <= 2.0 * norm_first;
        return std::make_pair(bounded,
                              "p_hat from N=" + std::to_string(est.argmax_N) +
                                  "; normalized gap " + fmt(norm_first) + " (N=8) -> " +
                                  fmt(norm_last) + " (N=512)");
    });
}

// ---------------------------------------------------------------------
// 9. Influence bound at 10 probed sites.
// ---------------------------------------------------------------------

void criterion9() {
    run_criterion(9, "point-to-point influence moment bound", [] {
        const double beta = 0.5;
        const PolymerParams p{16, beta};
        const std::vector<Site<1>> sites{{2, {0}},  {4, {2}},  {6, {0}}, {8, {-2}},
                                         {8, {4}},  {10, {0}}, {12, {2}}, {14, {0}},
                                         {15, {1}}, {16, {0}}};
        const auto rep = site_influence<1>(kGauss, p, sites, Coord<1>{0}, 10000, 8, 9999);
        const double bound =
            std::exp(kGauss.log_mgf(-2.0 * beta) + 2.0 * kGauss.log_mgf(beta));
        double worst = kNegInf;
        for (const auto& s : rep.sites) {
            const double slack = bound + 3.0 * s.lplus2_stderr - s.lplus2_mean;
            worst = std::max(worst, s.lplus2_mean - 3.0 * s.lplus2_stderr);
            if (slack < 0.0) {
                return std::make_pair(false, "bound violated at layer " + std::to_string(s.m));
            }
        }
        return std::make_pair(true, "bound e^{lambda(-2b)+2lambda(b)} = " + fmt(bound) +
                                        ", max estimate = " + fmt(worst));
    });
}

// ---------------------------------------------------------------------
// 10. Determinism: byte-identical CLI outputs at thread counts 1 and 8.
// ---------------------------------------------------------------------

std::string cli_path() { return POLYMERLAB_CLI_PATH; }

bool run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

std::string slurp(const std::string& path) { return read_file(path); }

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

void criterion10() {
    run_criterion(10, "byte-determinism of CLI outputs across thread counts", [] {
        const fs::path dir = fs::temp_directory_path() / "polymerlab-acceptance";
        fs::create_directories(dir);

        const std::string replicas_cfg = R"({
          "dimension": 1, "beta": 0.5,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [8, 16, 32, 64, 128, 256, 512],
          "replicas": 2000, "base_seed": 5555
        })";
        const std::string annealed_cfg = R"({
          "dimension": 1, "beta": 0.5,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [16], "replicas": 100000, "base_seed": 4444
        })";
        const std::string conc_cfg = R"({
          "dimension": 1, "beta": 1.0,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [256], "replicas": 2000, "base_seed": 7777
        })";
        const std::string rate_cfg = R"({
          "dimension": 1, "beta": 0.5,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [8, 16, 32, 64, 128, 256, 512, 1024],
          "replicas": 2000, "base_seed": 8888
        })";
        const std::string infl_cfg = R"({
          "dimension": 1, "beta": 0.5,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [16], "replicas": 10000, "base_seed": 9999,
          "resamples_per_replica": 8,
          "influence_sites": [[2,0],[4,2],[6,0],[8,-2],[8,4],[10,0],[12,2],[14,0],[15,1],[16,0]]
        })";
        const std::string skel_cfg = R"({
          "dimension": 1, "beta": 0.5,
          "model": {"kind": "gaussian", "params": {"sigma": 1.0}},
          "N_grid": [8, 16, 32], "replicas": 500, "base_seed": 1212,
          "block_length": 8
        })";
        write_text(dir / "replicas.json", replicas_cfg);
        write_text(dir / "annealed.json", annealed_cfg);
        write_text(dir / "conc.json", conc_cfg);
        write_text(dir / "rate.json", rate_cfg);
        write_text(dir / "infl.json", infl_cfg);
        write_text(dir / "skel.json", skel_cfg);

        const std::vector<std::pair<std::string, std::string>> runs = {
            {"replicas", "replicas.json"},    {"replicas", "annealed.json"},
            {"ng-cert", "replicas.json"},     {"concentration", "conc.json"},
            {"rate", "rate.json"},            {"influence", "infl.json"},
            {"skeleton", "skel.json"},        {"free-energy", "replicas.json"},
        };
        int idx = 0;
        for (const auto& [cmd, cfg] : runs) {
            const std::string out1 = (dir / ("t1-" + std::to_string(idx))).string();
            const std::string out8 = (dir / ("t8-" + std::to_string(idx))).string();
            const std::string base = cmd + " --config " + (dir / cfg).string();
            if (!run_cli(base + " --out " + out1 + " --threads 1") ||
                !run_cli(base + " --out " + out8 + " --threads 8")) {
                return std::make_pair(false, cmd + " invocation failed");
            }
            if (slurp(out1 + ".csv") != slurp(out8 + ".csv") ||
                slurp(out1 + ".json") != slurp(out8 + ".json")) {
                return std::make_pair(false, cmd + " outputs differ across thread counts");
            }
            ++idx;
        }
        return std::make_pair(true, std::to_string(idx) + " experiments byte-identical");
    });
}

} // namespace

int main() {
    std::printf("polymerlab acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "OK" : "FAILED",
                g_failures);
    return g_failures;
}
