#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "polymerlab/estimators.hpp"

using namespace polymerlab;

namespace {
const DisorderModel kGauss = DisorderModel::make_gaussian(1.0);
}

TEST_CASE("replica stats at beta = 0 are exactly degenerate") {
    const auto stats = run_replicas<1>(kGauss, 0.0, {4, 16}, 16, 7);
    for (const auto& e : stats.entries) {
        // all replicas compute the identical free-walk value (zero up to
        // log-space roundoff), so the spread vanishes exactly
        CHECK_THAT(e.mean, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(e.variance == 0.0);
        CHECK(e.stderr_of_mean == 0.0);
        for (const double q : e.quantiles) CHECK(q == e.mean);
        // free walk: E|x_N|^2 = N exactly
        CHECK_THAT(e.mean_msd, Catch::Matchers::WithinRel(static_cast<double>(e.N), 1e-12));
    }
}

TEST_CASE("replica stats are bitwise deterministic and thread-invariant") {
    const auto a = run_replicas<1>(kGauss, 0.7, {8, 16}, 64, 123, 1);
    const auto b = run_replicas<1>(kGauss, 0.7, {8, 16}, 64, 123, 1);
    const auto c = run_replicas<1>(kGauss, 0.7, {8, 16}, 64, 123, 4);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].mean == b.entries[i].mean);
        CHECK(a.entries[i].mean == c.entries[i].mean);
        CHECK(a.entries[i].variance == c.entries[i].variance);
        CHECK(a.entries[i].log_z == c.entries[i].log_z);
    }
}

TEST_CASE("quantiles are monotone and bracket the median") {
    const auto stats = run_replicas<1>(kGauss, 0.9, {16}, 500, 99);
    const auto& e = stats.entries.front();
    for (std::size_t i = 1; i < e.quantiles.size(); ++i) {
        CHECK(e.quantiles[i - 1] <= e.quantiles[i]);
    }
    CHECK(e.quantiles[0] <= e.mean);
    CHECK(e.quantiles[6] >= e.mean);
}

TEST_CASE("Jensen sandwich: 0 <= mean/N <= lambda(beta)") {
    const double beta = 0.5;
    const auto stats = run_replicas<1>(kGauss, beta, {16}, 10000, 2024);
    const auto& e = stats.entries.front();
    const double per_step = e.mean / static_cast<double>(e.N);
    const double se = e.stderr_of_mean / static_cast<double>(e.N);
    const double lambda = kGauss.log_mgf(beta); // 0.125
    CHECK(per_step >= 0.0 - 3.0 * se);
    CHECK(per_step <= lambda + 3.0 * se);
}

TEST_CASE("annealed identity: mean of Z matches exp(N lambda)") {
    const double beta = 0.5;
    const std::int64_t N = 16, R = 20000;
    std::vector<double> z(static_cast<std::size_t>(R));
    parallel_for(R, 1, [&](std::int64_t r) {
        const Environment<1> env(kGauss, 5656, r);
        z[static_cast<std::size_t>(r)] = std::exp(log_partition<1>(env, {N, beta}));
    });
    const auto mv = mean_var(z);
    const double target = std::exp(static_cast<double>(N) * kGauss.log_mgf(beta));
    CHECK(std::fabs(mv.mean - target) <= 4.0 * mv.stderr_of_mean);
}

TEST_CASE("negative correlation of occupation and local weight") {
    const double beta = 0.8;
    const std::int64_t N = 8, R = 10000;
    const Site<1> probe{4, {0}};
    std::vector<double> occ(static_cast<std::size_t>(R)), wt(static_cast<std::size_t>(R));
    parallel_for(R, 1, [&](std::int64_t r) {
        const Environment<1> env(kGauss, 8787, r);
        const auto of = occupation_probabilities<1>(env, {N, beta});
        occ[static_cast<std::size_t>(r)] = of.at(probe.n, probe.x);
        wt[static_cast<std::size_t>(r)] = std::exp(-beta * env.omega(probe));
    });
    const auto mo = mean_var(occ);
    const auto mw = mean_var(wt);
    long double cov = 0.0L;
    std::vector<double> prod(static_cast<std::size_t>(R));
    for (std::size_t r = 0; r < static_cast<std::size_t>(R); ++r) {
        prod[r] = (occ[r] - mo.mean) * (wt[r] - mw.mean);
        cov += prod[r];
    }
    const auto mc = mean_var(prod);
    CHECK(static_cast<double>(cov) / static_cast<double>(R) <= 3.0 * mc.stderr_of_mean);
}

TEST_CASE("free energy estimate: degenerate and annealed bounds") {
    const auto zero = run_replicas<1>(kGauss, 0.0, {4, 8}, 8, 3);
    CHECK_THAT(estimate_free_energy(zero).p_hat, Catch::Matchers::WithinAbs(0.0, 1e-12));

    const double beta = 0.6;
    const auto stats = run_replicas<1>(kGauss, beta, {8, 16, 32, 64}, 2000, 11);
    const auto est = estimate_free_energy(stats);
    CHECK(est.p_hat <= kGauss.log_mgf(beta) + 3.0 * est.stderr_at_argmax);
    CHECK(est.p_hat >= 0.0 - 3.0 * est.stderr_at_argmax);
}

TEST_CASE("superadditivity of the mean along the doubling subsequence") {
    const auto stats = run_replicas<1>(kGauss, 0.8, {8, 16, 32, 64}, 2000, 13);
    for (std::size_t i = 0; i + 1 < stats.entries.size(); ++i) {
        const auto& a = stats.entries[i];
        const auto& b = stats.entries[i + 1];
        REQUIRE(b.N == 2 * a.N);
        // E log Z_{2N} >= 2 E log Z_N (superadditivity + shift invariance)
        const double joint = std::hypot(2.0 * a.stderr_of_mean, b.stderr_of_mean);
        CHECK(b.mean >= 2.0 * a.mean - 3.0 * joint);
    }
}

TEST_CASE("concentration profile: degenerate at beta = 0") {
    const auto profile = concentration_profile<1>(kGauss, {16, 0.0}, 200,
                                                  {0.0, 0.5, 1.0, 2.0}, 17);
    CHECK(profile.degenerate);
    CHECK_FALSE(profile.slope_defined);
    for (std::size_t i = 0; i < profile.t_grid.size(); ++i) {
        if (profile.t_grid[i] > 0.0) CHECK(profile.exceedance[i] == 0.0);
    }
}

TEST_CASE("concentration profile: decreasing tails with a negative fitted slope") {
    std::vector<double> t_grid;
    for (int i = 0; i <= 16; ++i) t_grid.push_back(0.25 * i);
    const auto profile = concentration_profile<1>(kGauss, {64, 1.0}, 600, t_grid, 19);
    CHECK_FALSE(profile.degenerate);
    // exceedance(0) counts every replica off the exact mean
    CHECK(profile.exceedance.front() >= 1.0 - 1e-9);
    for (std::size_t i = 1; i < profile.exceedance.size(); ++i) {
        CHECK(profile.exceedance[i] <= profile.exceedance[i - 1]);
    }
    REQUIRE(profile.slope_defined);
    CHECK(profile.fitted_log_slope < 0.0);
}

TEST_CASE("rate report: zero gaps at beta = 0, log log guard") {
    const auto stats = run_replicas<1>(kGauss, 0.0, {2, 4, 8}, 8, 23);
    const auto rep = convergence_gap(stats, 0.0);
    for (const auto& e : rep.entries) {
        CHECK_THAT(e.gap, Catch::Matchers::WithinAbs(0.0, 1e-12));
        CHECK(e.normalized_defined == (e.N >= 3));
    }
}

TEST_CASE("rate report: gaps nonnegative within Monte Carlo slack") {
    const double beta = 0.5;
    const auto stats = run_replicas<1>(kGauss, beta, {8, 16, 32, 64, 128}, 1200, 29);
    const auto est = estimate_free_energy(stats);
    const auto rep = convergence_gap(stats, est.p_hat);
    for (const auto& e : rep.entries) {
        CHECK(e.gap >= -3.0 * e.gap_stderr);
        if (e.N >= 3) CHECK(std::isfinite(e.normalized_gap));
    }
}

TEST_CASE("site influence: beta = 0 gives identically zero influence") {
    const std::vector<Site<1>> sites{{4, {0}}, {8, {2}}};
    const auto rep = site_influence<1>(kGauss, {8, 0.0}, sites, Coord<1>{0}, 50, 4, 31);
    for (const auto& s : rep.sites) {
        CHECK(s.y2_mean == 0.0);
        CHECK(s.l2_mean == 0.0);
        CHECK(s.lplus2_mean == 0.0);
    }
    CHECK(rep.y_sum_mean == 0.0);
}

TEST_CASE("site influence: unreachable site is flagged with zero influence") {
    const std::vector<Site<1>> sites{{2, {6}}};
    const auto rep = site_influence<1>(kGauss, {8, 0.5}, sites, std::nullopt, 10, 4, 37);
    REQUIRE(rep.sites.size() == 1);
    CHECK_FALSE(rep.sites.front().reachable_site);
    CHECK(rep.sites.front().y2_mean == 0.0);
}

TEST_CASE("site influence: point-to-point positive part obeys the moment bound") {
    const double beta = 0.5;
    const std::vector<Site<1>> sites{{8, {0}}, {4, {2}}, {12, {-2}}};
    const auto rep =
        site_influence<1>(kGauss, {16, beta}, sites, Coord<1>{0}, 2000, 8, 41);
    const double bound = std::exp(kGauss.log_mgf(-2.0 * beta) + 2.0 * kGauss.log_mgf(beta));
    CHECK_THAT(bound, Catch::Matchers::WithinAbs(2.1170000166126748, 1e-10)); // e^{3/4}
    for (const auto& s : rep.sites) {
        CHECK(s.lplus2_mean <= bound + 3.0 * s.lplus2_stderr);
    }
}

TEST_CASE("site influence: occupation-weighted ordering across sites") {
    const double beta = 0.5;
    // layer N: the on-axis site (reachable from endpoint z = 0) versus a
    // site at the edge of the cone, far from the endpoint
    const std::vector<Site<1>> sites{{15, {1}}, {15, {15}}};
    const auto rep =
        site_influence<1>(kGauss, {16, beta}, sites, Coord<1>{0}, 1500, 8, 43);
    const auto& near = rep.sites[0];
    const auto& far = rep.sites[1];
    const double slack = 3.0 * std::hypot(near.l2_stderr, far.l2_stderr);
    CHECK(far.l2_mean <= near.l2_mean + slack);
}

TEST_CASE("scaling exponents: exact free-walk msd forces xi = 1/2") {
    ReplicaStats stats;
    for (const std::int64_t N : {16, 32, 64, 128}) {
        ReplicaEntry e;
        e.N = N;
        e.R = 2;
        e.variance = 1.0; // placeholder positive variance
        stats.entries.push_back(e);
    }
    std::vector<double> msd;
    for (const auto& e : stats.entries) msd.push_back(static_cast<double>(e.N));
    const auto rep = scaling_exponents(stats, msd);
    CHECK_THAT(rep.xi_hat, Catch::Matchers::WithinAbs(0.5, 1e-10));
}

TEST_CASE("scaling exponents: beta = 0 leaves chi undefined but xi diffusive") {
    const auto stats = run_replicas<1>(kGauss, 0.0, {8, 16, 32, 64}, 8, 47);
    const auto rep = scaling_exponents(stats);
    CHECK_FALSE(rep.chi_defined);
    CHECK_THAT(rep.xi_hat, Catch::Matchers::WithinAbs(0.5, 0.02));
}

TEST_CASE("scaling exponents: fewer than 4 grid points is an error") {
    const auto stats = run_replicas<1>(kGauss, 0.5, {8, 16, 32}, 8, 53);
    CHECK_THROWS_AS(scaling_exponents(stats), std::invalid_argument);
}

TEST_CASE("run_replicas validates inputs and enforces the memory cap") {
    CHECK_THROWS_AS(run_replicas<1>(kGauss, 0.5, {8}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_replicas<1>(kGauss, 0.5, {}, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_replicas<1>(kGauss, 0.5, {0}, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_replicas<2>(kGauss, 0.5, {100000}, 8, 1, 1, 64.0), CapExceeded);
}
