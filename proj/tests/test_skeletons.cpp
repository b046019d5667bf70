#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polymerlab/estimators.hpp"
#include "polymerlab/skeleton.hpp"

using namespace polymerlab;

namespace {

double binom_log_prob(std::int64_t n, std::int64_t x) {
    // P(x_n = x) for the simple walk: C(n, (n+x)/2) / 2^n
    const std::int64_t k = (n + x) / 2;
    return std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(k + 1)) -
           std::lgamma(static_cast<double>(n - k + 1)) -
           static_cast<double>(n) * std::log(2.0);
}

} // namespace

TEST_CASE("scale functions: closed-form plug-ins") {
    const double m4 = std::exp(4.0);
    const auto v4 = scale_functions(m4, 1.0);
    CHECK_THAT(v4.theta, Catch::Matchers::WithinRel(32.0, 1e-9)); // 4^{5/2}
    CHECK_THAT(v4.rho, Catch::Matchers::WithinRel(std::log(4.0) / 2.0, 1e-9));

    // phi near e^2: evaluate just above to keep the floor away from the edge
    const auto v2 = scale_functions(7.39, 1.0);
    CHECK(v2.phi == 8.0);

    CHECK_THROWS_AS(scale_functions(2.0, 1.0), std::domain_error);
    CHECK_NOTHROW(scale_functions(3.0, 1.0));
}

TEST_CASE("theta/(phi*rho) decreases along a growth grid") {
    const ScaleFns f{1.0};
    double prev = kInf;
    for (double m = 1e3; m <= 1e6 + 1; m *= 10.0) {
        const double ratio = f.theta(m) / (f.phi(m) * f.rho(m));
        CHECK(ratio < prev);
        prev = ratio;
    }
}

TEST_CASE("simple skeleton extraction") {
    std::vector<Site<1>> path;
    std::int64_t x = 0;
    path.push_back({0, {0}});
    for (std::int64_t i = 1; i <= 8; ++i) {
        x += (i % 3 == 0) ? -1 : 1;
        path.push_back({i, {x}});
    }

    const auto whole = simple_skeleton<1>(path, 8);
    REQUIRE(whole.waypoints.size() == 2);
    CHECK(whole.waypoints[0] == path[0]);
    CHECK(whole.waypoints[1] == path[8]);

    const auto fine = simple_skeleton<1>(path, 1);
    REQUIRE(fine.waypoints.size() == path.size());
    for (std::size_t i = 0; i < path.size(); ++i) CHECK(fine.waypoints[i] == path[i]);

    const auto mid = simple_skeleton<1>(path, 2);
    REQUIRE(mid.waypoints.size() == 5);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(mid.waypoints[j] == path[2 * j]);
    }

    CHECK_THROWS_AS(simple_skeleton<1>(path, 3), std::invalid_argument);
}

TEST_CASE("skeleton enumeration: counts, edge cases, cap") {
    const auto s3 = enumerate_skeletons<1>(2, 2, {0});
    CHECK(s3.size() == 3); // interior waypoint in {-2, 0, 2}
    CHECK(s3.size() <= std::pow(2.0 * 2.0, 1.0 * 2.0));

    CHECK(enumerate_skeletons<1>(4, 1, {2}).size() == 1);
    CHECK(enumerate_skeletons<1>(2, 2, {1}).empty()); // parity-infeasible endpoint

    CHECK_THROWS_AS(enumerate_skeletons<1>(64, 12, {0}), CapExceeded);
}

TEST_CASE("skeleton counts stay within the (2n)^{dk} bound") {
    for (std::int64_t n : {2, 4}) {
        for (std::int64_t k : {2, 3}) {
            const auto skels = enumerate_skeletons<1>(n, k, {0});
            CHECK(static_cast<double>(skels.size()) <=
                  std::pow(2.0 * static_cast<double>(n), static_cast<double>(k)));
        }
    }
    const auto skels2 = enumerate_skeletons<2>(2, 2, {0, 0});
    CHECK(static_cast<double>(skels2.size()) <= std::pow(4.0, 4.0));
}

TEST_CASE("decomposition identity: skeleton sum reproduces point-to-point") {
    const auto model = DisorderModel::make_gaussian(1.0);
    for (int r = 0; r < 10; ++r) {
        const Environment<1> env(model, 606, r);
        CHECK(decomposition_check<1>(env, {8, 1.0}, 2) <= 1e-10);
    }
    const Environment<1> env(model, 607, 0);
    CHECK(decomposition_check<1>(env, {8, 1.0}, 8) <= 1e-12); // single skeleton
    CHECK(decomposition_check<1>(env, {8, 0.0}, 2) <= 1e-12); // free walk

    // beta = 0: the total equals the walk probability of the endpoint
    const auto skels = enumerate_skeletons<1>(2, 4, {0});
    std::vector<double> parts;
    for (const auto& s : skels) parts.push_back(log_partition_skeleton<1>(env, {8, 0.0}, s));
    CHECK_THAT(logsumexp(std::span<const double>(parts)),
               Catch::Matchers::WithinAbs(binom_log_prob(8, 0), 1e-12));

    const Environment<2> env2(model, 608, 0);
    CHECK(decomposition_check<2>(env2, {4, 0.9}, 2) <= 1e-10);
}

TEST_CASE("s-map at beta = 0 reproduces walk probabilities") {
    const auto model = DisorderModel::make_gaussian(1.0);
    const auto smap = s_map<1>(model, 6, 0.0, 4, 0.0, 42);
    REQUIRE(smap.entries.size() == 7);
    for (const auto& e : smap.entries) {
        CHECK_THAT(e.s_hat, Catch::Matchers::WithinAbs(-binom_log_prob(6, e.x[0]), 1e-10));
        CHECK(e.stderr_of_mean == 0.0); // beta = 0: no disorder dependence
    }
    // maximal inefficiency at the extreme increments
    const double edge = smap.entries.front().s_hat;
    for (const auto& e : smap.entries) CHECK(e.s_hat <= edge + 1e-12);
}

TEST_CASE("s-map symmetry under x -> -x within Monte Carlo error") {
    const auto model = DisorderModel::make_gaussian(1.0);
    const auto smap = s_map<1>(model, 8, 0.7, 600, 0.35, 4242);
    const LayerIndex<1> idx(8);
    for (const auto& e : smap.entries) {
        if (e.x[0] <= 0) continue;
        const auto& mirror = smap.entries[idx.index_of({-e.x[0]})];
        const double joint = 3.0 * std::hypot(e.stderr_of_mean, mirror.stderr_of_mean);
        CHECK(std::fabs(e.s_hat - mirror.s_hat) <= joint);
    }
}

TEST_CASE("subadditivity shadow: block split lower-bounds the doubled mean") {
    const auto model = DisorderModel::make_gaussian(1.0);
    const std::int64_t n = 6, R = 400;
    const double beta = 0.8;
    const Coord<1> x{2};
    std::vector<double> diff(R);
    for (std::int64_t r = 0; r < R; ++r) {
        const Environment<1> env(model, 515, r);
        const double whole = log_partition_p2p<1>(env, {2 * n, beta}, {0});
        const double left = log_partition_p2p<1>(env, {n, beta}, x);
        const double right =
            log_partition_between<1>(env, Site<1>{n, x}, Site<1>{2 * n, {0}}, beta);
        diff[static_cast<std::size_t>(r)] = whole - left - right;
    }
    const auto mv = mean_var(diff);
    CHECK(mv.mean >= -3.0 * mv.stderr_of_mean);
}

TEST_CASE("classification: all-zero map is fully adequate and efficient") {
    SMap<1> smap;
    smap.n = 16;
    smap.beta = 0.5;
    smap.p_hat = 0.0;
    smap.replicas = 2;
    const LayerIndex<1> idx(16);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        smap.entries.push_back({idx.coord_at(i), 0.0, 0.0});
    }
    const auto c = classify(smap, ScaleFns{1.0});
    CHECK(c.adequate_set.size() == idx.size());
    CHECK(c.efficient_set.size() == idx.size());
    CHECK(c.h_n == 16);
    // phi(16) = floor(log(16)^3) = 21, so 2*floor(16/42) = 0: the desk-scale
    // clamp to 2 fires and is flagged
    CHECK(c.u_n == 2);
    CHECK(c.u_n_clamped);
}

TEST_CASE("classification thresholds: efficiency implies adequacy for n >= 8") {
    const ScaleFns f{1.0};
    for (std::int64_t n : {8, 16, 32, 64, 128, 256, 512, 1024}) {
        const double m = static_cast<double>(n);
        CHECK(4.0 * std::sqrt(m) * f.rho(m) < std::sqrt(m) * f.theta(m));
    }
    // and as computed sets on a real map
    const auto model = DisorderModel::make_gaussian(1.0);
    const auto smap = s_map<1>(model, 8, 0.5, 200, 0.2, 7);
    const auto c = classify(smap, f);
    for (const auto& x : c.efficient_set) {
        CHECK(std::find(c.adequate_set.begin(), c.adequate_set.end(), x) !=
              c.adequate_set.end());
    }
}

TEST_CASE("classification: degenerate single-site map clamps u_n") {
    SMap<1> smap;
    smap.n = 8;
    smap.beta = 0.5;
    smap.p_hat = 0.5;
    smap.replicas = 2;
    const LayerIndex<1> idx(8);
    const double big = 1e9;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto x = idx.coord_at(i);
        smap.entries.push_back({x, x[0] == 0 ? 0.0 : big, 0.0});
    }
    const auto c = classify(smap, ScaleFns{1.0});
    REQUIRE(c.adequate_set.size() == 1);
    CHECK(c.h_n == 0);
    CHECK(c.u_n == 2);
    CHECK(c.u_n_clamped);
}

TEST_CASE("inefficiency at the straight increment stays on the sqrt(n) log n scale") {
    const auto model = DisorderModel::make_gaussian(1.0);
    const double beta = 0.5;
    const std::vector<std::int64_t> grid{8, 16, 32, 64};
    const auto stats = run_replicas<1>(model, beta, grid, 400, 99);
    const double p_hat = estimate_free_energy(stats).p_hat;
    double ratio_first = 0.0, ratio_last = 0.0, se_first = 0.0, se_last = 0.0;
    for (const std::int64_t n : {grid.front(), grid.back()}) {
        const auto smap = s_map<1>(model, n, beta, 400, p_hat, 99);
        const LayerIndex<1> idx(n);
        const auto& e = smap.entries[idx.index_of({0})];
        const double denom = std::sqrt(static_cast<double>(n)) *
                             std::log(static_cast<double>(n));
        const double ratio = e.s_hat / denom;
        const double se = e.stderr_of_mean / denom;
        if (n == grid.front()) {
            ratio_first = ratio;
            se_first = se;
        } else {
            ratio_last = ratio;
            se_last = se;
        }
    }
    CHECK(ratio_last <= 2.0 * ratio_first + 3.0 * (se_first + se_last));
}
