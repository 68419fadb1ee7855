#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bioplan/armax.hpp"
#include "bioplan/kmedoid.hpp"

using namespace bioplan;

namespace {

std::vector<double> gaussian_series(int n, uint64_t seed) {
    detail::GaussianStream g(seed);
    std::vector<double> out(n);
    for (double& v : out) v = g.next();
    return out;
}

}  // namespace

TEST_CASE("white noise fits to coefficients indistinguishable from zero") {
    auto history = gaussian_series(4000, 123);
    ArmaxModel model = fit_armax(history, 2, 1, 3);
    // std_errors align with [intercept, fourier..., ar..., ma...]
    size_t k = 1 + 6;
    for (size_t i = 0; i < model.fourier_coeffs.size(); ++i)
        CHECK(std::abs(model.fourier_coeffs[i]) <= 3 * model.std_errors[1 + i]);
    for (size_t i = 0; i < model.ar_coeffs.size(); ++i)
        CHECK(std::abs(model.ar_coeffs[i]) <= 3 * model.std_errors[k + i]);
    for (size_t i = 0; i < model.ma_coeffs.size(); ++i)
        CHECK(std::abs(model.ma_coeffs[i]) <= 3 * model.std_errors[k + 2 + i]);
    CHECK(model.residual_std == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("AR(1) with phi 0.8 is recovered on 5000 samples") {
    detail::GaussianStream g(7);
    std::vector<double> history;
    double prev = 0;
    for (int i = 0; i < 5000; ++i) {
        prev = 0.8 * prev + g.next();
        history.push_back(prev);
    }
    ArmaxModel model = fit_armax(history, 1, 0, 0);
    CHECK(model.ar_coeffs[0] >= 0.7);
    CHECK(model.ar_coeffs[0] <= 0.9);
}

TEST_CASE("a constant series fits to its level with vanishing residual") {
    std::vector<double> constant(900, 42.0);
    ArmaxModel model = fit_armax(constant, 2, 1, 3);
    CHECK(model.intercept == doctest::Approx(42.0).epsilon(1e-6));
    CHECK(model.residual_std <= 1e-8);
}

TEST_CASE("explosive series are rejected") {
    detail::GaussianStream g(3);
    std::vector<double> history;
    double prev = 1.0;
    for (int i = 0; i < 800; ++i) {
        prev = 1.02 * prev + 0.01 * g.next();
        history.push_back(prev);
    }
    CHECK_THROWS_AS(fit_armax(history, 1, 0, 0), FitError);
}

TEST_CASE("insufficient history is rejected") {
    CHECK_THROWS_AS(fit_armax(std::vector<double>(100, 1.0), 1, 0, 0), FitError);
}

TEST_CASE("zero residual noise reproduces the point forecast in every path") {
    std::vector<double> constant(800, 10.0);
    ArmaxModel model = fit_armax(constant, 1, 0, 0);
    model.residual_std = 0;
    PathBundle bundle = simulate_paths(model, 24, 7, 42);
    for (const auto& path : bundle.paths) CHECK(path == bundle.paths.front());
    CHECK(bundle.paths.front() == point_forecast(model, 24));
}

TEST_CASE("simulation is bit-reproducible from the seed") {
    auto history = gaussian_series(1500, 5);
    for (double& v : history) v += 30.0;
    ArmaxModel model = fit_armax(history, 2, 1, 3);
    PathBundle a = simulate_paths(model, 168, 40, 2024);
    PathBundle b = simulate_paths(model, 168, 40, 2024);
    CHECK(a.paths == b.paths);
    PathBundle c = simulate_paths(model, 168, 40, 2025);
    CHECK(a.paths != c.paths);
}

TEST_CASE("path mean converges to the deterministic recursion") {
    auto history = gaussian_series(2000, 11);
    for (double& v : history) v += 50.0;  // keep clipping inactive
    ArmaxModel model = fit_armax(history, 2, 1, 0);
    const int horizon = 24;
    const int n_paths = 2000;
    PathBundle bundle = simulate_paths(model, horizon, n_paths, 77);
    std::vector<double> forecast = point_forecast(model, horizon);
    double bound = 4.0 * model.residual_std / std::sqrt(static_cast<double>(n_paths));
    for (int t = 0; t < horizon; ++t) {
        double mean = 0;
        for (const auto& path : bundle.paths) mean += path[t];
        mean /= n_paths;
        // innovation effects accumulate through the AR recursion, so allow
        // the per-period bound to scale with the horizon position
        CHECK(std::abs(mean - forecast[t]) <= bound * (1.0 + 0.5 * t));
    }
}

TEST_CASE("demand paths are clipped at zero") {
    std::vector<double> small(800, 0.5);
    ArmaxModel model = fit_armax(small, 1, 0, 0);
    model.residual_std = 5.0;
    PathBundle bundle = simulate_paths(model, 50, 100, 9, /*clip_at_zero=*/true);
    for (const auto& path : bundle.paths)
        for (double v : path) CHECK(v >= 0.0);
}

TEST_CASE("polynomial roots locate the AR characteristic root") {
    auto roots = detail::polynomial_roots({1.0, -0.8});
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - std::complex<double>(1.25, 0)) < 1e-9);

    auto quad = detail::polynomial_roots({2.0, -3.0, 1.0});  // (z-1)(z-2)
    REQUIRE(quad.size() == 2);
    double lo = std::min(std::abs(quad[0]), std::abs(quad[1]));
    double hi = std::max(std::abs(quad[0]), std::abs(quad[1]));
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("k-medoids: every path its own medoid when k equals n") {
    std::vector<std::vector<double>> points = {{0, 0}, {1, 0}, {5, 5}, {9, 1}};
    KMedoidResult result = k_medoids(points, 4, 3);
    CHECK(result.total_dissimilarity == doctest::Approx(0.0));
    for (int size : result.cluster_size) CHECK(size == 1);
}

TEST_CASE("k-medoids separates two copies-clusters exactly") {
    std::vector<std::vector<double>> points;
    for (int i = 0; i < 10; ++i) points.push_back({0.0, 0.0, 0.0});
    for (int i = 0; i < 10; ++i) points.push_back({8.0, 8.0, 8.0});
    KMedoidResult result = k_medoids(points, 2, 17);
    REQUIRE(result.medoids.size() == 2);
    bool has_a = false, has_b = false;
    for (int m : result.medoids) {
        if (points[m][0] == 0.0) has_a = true;
        if (points[m][0] == 8.0) has_b = true;
    }
    CHECK(has_a);
    CHECK(has_b);
    CHECK(result.cluster_size[0] == 10);
    CHECK(result.cluster_size[1] == 10);
    CHECK(result.total_dissimilarity == doctest::Approx(0.0));
}

TEST_CASE("k-medoids beats uniformly random medoids on clustered data") {
    detail::GaussianStream g(31);
    std::vector<std::vector<double>> points;
    const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 15; ++i)
            points.push_back({centers[c][0] + 0.5 * g.next(), centers[c][1] + 0.5 * g.next()});

    KMedoidResult pam = k_medoids(points, 3, 1);
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> all(points.size());
        std::iota(all.begin(), all.end(), 0);
        std::shuffle(all.begin(), all.end(), rng);
        std::vector<int> random_medoids(all.begin(), all.begin() + 3);
        CHECK(pam.total_dissimilarity <= medoid_cost(points, random_medoids) + 1e-12);
    }
}
