#include "lqgame/brownian.hpp"

#include <doctest.h>

#include <cmath>

using namespace lqgame;

TEST_SUITE_BEGIN("brownian");

TEST_CASE("inverse normal CDF spot values") {
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.9599639845400545).epsilon(1e-14));
    CHECK(inverse_normal_cdf(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
    CHECK(inverse_normal_cdf(0.3) == doctest::Approx(-inverse_normal_cdf(0.7)).epsilon(1e-15));
    CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::domain_error);
}

TEST_CASE("identical keys reproduce identical batches") {
    const TimeGrid grid(1.0, 16);
    const BrownianBatch a = gen_brownian(1234, 64, grid);
    const BrownianBatch b = gen_brownian(1234, 64, grid);
    for (int k = 0; k < grid.steps; ++k)
        for (int j = 0; j < 64; ++j) CHECK(a.increment(j, k) == b.increment(j, k));
}

TEST_CASE("paths use independent streams") {
    const TimeGrid grid(1.0, 8);
    const BrownianBatch a = gen_brownian(5, 4, grid);
    // extending the batch must not change earlier paths
    const BrownianBatch b = gen_brownian(5, 9, grid);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 4; ++j) CHECK(a.increment(j, k) == b.increment(j, k));
    CHECK(a.increment(0, 0) != a.increment(1, 0));
    // a different seed changes everything
    const BrownianBatch c = gen_brownian(6, 4, grid);
    CHECK(a.increment(0, 0) != c.increment(0, 0));
}

TEST_CASE("increment moments match Normal(0, h)") {
    // CLT bound on the mean and a 5% band on the variance of W(T)
    const int M = 100000;
    const TimeGrid g1(1.0, 1);
    const BrownianBatch one = gen_brownian(42, M, g1);
    double mean = 0.0;
    for (int j = 0; j < M; ++j) mean += one.increment(j, 0);
    mean /= M;
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(g1.h() / M));

    const TimeGrid g4(1.0, 4);
    const BrownianBatch w = gen_brownian(42, M, g4);
    double var = 0.0, wsum_mean = 0.0;
    std::vector<double> wT(M, 0.0);
    for (int j = 0; j < M; ++j) {
        for (int k = 0; k < 4; ++k) wT[static_cast<std::size_t>(j)] += w.increment(j, k);
        wsum_mean += wT[static_cast<std::size_t>(j)];
    }
    wsum_mean /= M;
    for (int j = 0; j < M; ++j) {
        const double d = wT[static_cast<std::size_t>(j)] - wsum_mean;
        var += d * d;
    }
    var /= (M - 1);
    CHECK(var == doctest::Approx(g4.t_end).epsilon(0.05));
}

TEST_SUITE_END();
