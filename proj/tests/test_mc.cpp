#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "rician/density.hpp"
#include "rician/error.hpp"
#include "rician/mc.hpp"
#include "rician/special.hpp"

using namespace rician;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const ChannelSpec kClassical1{ChannelModel::ClassicalRician, 1.0};
const ChannelSpec kPn1{ChannelModel::PhaseNoiseRician, 1.0};

AmplitudeDistribution fig1() { return AmplitudeDistribution({{0.0, 0.9}, {kInvSqrt2, 0.1}}); }

struct Mean {
    double value;
    double std_err;
};

// Batched sample mean of h(R) with R drawn from the output law of F, using a
// plain loop over sample_R and log_output_density.
template <class Draw, class H>
Mean batched_mean(std::int64_t n, std::uint64_t seed, Draw draw, H h) {
    const int batches = 100;
    const std::int64_t per = n / batches;
    std::vector<double> means(batches);
    Rng rng(seed);
    for (int b = 0; b < batches; ++b) {
        double sum = 0.0;
        for (std::int64_t i = 0; i < per; ++i)
            sum += h(draw(rng));
        means[b] = sum / static_cast<double>(per);
    }
    double mean = 0.0;
    for (double m : means)
        mean += m / batches;
    double var = 0.0;
    for (double m : means)
        var += (m - mean) * (m - mean) / (batches - 1);
    return {mean, std::sqrt(var / batches)};
}

}  // namespace

TEST_CASE("argument checks and determinism") {
    CHECK_THROWS_AS(mc_mutual_information(fig1(), kClassical1, 9999, 1), DomainError);
    const MCEstimate a = mc_mutual_information(fig1(), kClassical1, 100000, 17);
    const MCEstimate b = mc_mutual_information(fig1(), kClassical1, 100000, 17);
    CHECK(a.value == b.value);
    CHECK(a.std_err == b.std_err);
    CHECK(a.n_samples == 100000);
    CHECK(a.seed == 17);
    CHECK(a.std_err > 0.0);
    const MCEstimate c = mc_mutual_information(fig1(), kClassical1, 100000, 18);
    CHECK(c.value != a.value);
}

TEST_CASE("zero-symbol input carries no information") {
    const AmplitudeDistribution zero({{0.0, 1.0}});
    const MCEstimate e = mc_mutual_information(zero, kClassical1, 1000000, 3);
    CHECK(std::abs(e.value) <= 3.0 * e.std_err);
}

TEST_CASE("phase-noise estimate on a single mass is exactly zero") {
    const MCEstimate e = mc_mutual_information(AmplitudeDistribution({{1.3, 1.0}}), kPn1, 100000, 4);
    CHECK(e.value == 0.0);
}

TEST_CASE("Fig. 1 mutual information at 1e7 samples") {
    const MCEstimate e = mc_mutual_information(fig1(), kClassical1, 10000000, 1);
    CHECK(std::abs(e.value - mutual_information(fig1(), kClassical1)) <= 3.0 * e.std_err);
    CHECK(std::abs(e.value - 0.0531) <= 3.0 * e.std_err);
}

TEST_CASE("output entropy agrees with a direct Monte Carlo oracle") {
    const AmplitudeDistribution F = fig1();
    const Mean m = batched_mean(
        10000000, 21,
        [&](Rng& rng) {
            const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.9 ? 0.0 : kInvSqrt2;
            return sample_R(r, 1.0, rng);
        },
        [&](double R) { return -log_output_density(R, F, 1.0); });
    CHECK(std::abs(m.value - output_entropy(F, 1.0)) <= 3.0 * m.std_err);
}

TEST_CASE("phase-noise divergence agrees with a direct Monte Carlo oracle") {
    const AmplitudeDistribution F({{0.0, 0.5}, {1.0, 0.5}});
    const Mean m = batched_mean(
        10000000, 22, [](Rng& rng) { return sample_R(1.0, 1.0, rng); },
        [&](double R) { return log_kernel_g(R, 1.0, 1.0) - log_output_density(R, F, 1.0); });
    CHECK(std::abs(m.value - divergence_pn(1.0, F, 1.0)) <= 3.0 * m.std_err);

    const MCEstimate e = mc_mutual_information(F, kPn1, 10000000, 23);
    CHECK(std::abs(e.value - mutual_information_pn(F, 1.0)) <= 3.0 * e.std_err);
}

TEST_CASE("standard error scales as one over root n") {
    std::vector<double> small, large;
    for (std::uint64_t seed = 1; seed <= 7; ++seed) {
        small.push_back(mc_mutual_information(fig1(), kClassical1, 100000, seed).std_err);
        large.push_back(mc_mutual_information(fig1(), kClassical1, 400000, seed).std_err);
    }
    std::nth_element(small.begin(), small.begin() + 3, small.end());
    std::nth_element(large.begin(), large.begin() + 3, large.end());
    const double ratio = small[3] / large[3];
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}
