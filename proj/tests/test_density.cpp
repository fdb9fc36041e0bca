#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rician/density.hpp"
#include "rician/distribution.hpp"
#include "rician/error.hpp"
#include "rician/special.hpp"

using namespace rician;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

AmplitudeDistribution fig1() { return AmplitudeDistribution({{0.0, 0.9}, {kInvSqrt2, 0.1}}); }

double lower_constant(const AmplitudeDistribution& F, double K) {
    double d = 0.0;
    for (const MassPoint& mp : F.points()) {
        const double s = mp.location * mp.location;
        d += mp.probability / (1.0 + s) * std::exp(-K * s / (1.0 + s));
    }
    return d;
}

AmplitudeDistribution random_distribution(std::mt19937_64& rng, int n, double r_max) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<MassPoint> pts;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double p = 0.05 + u(rng);
        pts.push_back({r_max * (i + u(rng)) / n, p});
        total += p;
    }
    for (MassPoint& mp : pts)
        mp.probability /= total;
    return AmplitudeDistribution::normalized(pts);
}

}  // namespace

TEST_CASE("distribution invariants") {
    CHECK_THROWS_AS(AmplitudeDistribution({}), DomainError);
    CHECK_THROWS_AS(AmplitudeDistribution({{0.0, 0.5}, {1.0, 0.4}}), DomainError);
    CHECK_THROWS_AS(AmplitudeDistribution({{1.0, 0.5}, {0.5, 0.5}}), DomainError);
    CHECK_THROWS_AS(AmplitudeDistribution({{-1.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(AmplitudeDistribution({{0.0, 0.0}, {1.0, 1.0}}), DomainError);
    const AmplitudeDistribution F = fig1();
    CHECK(F.second_moment() == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(F.fourth_moment() == doctest::Approx(0.025).epsilon(1e-14));
    CHECK(F.max_location() == kInvSqrt2);
}

TEST_CASE("log_output_density examples") {
    const AmplitudeDistribution zero({{0.0, 1.0}});
    for (double R : {0.0, 1.0, 30.0})
        CHECK(log_output_density(R, zero, 2.0) == doctest::Approx(-R).epsilon(1e-15));
    const double want = std::log(0.9 + 0.1 * (2.0 / 3.0) * std::exp(-1.0 / 3.0));
    CHECK(log_output_density(0.0, fig1(), 1.0) == doctest::Approx(want).epsilon(1e-14));
    CHECK(std::isfinite(log_output_density(1e5, fig1(), 1.0)));
}

TEST_CASE("output density lower bound on R in [0, 50]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const AmplitudeDistribution F = random_distribution(rng, 1 + trial % 4, 3.0);
        for (double K : {0.0, 0.5, 1.0, 4.0}) {
            const double logd = std::log(lower_constant(F, K));
            for (double R = 0.0; R <= 50.0; R += 0.25)
                CHECK(log_output_density(R, F, K) >= logd - R - 1e-12);
        }
    }
}

TEST_CASE("peak-limited output density decays exponentially") {
    std::mt19937_64 rng(12);
    for (double alpha : {0.05, 0.5, 2.0})
        for (int trial = 0; trial < 10; ++trial) {
            const AmplitudeDistribution F = random_distribution(rng, 1 + trial % 3, std::sqrt(alpha));
            for (double K : {0.0, 1.0, 3.0}) {
                const double logd = std::log(lower_constant(F, K));
                for (double R = 0.0; R <= 50.0; R += 0.25)
                    CHECK(log_output_density(R, F, K) <=
                          logd - R / (1.0 + alpha) + std::sqrt(K * R) + 1e-12);
            }
        }
}

TEST_CASE("output entropy examples") {
    CHECK(output_entropy(AmplitudeDistribution({{0.0, 1.0}}), 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(output_entropy(AmplitudeDistribution({{2.0, 1.0}}), 0.0) ==
          doctest::Approx(1.0 + std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("classical mutual information examples") {
    CHECK(std::abs(mutual_information_classical(AmplitudeDistribution({{0.0, 1.0}}), 1.0)) <= 1e-9);
    for (double r0 : {0.3, 1.0, 4.0})
        CHECK(std::abs(mutual_information_classical(AmplitudeDistribution({{r0, 1.0}}), 0.0)) <= 1e-9);
    CHECK(mutual_information_classical(AmplitudeDistribution({{1.0, 1.0}}), 1.0) > 1e-3);
    CHECK(std::abs(mutual_information_classical(fig1(), 1.0) - 0.0531) <= 5e-4);
}

TEST_CASE("phase-noise divergence and mutual information examples") {
    for (double r : {0.0, 0.5, 2.0})
        CHECK(std::abs(divergence_pn(r, AmplitudeDistribution({{r, 1.0}}), 1.0)) <= 1e-12);
    CHECK(mutual_information_pn(AmplitudeDistribution({{1.3, 1.0}}), 2.0) == 0.0);
    const AmplitudeDistribution F({{0.0, 0.5}, {1.0, 0.5}});
    CHECK(divergence_pn(1.0, F, 1.0) > 0.0);
    CHECK(mutual_information_pn(F, 1.0) ==
          doctest::Approx(0.5 * divergence_pn(0.0, F, 1.0) + 0.5 * divergence_pn(1.0, F, 1.0)).epsilon(1e-10));
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const AmplitudeDistribution G = random_distribution(rng, 2 + trial % 3, 3.0);
        CHECK(mutual_information_pn(G, 0.0) ==
              doctest::Approx(mutual_information_classical(G, 0.0)).epsilon(1e-8).scale(1e-8));
    }
}

TEST_CASE("mutual information nonnegativity and model ordering") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const AmplitudeDistribution F = random_distribution(rng, 1 + trial % 5, 0.5 + trial % 4);
        for (double K : {0.5, 1.0, 3.0}) {
            const double ic = mutual_information_classical(F, K);
            const double ip = mutual_information_pn(F, K);
            CHECK(ic >= -1e-9);
            CHECK(ip >= -1e-9);
            CHECK(ic >= ip - 1e-8);
        }
    }
}

TEST_CASE("mutual information is concave in the probabilities") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 4;
        std::vector<double> s(n);
        for (int i = 0; i < n; ++i)
            s[i] = std::pow(0.8 * (i + u(rng)), 2);
        std::vector<double> p(n), p2(n), mid(n);
        double a = 0.0, b = 0.0;
        for (int i = 0; i < n; ++i) {
            a += p[i] = u(rng);
            b += p2[i] = u(rng);
        }
        for (int i = 0; i < n; ++i) {
            p[i] /= a;
            p2[i] /= b;
            mid[i] = 0.5 * (p[i] + p2[i]);
        }
        for (ChannelModel model : {ChannelModel::ClassicalRician, ChannelModel::PhaseNoiseRician}) {
            const ChannelSpec ch{model, 1.0 + trial % 3};
            const auto mi = [&](const std::vector<double>& q) {
                return mutual_information(AmplitudeDistribution::from_powers(s, q), ch);
            };
            CHECK(mi(mid) >= 0.5 * mi(p) + 0.5 * mi(p2) - 1e-9);
        }
    }
}

TEST_CASE("information profile derivatives match finite differences") {
    const std::vector<double> s = {0.0, 0.3, 1.1};
    const std::vector<double> p = {0.6, 0.25, 0.15};
    for (ChannelModel model : {ChannelModel::ClassicalRician, ChannelModel::PhaseNoiseRician}) {
        const ChannelSpec ch{model, 1.5};
        const InformationProfile prof = information_profile(s, p, ch, {}, true);
        CHECK(prof.mutual_information == doctest::Approx(mutual_information(AmplitudeDistribution::from_powers(s, p), ch)).epsilon(1e-10));
        double sum = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j)
            sum += p[j] * prof.density[j];
        CHECK(sum == doctest::Approx(prof.mutual_information).epsilon(1e-10));
        // directional derivative along the simplex moving mass from point 0 to point 2
        const double h = 1e-5;
        std::vector<double> pp = p, pm = p;
        pp[0] -= h; pp[2] += h;
        pm[0] += h; pm[2] -= h;
        const double fd = (information_profile(s, pp, ch, {}).mutual_information -
                           information_profile(s, pm, ch, {}).mutual_information) / (2 * h);
        CHECK(fd == doctest::Approx(prof.density[2] - prof.density[0]).epsilon(1e-6));
        // location derivative of MI is p_j iota'(s_j)
        for (std::size_t j : {1u, 2u}) {
            std::vector<double> sp = s, sm = s;
            sp[j] += h;
            sm[j] -= h;
            const double fds = (information_profile(sp, p, ch, {}).mutual_information -
                                information_profile(sm, p, ch, {}).mutual_information) / (2 * h);
            CHECK(fds == doctest::Approx(p[j] * prof.slope[j]).epsilon(1e-5));
        }
        // curvature: second difference in p along the same direction
        const double h2 = 1e-3;
        std::vector<double> q1 = p, q2 = p;
        q1[0] -= h2; q1[2] += h2;
        q2[0] += h2; q2[2] -= h2;
        const double second = (information_profile(s, q1, ch, {}).mutual_information +
                               information_profile(s, q2, ch, {}).mutual_information -
                               2.0 * prof.mutual_information) / (h2 * h2);
        const std::size_t m = s.size();
        const auto H = [&](std::size_t a, std::size_t b) { return -prof.curvature[a * m + b]; };
        CHECK(second == doctest::Approx(H(0, 0) + H(2, 2) - 2.0 * H(0, 2)).epsilon(1e-4));
    }
}

TEST_CASE("quadrature results are bitwise deterministic") {
    const ChannelSpec ch{ChannelModel::ClassicalRician, 1.0};
    const double a = mutual_information(fig1(), ch);
    const double b = mutual_information(fig1(), ch);
    CHECK(a == b);
    const ChannelSpec pn{ChannelModel::PhaseNoiseRician, 1.0};
    CHECK(mutual_information(fig1(), pn) == mutual_information(fig1(), pn));
}
