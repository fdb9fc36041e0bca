#include "rician/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rician/density.hpp"
#include "rician/error.hpp"
#include "rician/parallel.hpp"
#include "rician/special.hpp"

namespace rician {

namespace {

constexpr std::size_t kChunk = 4096;

/// Sum over one batch of the per-sample estimator terms.
double batch_sum(const AmplitudeDistribution& F, const OutputMixture& mixture, bool pn,
                 std::int64_t count, Rng& rng) {
    const std::vector<double> r = F.locations();
    const std::vector<double> p = F.probabilities();
    const std::size_t n = r.size();
    std::vector<double> cdf(n);
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> R, lf, rows;
    std::vector<std::size_t> idx;
    double sum = 0.0;
    for (std::int64_t done = 0; done < count;) {
        const std::size_t m = static_cast<std::size_t>(std::min<std::int64_t>(kChunk, count - done));
        R.resize(m);
        idx.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double u = unit(rng) * cdf.back();
            const std::size_t i = std::min<std::size_t>(
                static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                n - 1);
            idx[k] = i;
            R[k] = sample_R(r[i], mixture.rician_k(), rng);
        }
        lf.resize(m);
        rows.resize(m * n);
        mixture.log_density(R, lf, rows);
        for (std::size_t k = 0; k < m; ++k)
            sum += pn ? rows[idx[k] * m + k] - lf[k] : -lf[k];
        done += static_cast<std::int64_t>(m);
    }
    return sum;
}

}  // namespace

MCEstimate mc_mutual_information(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                 std::int64_t n_samples, std::uint64_t seed) {
    channel.validate();
    if (n_samples < kMCMinSamples)
        throw DomainError("Monte Carlo estimate needs at least 10000 samples");
    const bool pn = channel.model == ChannelModel::PhaseNoiseRician;
    const OutputMixture mixture(F, channel.rician_k);

    std::vector<std::int64_t> sizes(kMCBatches, n_samples / kMCBatches);
    for (std::int64_t b = 0; b < n_samples % kMCBatches; ++b)
        ++sizes[static_cast<std::size_t>(b)];
    std::vector<double> sums(kMCBatches);
    parallel_for(kMCBatches, [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(b)};
        Rng rng(seq);
        sums[b] = batch_sum(F, mixture, pn, sizes[b], rng);
    });

    double total = 0.0;
    for (double s : sums)
        total += s;
    const double mean = total / static_cast<double>(n_samples);
    double var = 0.0;
    for (std::size_t b = 0; b < sums.size(); ++b) {
        const double e = sums[b] / static_cast<double>(sizes[b]) - mean;
        var += e * e;
    }
    var /= static_cast<double>(kMCBatches - 1);

    MCEstimate est;
    est.n_samples = n_samples;
    est.seed = seed;
    est.std_err = std::sqrt(var / kMCBatches);
    if (pn) {
        est.value = mean;
    } else {
        double mean_log = 0.0;
        for (const MassPoint& mp : F.points())
            mean_log += mp.probability * std::log1p(mp.location * mp.location);
        est.value = mean - mean_log - 1.0;
    }
    return est;
}

}  // namespace rician
