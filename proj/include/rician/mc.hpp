#pragma once

#include <cstdint>

#include "rician/channel.hpp"
#include "rician/distribution.hpp"

namespace rician {

struct MCEstimate {
    double value = 0.0;  // nats
    /// Standard error from the spread of kBatches batch means. Exactly 0
    /// only when every sample contributes the same value (phase-noise
    /// estimator on a single-mass input).
    double std_err = 0.0;
    std::int64_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr int kMCBatches = 100;
inline constexpr std::int64_t kMCMinSamples = 10000;

/// Monte Carlo estimate of I(F) from draws (r_k, R_k), r_k ~ F, R_k ~ g(., r_k).
/// Classical: -mean ln f_R(R_k) - sum p_i ln(1 + r_i^2) - 1.
/// Phase noise: mean of ln g(R_k, r_k) - ln f_R(R_k).
/// Batch b draws from its own generator seeded with (seed, b), so the result
/// is deterministic for a seed regardless of the number of threads.
MCEstimate mc_mutual_information(const AmplitudeDistribution& F, const ChannelSpec& channel,
                                 std::int64_t n_samples, std::uint64_t seed);

}  // namespace rician
