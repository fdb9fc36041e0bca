#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rician/channel.hpp"
#include "rician/distribution.hpp"
#include "rician/quadrature.hpp"

namespace rician {

/// f_R(.; F) for a discrete input, stored in input-power coordinates.
/// Components with zero probability are allowed; they do not contribute to
/// f_R but their kernel rows are still produced.
class OutputMixture {
public:
    OutputMixture(std::span<const double> powers, std::span<const double> probabilities, double K);
    OutputMixture(const AmplitudeDistribution& F, double K);

    std::size_t size() const { return powers_.size(); }
    double rician_k() const { return k_; }
    std::span<const double> powers() const { return powers_; }
    std::span<const double> probabilities() const { return probs_; }
    double max_power() const;

    /// out[i] = ln f_R(R[i]). When kernel_rows is non-empty it must hold
    /// size() * R.size() values and receives ln g(R, s_j) row by row.
    void log_density(std::span<const double> R, std::span<double> out,
                     std::span<double> kernel_rows = {}) const;

private:
    std::vector<double> powers_;
    std::vector<double> probs_;
    std::vector<double> log_probs_;
    double k_;
};

/// Information density iota(s) of an input power s against the output law of
/// a mixture: the per-symbol contribution whose p-weighted sum is the mutual
/// information. Classical: -int g ln f - ln(1+s) - 1. Phase noise:
/// D(g(., s) || f).
struct ProbeValue {
    double density = 0.0;
    double slope = 0.0;  // d iota / d s
};

ProbeValue information_density(double s, const OutputMixture& mixture, ChannelModel model,
                               const QuadratureConfig& q, bool with_slope = true);

/// Everything the optimizer needs about a candidate at its own mass points.
struct InformationProfile {
    double mutual_information = 0.0;
    double output_entropy = 0.0;
    std::vector<double> density;    // iota(s_j)
    std::vector<double> slope;      // iota'(s_j)
    std::vector<double> curvature;  // n x n row-major, int g_j g_k / f dR
    NodeSet nodes;
};

/// Evaluates the profile. With `reuse` the integrals are taken on the given
/// nodes instead of adapting a fresh panel set.
InformationProfile information_profile(std::span<const double> powers,
                                       std::span<const double> probabilities,
                                       const ChannelSpec& channel, const QuadratureConfig& q,
                                       bool with_curvature = false, const NodeSet* reuse = nullptr);

double log_output_density(double R, const AmplitudeDistribution& F, double K);

/// h(R) = -int f_R ln f_R dR in nats.
double output_entropy(const AmplitudeDistribution& F, double K, const QuadratureConfig& q = {});

/// I(F) = h(R) - E ln(1 + r^2) - 1 for the classical model (uniform input phase).
double mutual_information_classical(const AmplitudeDistribution& F, double K,
                                    const QuadratureConfig& q = {});

/// D(f_{R|r} || f_R(.; F)).
double divergence_pn(double r, const AmplitudeDistribution& F, double K,
                     const QuadratureConfig& q = {});

/// I(r; R) = sum_i p_i D(f_{R|r_i} || f_R) for the phase-noise model.
double mutual_information_pn(const AmplitudeDistribution& F, double K,
                             const QuadratureConfig& q = {});

double mutual_information(const AmplitudeDistribution& F, const ChannelSpec& channel,
                          const QuadratureConfig& q = {});

}  // namespace rician
