#include "rician/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rician/error.hpp"
#include "rician/simd/kernels.hpp"
#include "rician/special.hpp"

namespace rician {

OutputMixture::OutputMixture(std::span<const double> powers, std::span<const double> probabilities,
                             double K)
    : powers_(powers.begin(), powers.end()),
      probs_(probabilities.begin(), probabilities.end()),
      k_(K) {
    if (powers_.empty() || powers_.size() != probs_.size())
        throw DomainError("mixture needs matching, nonempty power and probability lists");
    if (!std::isfinite(K) || K < 0.0)
        throw DomainError("Rician factor K must be finite and nonnegative");
    for (std::size_t j = 0; j < powers_.size(); ++j) {
        if (!std::isfinite(powers_[j]) || powers_[j] < 0.0)
            throw DomainError("input powers must be finite and nonnegative");
        if (!std::isfinite(probs_[j]) || probs_[j] < 0.0)
            throw DomainError("mixture probabilities must be finite and nonnegative");
        log_probs_.push_back(std::log(probs_[j]));
    }
    if (!(*std::max_element(probs_.begin(), probs_.end()) > 0.0))
        throw DomainError("mixture needs at least one positive probability");
}

OutputMixture::OutputMixture(const AmplitudeDistribution& F, double K)
    : OutputMixture(F.powers(), F.probabilities(), K) {}

double OutputMixture::max_power() const { return *std::max_element(powers_.begin(), powers_.end()); }

void OutputMixture::log_density(std::span<const double> R, std::span<double> out,
                                std::span<double> kernel_rows) const {
    std::vector<double> local;
    if (kernel_rows.empty()) {
        local.resize(R.size() * powers_.size());
        kernel_rows = local;
    }
    simd::kernels().log_mixture(R, powers_, log_probs_, k_, out, kernel_rows);
}

namespace {

struct ProbeBuffers {
    std::vector<double> lf, lg, g, d;
};

}  // namespace

ProbeValue information_density(double s, const OutputMixture& mixture, ChannelModel model,
                               const QuadratureConfig& q, bool with_slope) {
    if (!std::isfinite(s) || s < 0.0)
        throw DomainError("probe input power must be finite and nonnegative");
    const double K = mixture.rician_k();
    const double upper = truncation_point(s, K, q.r_tail_mass_tol);
    const double powers[1] = {s};
    const std::vector<double> breaks = kernel_breakpoints(powers, K, upper);
    const auto& kt = simd::kernels();
    const bool pn = model == ChannelModel::PhaseNoiseRician;
    const std::size_t m = with_slope ? 2 : 1;

    ProbeBuffers buf;
    const BatchIntegrand integrand = [&](std::span<const double> R, std::span<double> out) {
        const std::size_t n = R.size();
        buf.lf.resize(n);
        buf.lg.resize(n);
        buf.g.resize(n);
        mixture.log_density(R, buf.lf);
        kt.log_kernel(R, s, K, buf.lg);
        kt.exp(buf.lg, buf.g);
        if (with_slope) {
            buf.d.resize(n);
            kt.dlog_kernel(R, s, K, buf.d);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double w = pn ? buf.lg[i] - buf.lf[i] : buf.lf[i];
            const double gw = buf.g[i] == 0.0 ? 0.0 : buf.g[i] * w;
            out[i] = gw;
            if (with_slope)
                out[n + i] = gw * buf.d[i];
        }
    };
    const QuadratureResult res = integrate_panels(integrand, m, breaks, q);

    ProbeValue v;
    if (pn) {
        v.density = res.values[0];
        v.slope = with_slope ? res.values[1] : 0.0;
    } else {
        v.density = -res.values[0] - std::log1p(s) - 1.0;
        v.slope = with_slope ? -res.values[1] - 1.0 / (1.0 + s) : 0.0;
    }
    return v;
}

namespace {

// Components: [0] f ln f; [1+j] g_j ln f; [1+n+j] g_j d_j w_j; phase noise
// adds [1+2n+j] g_j ln g_j. w_j = ln f (classical) or ln g_j - ln f.
class ProfileIntegrand {
public:
    ProfileIntegrand(const OutputMixture& mixture, bool pn) : mix_(mixture), pn_(pn) {}

    std::size_t components() const { return 1 + (pn_ ? 3 : 2) * mix_.size(); }

    void operator()(std::span<const double> R, std::span<double> out) {
        const std::size_t n = R.size();
        const std::size_t m = mix_.size();
        const double K = mix_.rician_k();
        const auto& kt = simd::kernels();
        lf.resize(n);
        f.resize(n);
        rows.resize(n * m);
        g.resize(n * m);
        d.resize(n);
        mix_.log_density(R, lf, rows);
        kt.exp(lf, f);
        kt.exp(rows, g);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = f[i] == 0.0 ? 0.0 : f[i] * lf[i];
        for (std::size_t j = 0; j < m; ++j) {
            const double* gj = g.data() + j * n;
            const double* lj = rows.data() + j * n;
            kt.dlog_kernel(R, mix_.powers()[j], K, d);
            double* c_cross = out.data() + (1 + j) * n;
            double* c_slope = out.data() + (1 + m + j) * n;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = pn_ ? lj[i] - lf[i] : lf[i];
                c_cross[i] = gj[i] == 0.0 ? 0.0 : gj[i] * lf[i];
                c_slope[i] = gj[i] == 0.0 ? 0.0 : gj[i] * d[i] * w;
            }
            if (pn_) {
                double* c_self = out.data() + (1 + 2 * m + j) * n;
                for (std::size_t i = 0; i < n; ++i)
                    c_self[i] = gj[i] == 0.0 ? 0.0 : gj[i] * lj[i];
            }
        }
    }

    std::vector<double> lf, f, rows, g, d;

private:
    const OutputMixture& mix_;
    bool pn_;
};

}  // namespace

InformationProfile information_profile(std::span<const double> powers,
                                       std::span<const double> probabilities,
                                       const ChannelSpec& channel, const QuadratureConfig& q,
                                       bool with_curvature, const NodeSet* reuse) {
    const OutputMixture mixture(powers, probabilities, channel.rician_k);
    const bool pn = channel.model == ChannelModel::PhaseNoiseRician;
    const std::size_t m = mixture.size();
    ProfileIntegrand integrand(mixture, pn);
    const std::size_t comps = integrand.components();

    std::vector<double> values(comps);
    NodeSet nodes;
    if (reuse) {
        nodes = *reuse;
        std::vector<double> samples(comps * nodes.size());
        integrand(nodes.nodes, samples);
        for (std::size_t c = 0; c < comps; ++c)
            values[c] = integrate_on(nodes, std::span(samples).subspan(c * nodes.size(), nodes.size()));
    } else {
        const double upper =
            truncation_point(mixture.max_power(), channel.rician_k, q.r_tail_mass_tol);
        const std::vector<double> breaks = kernel_breakpoints(powers, channel.rician_k, upper);
        QuadratureResult res = integrate_panels(
            [&](std::span<const double> R, std::span<double> out) { integrand(R, out); }, comps,
            breaks, q);
        values = std::move(res.values);
        nodes = std::move(res.node_set);
    }

    InformationProfile prof;
    prof.output_entropy = -values[0];
    prof.density.resize(m);
    prof.slope.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double s = powers[j];
        if (pn) {
            prof.density[j] = values[1 + 2 * m + j] - values[1 + j];
            prof.slope[j] = values[1 + m + j];
        } else {
            prof.density[j] = -values[1 + j] - std::log1p(s) - 1.0;
            prof.slope[j] = -values[1 + m + j] - 1.0 / (1.0 + s);
        }
    }
    if (pn) {
        double mi = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            mi += probabilities[j] * prof.density[j];
        prof.mutual_information = mi;
    } else {
        double mean_log = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            mean_log += probabilities[j] * std::log1p(powers[j]);
        prof.mutual_information = prof.output_entropy - mean_log - 1.0;
    }

    if (with_curvature) {
        // int g_j g_k / f dR on the converged nodes
        const std::size_t nn = nodes.size();
        std::vector<double> samples(comps * nn);
        integrand(nodes.nodes, samples);
        std::vector<double> expo(nn), vals(nn);
        prof.curvature.assign(m * m, 0.0);
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = j; k < m; ++k) {
                for (std::size_t i = 0; i < nn; ++i)
                    expo[i] = integrand.rows[j * nn + i] + integrand.rows[k * nn + i] - integrand.lf[i];
                simd::kernels().exp(expo, vals);
                const double c = integrate_on(nodes, vals);
                prof.curvature[j * m + k] = prof.curvature[k * m + j] = c;
            }
    }
    prof.nodes = std::move(nodes);
    return prof;
}

double log_output_density(double R, const AmplitudeDistribution& F, double K) {
    if (!std::isfinite(R) || R < 0.0)
        throw DomainError("R must be finite and nonnegative");
    const OutputMixture mix(F, K);
    double out = 0.0;
    mix.log_density(std::span(&R, 1), std::span(&out, 1));
    return out;
}

double output_entropy(const AmplitudeDistribution& F, double K, const QuadratureConfig& q) {
    const std::vector<double> s = F.powers();
    const std::vector<double> p = F.probabilities();
    return information_profile(s, p, {ChannelModel::ClassicalRician, K}, q).output_entropy;
}

double mutual_information_classical(const AmplitudeDistribution& F, double K,
                                    const QuadratureConfig& q) {
    const std::vector<double> s = F.powers();
    const std::vector<double> p = F.probabilities();
    return information_profile(s, p, {ChannelModel::ClassicalRician, K}, q).mutual_information;
}

double divergence_pn(double r, const AmplitudeDistribution& F, double K, const QuadratureConfig& q) {
    if (!std::isfinite(r) || r < 0.0)
        throw DomainError("r must be finite and nonnegative");
    const OutputMixture mix(F, K);
    return information_density(r * r, mix, ChannelModel::PhaseNoiseRician, q, false).density;
}

double mutual_information_pn(const AmplitudeDistribution& F, double K, const QuadratureConfig& q) {
    const std::vector<double> s = F.powers();
    const std::vector<double> p = F.probabilities();
    return information_profile(s, p, {ChannelModel::PhaseNoiseRician, K}, q).mutual_information;
}

double mutual_information(const AmplitudeDistribution& F, const ChannelSpec& channel,
                          const QuadratureConfig& q) {
    channel.validate();
    return channel.model == ChannelModel::PhaseNoiseRician
               ? mutual_information_pn(F, channel.rician_k, q)
               : mutual_information_classical(F, channel.rician_k, q);
}

}  // namespace rician
