#pragma once

#include <string>
#include <string_view>

namespace rician {

enum class ChannelModel {
    ClassicalRician,   // y = (m + a) x + n
    PhaseNoiseRician,  // y = (a + m e^{j theta}) x + n, theta uniform
};

/// Channel family plus Rician factor K = |m|^2 / gamma^2. K = 0 is Rayleigh
/// for both models.
struct ChannelSpec {
    ChannelModel model = ChannelModel::ClassicalRician;
    double rician_k = 0.0;

    void validate() const;
};

std::string_view to_string(ChannelModel model);
ChannelModel parse_channel_model(std::string_view name);

}  // namespace rician
