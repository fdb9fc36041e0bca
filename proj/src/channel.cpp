#include "rician/channel.hpp"

#include <cmath>
#include <string>

#include "rician/error.hpp"

namespace rician {

void ChannelSpec::validate() const {
    if (!std::isfinite(rician_k) || rician_k < 0.0)
        throw DomainError("Rician factor K must be finite and nonnegative, got " +
                          std::to_string(rician_k));
}

std::string_view to_string(ChannelModel model) {
    switch (model) {
    case ChannelModel::ClassicalRician:
        return "rician";
    case ChannelModel::PhaseNoiseRician:
        return "rician-pn";
    }
    return "unknown";
}

ChannelModel parse_channel_model(std::string_view name) {
    if (name == "rician")
        return ChannelModel::ClassicalRician;
    if (name == "rician-pn")
        return ChannelModel::PhaseNoiseRician;
    throw DomainError("unknown channel model '" + std::string(name) + "'");
}

}  // namespace rician
