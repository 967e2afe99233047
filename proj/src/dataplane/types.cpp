#include "driftids/dataplane/types.hpp"

namespace driftids::dataplane {

std::array<double, kFeatureDim> FeatureVector14::flat() const {
    std::array<double, kFeatureDim> out{};
    for (std::size_t a = 0; a < kAttributes; ++a) {
        out[a] = mu[a];
        out[kAttributes + a] = sigma[a];
    }
    return out;
}

FeatureVector14 FeatureVector14::from_flat(const std::array<double, kFeatureDim>& v) {
    FeatureVector14 f;
    for (std::size_t a = 0; a < kAttributes; ++a) {
        f.mu[a] = v[a];
        f.sigma[a] = v[kAttributes + a];
    }
    return f;
}

std::string to_string(Attack a) {
    switch (a) {
        case Attack::BH: return "BH";
        case Attack::DF: return "DF";
        case Attack::WP: return "WP";
        case Attack::LR: return "LR";
    }
    return "?";
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::base: return "base";
        case Variant::onoff: return "onoff";
        case Variant::gradual: return "gradual";
    }
    return "?";
}

Attack parse_attack(const std::string& s) {
    if (s == "BH") return Attack::BH;
    if (s == "DF") return Attack::DF;
    if (s == "WP") return Attack::WP;
    if (s == "LR") return Attack::LR;
    fail(ErrorKind::config, "unknown attack '" + s + "' (expected BH, DF, WP or LR)");
}

Variant parse_variant(const std::string& s) {
    if (s == "base") return Variant::base;
    if (s == "onoff") return Variant::onoff;
    if (s == "gradual") return Variant::gradual;
    fail(ErrorKind::config, "unknown variant '" + s + "' (expected base, onoff or gradual)");
}

}  // namespace driftids::dataplane
