#include "gridsr/normalization.hpp"

#include <algorithm>
#include <cmath>

#include "gridsr/bicubic.hpp"

namespace gridsr {

const char* norm_variant_name(NormVariant v) {
    return v == NormVariant::LrRaw ? "lr_raw" : "lr_bicubic";
}

NormVariant norm_variant_from_name(const std::string& name) {
    if (name == "lr_raw") return NormVariant::LrRaw;
    if (name == "lr_bicubic") return NormVariant::LrBicubic;
    throw ConfigError("unknown normalization variant '" + name + "'");
}

namespace {

InstanceStats stats_over(const std::vector<double>& v, NormVariant variant) {
    double s = 0.0;
    for (double x : v) s += x;
    const double mu = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    InstanceStats out;
    out.mu = mu;
    out.sigma = std::sqrt(ss / static_cast<double>(v.size()));
    out.variant = variant;
    return out;
}

} // namespace

InstanceStats instance_stats(const Field& lr_patch, NormVariant variant, const GridSpec& hr_target) {
    if (lr_patch.values.empty()) throw ShapeError("instance_stats: empty patch");
    if (variant == NormVariant::LrRaw) return stats_over(lr_patch.values, variant);
    const Field up = bicubic_upsample(lr_patch, hr_target);
    return stats_over(up.values, variant);
}

void normalize_values(std::vector<double>& v, const InstanceStats& stats) {
    const double inv = 1.0 / std::max(stats.sigma, kSigmaFloor);
    for (double& x : v) x = (x - stats.mu) * inv;
}

void denormalize_values(std::vector<double>& v, const InstanceStats& stats) {
    const double s = std::max(stats.sigma, kSigmaFloor);
    for (double& x : v) x = x * s + stats.mu;
}

Field normalize(const Field& x, const InstanceStats& stats) {
    Field out = x;
    normalize_values(out.values, stats);
    return out;
}

Field denormalize(const Field& z, const InstanceStats& stats) {
    Field out = z;
    denormalize_values(out.values, stats);
    return out;
}

} // namespace gridsr
