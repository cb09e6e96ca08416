#pragma once

#include <string>

#include "gridsr/grid.hpp"

namespace gridsr {

// Per-sample (instance) normalization. The lr_raw variant takes statistics
// over the raw LR patch; lr_bicubic over the bicubic upsample of the patch
// restricted to the HR target footprint, whose distribution is closer to the
// output's.
enum class NormVariant { LrRaw, LrBicubic };

const char* norm_variant_name(NormVariant v);
NormVariant norm_variant_from_name(const std::string& name);

inline constexpr double kSigmaFloor = 1e-6; // Kelvin, constant-patch guard

struct InstanceStats {
    double mu = 0.0;
    double sigma = 0.0;
    NormVariant variant = NormVariant::LrBicubic;
};

// Population (1/N) statistics. hr_target is only consulted for LrBicubic.
InstanceStats instance_stats(const Field& lr_patch, NormVariant variant, const GridSpec& hr_target);

Field normalize(const Field& x, const InstanceStats& stats);
Field denormalize(const Field& z, const InstanceStats& stats);

// In-place buffer forms used by the training pipeline.
void normalize_values(std::vector<double>& v, const InstanceStats& stats);
void denormalize_values(std::vector<double>& v, const InstanceStats& stats);

} // namespace gridsr
