#include "gridsr/bicubic.hpp"

#include <cmath>

#include "gridsr/kernels.hpp"

namespace gridsr {

Field bicubic_upsample(const Field& src, const GridSpec& target) {
    src.spec.validate();
    target.validate();
    if (!covers(src.spec, target))
        throw ConfigError("bicubic_upsample: target grid extends outside the source extent");
    if (std::abs(target.dlat) > std::abs(src.spec.dlat) + 1e-12 ||
        std::abs(target.dlon) > std::abs(src.spec.dlon) + 1e-12)
        throw ConfigError("bicubic_upsample: target grid is coarser than the source");

    Field out(target, src.time);
    // Fractional source indices of the first target center and per-step
    // increments, in source index units.
    const double row0 = src.spec.lat_index(target.lat_of(0));
    const double drow = target.dlat / src.spec.dlat;
    const double col0 = src.spec.lon_index(target.lon_of(0));
    const double dcol = target.dlon / src.spec.dlon;
    kernels::bicubic_resample(src.values.data(), src.spec.n_lat, src.spec.n_lon, out.values.data(),
                              target.n_lat, target.n_lon, row0, drow, col0, dcol);
    return out;
}

} // namespace gridsr
