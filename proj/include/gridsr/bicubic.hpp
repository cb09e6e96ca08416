#pragma once

#include "gridsr/grid.hpp"

namespace gridsr {

// Keys cubic-convolution interpolation (a = -0.5) of a field onto a finer
// grid. Boundary handling is edge replication. The target grid must sample a
// sub-region of the source extent and must not be coarser than the source.
Field bicubic_upsample(const Field& src, const GridSpec& target);

} // namespace gridsr
