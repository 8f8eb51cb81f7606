#pragma once

namespace dtn {

// Principal branch W0 of the Lambert W function (x >= -1/e); NaN outside.
double lambert_w0(double x);

// Secondary real branch W-1 on [-1/e, 0); NaN outside.
double lambert_wm1(double x);

}  // namespace dtn
