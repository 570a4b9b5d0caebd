#pragma once

#include <string>

namespace kdvlab {

/// Shortest decimal string that reads back to the same double ("nan",
/// "inf", "-inf" for non-finite values). Stable across platforms.
[[nodiscard]] std::string format_double(double v);

}  // namespace kdvlab
