#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace zomd::cli {

/// 1-based line on which the value at JSON pointer `pointer` starts in `text`
/// (or its nearest existing ancestor). `text` must be valid JSON.
std::optional<int> locate_line(std::string_view text, std::string_view pointer);

}  // namespace zomd::cli
