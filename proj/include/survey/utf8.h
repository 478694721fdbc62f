#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace survey::utf8 {

bool is_valid(std::string_view bytes);

// One string per code point; invalid sequences come back as U+FFFD.
std::vector<std::string> code_points(std::string_view bytes);

std::size_t length(std::string_view bytes);  // in code points

}  // namespace survey::utf8
