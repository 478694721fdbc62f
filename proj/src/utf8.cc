#include "survey/utf8.h"

#include <unicode/utf8.h>

namespace survey::utf8 {

bool is_valid(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const int32_t n = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) return false;
  }
  return true;
}

std::vector<std::string> code_points(std::string_view bytes) {
  std::vector<std::string> out;
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const int32_t n = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  while (i < n) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, n, c);
    if (c < 0) {
      out.emplace_back("\xEF\xBF\xBD");
    } else {
      out.emplace_back(bytes.substr(start, i - start));
    }
  }
  return out;
}

std::size_t length(std::string_view bytes) {
  const auto* s = reinterpret_cast<const uint8_t*>(bytes.data());
  const int32_t n = static_cast<int32_t>(bytes.size());
  int32_t i = 0;
  std::size_t count = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(s, i, n, c);
    ++count;
  }
  return count;
}

}  // namespace survey::utf8
