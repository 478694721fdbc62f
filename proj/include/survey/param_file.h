#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "survey/tensor.h"

namespace survey::nn {

// Binary parameter file, all integers and floats little-endian:
//
//   "SVYPARAM"                   8-byte magic
//   u32 version                  kParamFileVersion
//   u64 n, n bytes               free-form metadata (UTF-8)
//   u32 count
//   count x { u32 len, name bytes, u32 rank, rank x u64 dim, f64 values... }
inline constexpr std::uint32_t kParamFileVersion = 1;

struct ParamFile {
  std::string metadata;
  std::vector<NamedTensor> tensors;
};

std::string serialize_params(std::span<const NamedTensor> tensors,
                             std::string_view metadata = {});
ParamFile deserialize_params(std::string_view bytes);  // IoError on corruption

void save_params(const std::filesystem::path& path, std::span<const NamedTensor> tensors,
                 std::string_view metadata = {});
ParamFile load_params(const std::filesystem::path& path);

}  // namespace survey::nn
