// Binary model and dataset files.
//
// Layout (little-endian):
//   "FEPL" | u32 version | u32 kind | payload | u32 CRC-32 of all prior bytes
//
// Model payload: architecture descriptor, u64 parameter count, f64 params.
// Dataset payload: u64 map hash, 4 x f64 bounds, sensor config, u32 B,
// u64 record count, then per record 2 x f64 pose and B x f32 ranges.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fepl/dataset.hpp"
#include "fepl/genmodel.hpp"

namespace fepl {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class FileKind : std::uint32_t { kModel = 1, kDataset = 2 };

std::string encode_model(const GenModel& model);
GenModel decode_model(std::string_view bytes);
std::string encode_dataset(const Dataset& data);
Dataset decode_dataset(std::string_view bytes);

void save_model(const GenModel& model, const std::filesystem::path& path);
GenModel load_model(const std::filesystem::path& path);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace fepl
