#pragma once

#include <filesystem>

#include "nid/encoder.hpp"

namespace nid {

// Layout:
//   u64 little-endian header length N
//   N bytes of JSON: {"format":"nid-checkpoint","version":1,"dtype":"f32le",
//                     "tensors":[{"name","shape":[r,c],"offset","bytes"}...]}
//   tensor payload, little-endian IEEE-754 binary32, row-major; offsets are
//   relative to the start of the payload.

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace nid
