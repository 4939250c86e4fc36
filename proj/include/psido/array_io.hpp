#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "psido/grid.hpp"

namespace psido {

// PSLB binary layout (little-endian):
//   "PSLB" | u32 version = 1 | u32 d | u32 n | f64 R | n^d x (f64 re, f64 im)
// Payload is row-major with x_1 slowest.
inline constexpr std::uint32_t kPslbVersion = 1;

void write_pslb(std::ostream& out, const SampledFunction& f);
SampledFunction read_pslb(std::istream& in);

void write_pslb(const std::filesystem::path& path, const SampledFunction& f);
SampledFunction read_pslb(const std::filesystem::path& path);

/// CSV with columns i1..id,re,im.
void write_csv(std::ostream& out, const SampledFunction& f);
void write_csv(const std::filesystem::path& path, const SampledFunction& f);

}  // namespace psido
