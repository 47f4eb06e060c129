#pragma once

#include <string>
#include <string_view>

namespace mtcsim {

// Shortest round-trip decimal form (std::to_chars); stable bytes for CSV output.
std::string format_double(double value);

// Writes to "<path>.tmp" then renames over the target, so a rerun replaces the
// file in one step and a crash never leaves a half-written output.
void atomic_write_file(const std::string& path, std::string_view contents);

std::string read_file(const std::string& path);

}  // namespace mtcsim
