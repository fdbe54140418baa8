#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace breachcat {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitUsage = 64;

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Entry point of the breachcat tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace breachcat
