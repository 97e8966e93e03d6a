#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cryptaudit {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view data);
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split_lines(std::string_view text);
std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

// "%.6f" without locale surprises.
std::string format_fixed(double value, int decimals);

// Finds the first ```json fenced block (or, failing that, the first fenced
// block of any language) and parses it. Prose outside the fence is ignored;
// the block itself must be valid JSON. Throws StructuredOutputError.
json parse_fenced_json(const std::string& reply);

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// thrown by any call is rethrown after all threads finish.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace cryptaudit
