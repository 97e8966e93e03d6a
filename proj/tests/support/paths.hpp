#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace testpaths {

inline std::filesystem::path source_dir() { return CRYPTAUDIT_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

// A fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("cryptaudit-" + name + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testpaths
