// Run manifest: the resolved configuration written beside every artifact so
// any run can be replayed bit-for-bit from its recorded flags and seeds.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tanom {

struct RunManifest {
  std::string tool_version;
  std::string command;  // subcommand name
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value);
  void add(const std::string& key, std::int64_t value);
  void add(const std::string& key, std::uint64_t value);
};

void write_run_manifest(const RunManifest& rm, const std::filesystem::path& path);

}  // namespace tanom
