#include "tanom/run_manifest.hpp"

#include <fstream>
#include <sstream>

namespace tanom {

void RunManifest::add(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  entries.emplace_back(key, os.str());
}

void RunManifest::add(const std::string& key, std::int64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

void RunManifest::add(const std::string& key, std::uint64_t value) {
  entries.emplace_back(key, std::to_string(value));
}

void write_run_manifest(const RunManifest& rm, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot open run manifest for write: " + path.string());
  }
  os << "tool_version=" << rm.tool_version << '\n';
  os << "command=" << rm.command << '\n';
  for (const auto& [k, v] : rm.entries) {
    os << k << '=' << v << '\n';
  }
  if (!os) {
    throw std::runtime_error("write failed on run manifest: " + path.string());
  }
}

}  // namespace tanom
