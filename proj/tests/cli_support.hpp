#pragma once

// Helpers for driving the command-line tool from test binaries.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "simcheck/io.hpp"

namespace cli {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("simcheck_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_csv(const std::filesystem::path& path, const simcheck::Dataset& d) {
  std::ofstream out(path);
  simcheck::write_dataset(out, d);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Runs the tool with `args`, stderr discarded; returns the exit status.
inline int run(const std::string& args) {
  const std::string cmd = std::string("\"") + SIMCHECK_CLI_PATH + "\" " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

inline std::string field(const std::string& report, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

}  // namespace cli
