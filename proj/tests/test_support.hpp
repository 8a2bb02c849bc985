#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace test_support {

inline std::filesystem::path fixture_dir() { return ISOPREF_FIXTURE_DIR; }
inline std::filesystem::path source_dir() { return ISOPREF_SOURCE_DIR; }

#ifdef ISOPREF_CLI
inline std::string cli() { return ISOPREF_CLI; }
#endif

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("isopref_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

// Runs a shell command and returns its exit status. Output is discarded
// unless `stdout_path` is given.
inline int run(const std::string& command, const std::filesystem::path& stdout_path = {}) {
  const std::string sink = stdout_path.empty() ? "/dev/null" : "'" + stdout_path.string() + "'";
  const int status = std::system((command + " >" + sink + " 2>/dev/null").c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

}  // namespace test_support
