#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include <json.hpp>

#include "newsdesk/snapshot_store.hpp"

namespace testutil {

namespace fs = std::filesystem;

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("newsdesk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Writes a minimal valid bundle; fields can be overwritten afterwards.
inline fs::path write_bundle(const fs::path& dir, const std::string& outlet, const std::string& captured_at,
                             const std::string& page =
                                 "<html><body><div><a href=\"https://x.example/2024/01/02/a-story\">A story</a>"
                                 "</div></body></html>",
                             const std::string& links =
                                 R"([{"url": "https://x.example/2024/01/02/a-story", "text": "A story"}])") {
  fs::create_directories(dir);
  newsdesk::write_file(dir / "page.html", page);
  newsdesk::write_file(dir / "links.json", links);
  nlohmann::json meta = {{"outlet_id", outlet}, {"captured_at", captured_at}};
  newsdesk::write_file(dir / "meta.json", meta.dump());
  return dir;
}

template <class Fn>
double seconds(Fn fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace testutil
