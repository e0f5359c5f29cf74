#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "scimap/corpus.hpp"

namespace scimap::testing {

/// A record that passes every preprocessing rule.
inline Record valid_record(const std::string& id, std::vector<std::string> subjects = {"physics"},
                           std::vector<std::string> references = {"X"}) {
  Record r;
  r.id = id;
  r.title = "Title of " + id;
  r.abstract = std::string(150, 'a');
  r.year = 2020;
  r.authors = {"A. Author"};
  r.journal = "Journal";
  r.subjects = std::move(subjects);
  r.references = std::move(references);
  return r;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("scimap-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace scimap::testing
