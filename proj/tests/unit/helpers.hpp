#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "seqdesign/csv.hpp"
#include "seqdesign/matrix.hpp"
#include "seqdesign/random.hpp"

namespace testing {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("seqdesign-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline seqdesign::Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                       double lo = 0.0, double hi = 1.0) {
  seqdesign::Rng rng(seed);
  seqdesign::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

inline std::filesystem::path data_dir() { return SEQDESIGN_TEST_DATA_DIR; }

}  // namespace testing
