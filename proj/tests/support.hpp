#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fkbs::testkit {

inline std::filesystem::path source_dir() { return FKBS_SOURCE_DIR; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("fkbs-" + tag + "-" + std::to_string(rd()));
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

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Straight-line interpolation through (x_i, y_i) knots, written without
// reference to the library's shape code. Knots must be sorted by x; at a
// vertical edge the higher of the coincident values wins.
inline double interpolate(const std::vector<std::pair<double, double>>& knots, double x) {
  if (x < knots.front().first || x > knots.back().first) return 0.0;
  double best = 0.0;
  bool hit = false;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const auto [x0, y0] = knots[i];
    const auto [x1, y1] = knots[i + 1];
    if (x < x0 || x > x1) continue;
    double y = 0.0;
    if (x1 == x0) {
      y = std::max(y0, y1);
    } else if (x == x0) {
      y = y0;
    } else if (x == x1) {
      y = y1;
    } else {
      y = y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
    best = hit ? std::max(best, y) : y;
    hit = true;
  }
  return best;
}

// Knots of a trapezoid a <= b <= c <= d with a possibly vertical left/right edge.
inline std::vector<std::pair<double, double>> trapezoid_knots(double a, double b, double c, double d) {
  return {{a, a == b ? 1.0 : 0.0}, {b, 1.0}, {c, 1.0}, {d, c == d ? 1.0 : 0.0}};
}

}  // namespace fkbs::testkit
