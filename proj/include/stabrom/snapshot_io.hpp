// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "stabrom/fom_solver.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

// Binary matrix container: magic "ROMSNAP1", then rows/cols/reserved as
// unsigned 64-bit little-endian, then rows*cols doubles in column-major
// order, then the time step as one double. All floats little-endian.
inline constexpr char kSnapshotMagic[8] = {'R', 'O', 'M', 'S', 'N', 'A', 'P', '1'};

namespace detail {

inline void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(buf), 8);
}

inline std::uint64_t read_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void write_f64(std::ostream& os, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  write_u64(os, bits);
}

inline double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace detail

/// Streaming writer: header first, then one column per append, then the
/// trailing time step on finish.
class SnapshotWriter {
 public:
  SnapshotWriter(const std::string& path, std::uint64_t rows, std::uint64_t cols)
      : os_(path, std::ios::binary), rows_(rows), cols_(cols) {
    if (!os_) throw std::runtime_error("SnapshotWriter: cannot open " + path);
    os_.write(kSnapshotMagic, 8);
    detail::write_u64(os_, rows);
    detail::write_u64(os_, cols);
    detail::write_u64(os_, 0);  // reserved
  }

  void append_column(const Vec& column) {
    if (static_cast<std::uint64_t>(column.size()) != rows_ || written_ == cols_) {
      throw std::runtime_error("SnapshotWriter: column shape mismatch");
    }
    for (Eigen::Index i = 0; i < column.size(); ++i) detail::write_f64(os_, column(i));
    ++written_;
  }

  void finish(double dt) {
    if (written_ != cols_) throw std::runtime_error("SnapshotWriter: missing columns");
    detail::write_f64(os_, dt);
    os_.close();
    if (!os_.good()) throw std::runtime_error("SnapshotWriter: write failed");
  }

 private:
  std::ofstream os_;
  std::uint64_t rows_, cols_;
  std::uint64_t written_ = 0;
};

inline void save_snapshot(const std::string& path, const Mat& m, double dt) {
  SnapshotWriter w(path, static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) w.append_column(m.col(c));
  w.finish(dt);
}

struct SnapshotFile {
  Mat matrix;
  double dt = 0.0;
};

inline SnapshotFile load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_snapshot: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSnapshotMagic, 8) != 0) {
    throw std::runtime_error("load_snapshot: bad magic in " + path);
  }
  const std::uint64_t rows = detail::read_u64(is);
  const std::uint64_t cols = detail::read_u64(is);
  detail::read_u64(is);  // reserved
  SnapshotFile out;
  out.matrix.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t c = 0; c < cols; ++c) {
    for (std::uint64_t r = 0; r < rows; ++r) {
      out.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::read_f64(is);
    }
  }
  out.dt = detail::read_f64(is);
  if (!is) throw std::runtime_error("load_snapshot: truncated file " + path);
  return out;
}

inline void save_trajectory(const std::string& path, const Trajectory& traj) {
  save_snapshot(path, traj.states, traj.dt);
}

inline Trajectory load_trajectory(const std::string& path) {
  const SnapshotFile file = load_snapshot(path);
  return Trajectory{file.dt, file.matrix};
}

}  // namespace stabrom
