#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "a3dmm/linear_map.hpp"

namespace a3dmm {

/// Coordinate-format matrix as read from disk; 0-based indices.
struct SparseData {
  struct Entry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;
    bool operator==(const Entry&) const = default;
  };

  Index rows = 0;
  Index cols = 0;
  std::vector<Entry> entries;

  SparseMatrixd to_sparse() const;
  MatrixXd to_dense() const;
  bool operator==(const SparseData&) const = default;
};

struct LibsvmData {
  SparseData features;
  VectorXd labels;
};

/// "label idx:val idx:val ..." per line, 1-based strictly ascending indices.
/// Blank lines and '#' comments are skipped. Throws ParseError naming the
/// line.
LibsvmData parse_libsvm(std::istream& in);
LibsvmData parse_libsvm(const std::string& text);
void write_libsvm(const LibsvmData& data, std::ostream& out);

/// Grayscale PGM (P2 or P5, maxval <= 65535) scaled to [0,1]. Row r of the
/// returned matrix is image row r. Throws FormatError with a byte offset.
MatrixXd load_pgm(std::string_view bytes);
MatrixXd load_pgm_file(const std::string& path);

/// Binary P5 with maxval 255; values clamped to [0,1].
std::string encode_pgm(const MatrixXd& image);

}  // namespace a3dmm
