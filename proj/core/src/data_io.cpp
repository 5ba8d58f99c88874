#include "a3dmm/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "a3dmm/error.hpp"
#include "a3dmm/trace.hpp"

namespace a3dmm {

SparseMatrixd SparseData::to_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries.size());
  for (const auto& e : entries) t.emplace_back(e.row, e.col, e.value);
  SparseMatrixd m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

MatrixXd SparseData::to_dense() const {
  MatrixXd m = MatrixXd::Zero(rows, cols);
  for (const auto& e : entries) m(e.row, e.col) = e.value;
  return m;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& reason) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + reason);
}

bool to_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() &&
         std::isfinite(out);
}

}  // namespace

LibsvmData parse_libsvm(std::istream& in) {
  LibsvmData data;
  std::vector<double> labels;
  std::string line;
  int line_no = 0;
  Index row = 0;
  Index max_col = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    double label = 0.0;
    if (!to_double(tok, label)) parse_fail(line_no, "bad label '" + tok + "'");
    Index last = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) {
        parse_fail(line_no, "expected idx:val, got '" + tok + "'");
      }
      long long idx = 0;
      const std::string_view idx_s(tok.data(), colon);
      auto r = std::from_chars(idx_s.data(), idx_s.data() + idx_s.size(), idx);
      if (r.ec != std::errc() || r.ptr != idx_s.data() + idx_s.size() ||
          idx < 1) {
        parse_fail(line_no, "bad index in '" + tok + "'");
      }
      double val = 0.0;
      if (!to_double(std::string_view(tok).substr(colon + 1), val)) {
        parse_fail(line_no, "bad value in '" + tok + "'");
      }
      if (idx <= last) {
        parse_fail(line_no, "indices not strictly ascending at " +
                                std::to_string(idx));
      }
      last = idx;
      data.features.entries.push_back({row, static_cast<Index>(idx - 1), val});
      max_col = std::max<Index>(max_col, idx);
    }
    labels.push_back(label);
    ++row;
  }
  data.features.rows = row;
  data.features.cols = max_col;
  data.labels = Eigen::Map<VectorXd>(labels.data(),
                                     static_cast<Index>(labels.size()));
  return data;
}

LibsvmData parse_libsvm(const std::string& text) {
  std::istringstream in(text);
  return parse_libsvm(in);
}

void write_libsvm(const LibsvmData& data, std::ostream& out) {
  std::vector<SparseData::Entry> sorted = data.features.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::size_t pos = 0;
  for (Index r = 0; r < data.labels.size(); ++r) {
    out << format_double(data.labels(r));
    for (; pos < sorted.size() && sorted[pos].row == r; ++pos) {
      out << ' ' << sorted[pos].col + 1 << ':'
          << format_double(sorted[pos].value);
    }
    out << '\n';
  }
}

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::string_view bytes) : b_(bytes) {}

  [[noreturn]] void fail(const std::string& reason) const {
    throw Error(Errc::FormatError,
                "offset " + std::to_string(pos_) + ": " + reason);
  }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const char c = b_[pos_];
      if (c == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint() {
    skip_space_and_comments();
    if (pos_ >= b_.size()) fail("unexpected end of data");
    long v = 0;
    auto r = std::from_chars(b_.data() + pos_, b_.data() + b_.size(), v);
    if (r.ec != std::errc() || v < 0) fail("expected an unsigned integer");
    pos_ = static_cast<std::size_t>(r.ptr - b_.data());
    return v;
  }

  std::string_view magic() {
    if (b_.size() < 2) fail("missing magic number");
    pos_ = 2;
    return b_.substr(0, 2);
  }

  std::size_t pos_ = 0;
  std::string_view b_;
};

}  // namespace

MatrixXd load_pgm(std::string_view bytes) {
  PgmReader rd(bytes);
  const auto magic = rd.magic();
  if (magic != "P2" && magic != "P5") rd.fail("not a P2/P5 graymap");
  const long width = rd.read_uint();
  const long height = rd.read_uint();
  const long maxval = rd.read_uint();
  if (width < 1 || height < 1) rd.fail("empty image");
  if (maxval < 1 || maxval > 65535) rd.fail("maxval out of range");
  MatrixXd img(height, width);
  if (magic == "P2") {
    for (long r = 0; r < height; ++r) {
      for (long c = 0; c < width; ++c) {
        const long v = rd.read_uint();
        if (v > maxval) rd.fail("sample above maxval");
        img(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
      }
    }
    return img;
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (rd.pos_ >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[rd.pos_]))) {
    rd.fail("missing raster separator");
  }
  ++rd.pos_;
  const std::size_t sample = maxval < 256 ? 1 : 2;
  const std::size_t need = static_cast<std::size_t>(width) *
                           static_cast<std::size_t>(height) * sample;
  if (bytes.size() - rd.pos_ < need) {
    rd.fail("truncated raster: need " + std::to_string(need) + " bytes, have " +
            std::to_string(bytes.size() - rd.pos_));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + rd.pos_);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      long v = *p++;
      if (sample == 2) v = (v << 8) | *p++;
      if (v > maxval) {
        rd.pos_ = static_cast<std::size_t>(
            reinterpret_cast<const char*>(p) - bytes.data()) - sample;
        rd.fail("sample above maxval");
      }
      img(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

MatrixXd load_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return load_pgm(bytes);
}

std::string encode_pgm(const MatrixXd& image) {
  std::string out = "P5\n" + std::to_string(image.cols()) + " " +
                    std::to_string(image.rows()) + "\n255\n";
  for (Index r = 0; r < image.rows(); ++r) {
    for (Index c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(image(r, c), 0.0, 1.0);
      out.push_back(static_cast<char>(std::lround(v * 255.0)));
    }
  }
  return out;
}

}  // namespace a3dmm
