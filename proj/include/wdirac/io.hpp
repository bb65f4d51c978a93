#pragma once

// CSV tables, content hashes and binary eigenvector / matrix dumps.
//
// Binary layout (little-endian):
//   char[8]  magic      "WDEV0001" (eigenvectors) or "WDMX0001" (matrix)
//   u64      geometry hash
//   u64      weight hash
//   u64      rows
//   u64      cols
//   i64[cols] signed eigenvalue index per column (eigenvectors only)
//   f64[2 * rows * cols] row-major complex entries, (re, im) pairs

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "wdirac/spectral.hpp"

namespace wdirac {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

// ---------------------------------------------------------------------------
// FNV-1a hashing.

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void f64(double v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void text(std::string_view s) { bytes(s.data(), s.size()); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t hash_text(std::string_view s) {
  Fnv1a h;
  h.text(s);
  return h.value();
}

inline std::uint64_t hash_geometry(const Geometry& g) {
  Fnv1a h;
  h.i64(static_cast<std::int64_t>(g.kind));
  for (double l : g.lengths) h.f64(l);
  for (double t : g.twist) h.f64(t);
  h.i64(g.chirality_sign);
  h.i64(g.resolution);
  return h.value();
}

inline std::uint64_t hash_weight(const WeightField& w) {
  Fnv1a h;
  h.i64(w.fiber_dim());
  for (const Mat& block : w.values()) {
    for (Eigen::Index j = 0; j < block.cols(); ++j) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        h.f64(block(i, j).real());
        h.f64(block(i, j).imag());
      }
    }
  }
  return h.value();
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV.

/// Shortest round-trip decimal for a double ("%.17g").
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  class Row {
   public:
    explicit Row(CsvTable& t) : t_(t) {}
    Row& operator<<(const std::string& s) { cells_.push_back(quote(s)); return *this; }
    Row& operator<<(const char* s) { return *this << std::string(s); }
    Row& operator<<(double v) { cells_.push_back(format_double(v)); return *this; }
    Row& operator<<(int v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(long v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(long long v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(unsigned long v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(unsigned long long v) { cells_.push_back(std::to_string(v)); return *this; }
    Row& operator<<(bool v) { cells_.push_back(v ? "true" : "false"); return *this; }
    ~Row() {
      if (cells_.size() != t_.header_.size()) {
        std::fprintf(stderr, "csv row has %zu cells, header has %zu\n", cells_.size(),
                     t_.header_.size());
        std::abort();
      }
      t_.rows_.push_back(std::move(cells_));
    }

   private:
    CsvTable& t_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }
  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    append_line(out, header_);
    for (const auto& r : rows_) append_line(out, r);
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path.string());
    f << str();
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }

  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Binary dumps.

inline constexpr char kEigenvectorMagic[9] = "WDEV0001";
inline constexpr char kMatrixMagic[9] = "WDMX0001";

struct BinaryDump {
  std::string magic;
  std::uint64_t geometry_hash = 0;
  std::uint64_t weight_hash = 0;
  std::vector<std::int64_t> indices;
  Mat values;
};

namespace detail {

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw ShapeError("binary dump is truncated");
  return v;
}

inline void write_dump(const std::filesystem::path& path, const char* magic, std::uint64_t gh,
                       std::uint64_t wh, const Mat& m, const std::vector<std::int64_t>* indices) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f.write(magic, 8);
  put<std::uint64_t>(f, gh);
  put<std::uint64_t>(f, wh);
  put<std::uint64_t>(f, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(m.cols()));
  if (indices) {
    for (std::int64_t k : *indices) put<std::int64_t>(f, k);
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put<double>(f, m(i, j).real());
      put<double>(f, m(i, j).imag());
    }
  }
}

}  // namespace detail

inline void write_eigenvectors(const std::filesystem::path& path, const WeightedSpectrum& s,
                               std::uint64_t geometry_hash, std::uint64_t weight_hash) {
  std::vector<std::int64_t> idx(s.indices().begin(), s.indices().end());
  detail::write_dump(path, kEigenvectorMagic, geometry_hash, weight_hash, s.eigenvectors(), &idx);
}

inline void write_matrix(const std::filesystem::path& path, const Mat& m,
                         std::uint64_t geometry_hash, std::uint64_t weight_hash) {
  detail::write_dump(path, kMatrixMagic, geometry_hash, weight_hash, m, nullptr);
}

inline BinaryDump read_dump(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  BinaryDump d;
  char magic[8];
  f.read(magic, 8);
  d.magic.assign(magic, 8);
  if (d.magic != kEigenvectorMagic && d.magic != kMatrixMagic) {
    throw ShapeError("unknown binary dump magic");
  }
  d.geometry_hash = detail::get<std::uint64_t>(f);
  d.weight_hash = detail::get<std::uint64_t>(f);
  const auto rows = static_cast<Eigen::Index>(detail::get<std::uint64_t>(f));
  const auto cols = static_cast<Eigen::Index>(detail::get<std::uint64_t>(f));
  if (d.magic == kEigenvectorMagic) {
    for (Eigen::Index j = 0; j < cols; ++j) d.indices.push_back(detail::get<std::int64_t>(f));
  }
  d.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = detail::get<double>(f);
      const double im = detail::get<double>(f);
      d.values(i, j) = cplx(re, im);
    }
  }
  return d;
}

}  // namespace wdirac
