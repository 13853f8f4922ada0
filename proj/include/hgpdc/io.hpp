#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <unistd.h>

#include "hgpdc/errors.hpp"
#include "hgpdc/grid.hpp"

namespace hgpdc {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form; "nan" / "inf" for non-finite values.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

/// JSON number, or null for NaN / inf (JSON has no spelling for them).
inline nlohmann::json json_number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &size, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * size);
  for (unsigned int i = 0; i < size; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

inline void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Output directory assembled under a hidden staging name and renamed into
/// place by commit(). Destroying an uncommitted stage removes it, so failed
/// runs leave nothing behind.
class StagedDirectory {
 public:
  explicit StagedDirectory(fs::path final_dir) : final_(std::move(final_dir)) {
    const fs::path parent = final_.has_parent_path() ? final_.parent_path() : fs::path(".");
    staging_ = parent / ("." + final_.filename().string() + ".partial-" + std::to_string(::getpid()));
    std::error_code ec;
    fs::remove_all(staging_, ec);
    fs::create_directories(staging_, ec);
    if (ec) throw IoError("cannot create '" + staging_.string() + "': " + ec.message());
  }
  StagedDirectory(const StagedDirectory&) = delete;
  StagedDirectory& operator=(const StagedDirectory&) = delete;
  ~StagedDirectory() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  const fs::path& path() const { return staging_; }
  const fs::path& final_path() const { return final_; }

  fs::path commit() {
    std::error_code ec;
    fs::remove_all(final_, ec);
    fs::rename(staging_, final_, ec);
    if (ec) throw IoError("cannot move output into '" + final_.string() + "': " + ec.message());
    committed_ = true;
    return final_;
  }

 private:
  fs::path final_;
  fs::path staging_;
  bool committed_ = false;
};

/// Sorted (path, size, sha256) records for every file below `root`,
/// excluding `skip` (the manifest itself).
inline nlohmann::json file_inventory(const fs::path& root, const std::string& skip = "manifest.json") {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  std::sort(files.begin(), files.end());
  nlohmann::json out = nlohmann::json::array();
  for (const auto& rel : files) {
    if (rel.generic_string() == skip) continue;
    const std::string data = read_file(root / rel);
    out.push_back({{"path", rel.generic_string()}, {"bytes", data.size()}, {"sha256", sha256_hex(data)}});
  }
  return out;
}

// --- CSV and binary encoders ----------------------------------------------

inline std::string spectra_csv(const FrequencyGrid& grid, const Eigen::VectorXd& signal,
                               const Eigen::VectorXd& idler) {
  std::string out = "omega,Omega,n_s,n_i\n";
  for (int j = 0; j < grid.size; ++j) {
    out += format_number(grid.frequency(j)) + ',' + format_number(grid.detuning(j)) + ',' +
           format_number(signal[j]) + ',' + format_number(idler[j]) + '\n';
  }
  return out;
}

/// Matrix with detuning headers: rows are signal detunings, columns idler.
inline std::string matrix_csv(const FrequencyGrid& grid, const Eigen::MatrixXd& values) {
  std::string out = "Omega_s\\Omega_i";
  for (int k = 0; k < grid.size; ++k) out += ',' + format_number(grid.detuning(k));
  out += '\n';
  for (int j = 0; j < grid.size; ++j) {
    out += format_number(grid.detuning(j));
    for (int k = 0; k < grid.size; ++k) out += ',' + format_number(values(j, k));
    out += '\n';
  }
  return out;
}

/// Row-major little-endian float64.
inline std::string matrix_bin(const Eigen::MatrixXd& values) {
  std::string out;
  out.resize(static_cast<std::size_t>(values.size()) * sizeof(double));
  char* dst = out.data();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::uint64_t bits;
      const double v = values(r, c);
      std::memcpy(&bits, &v, sizeof bits);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      std::memcpy(dst, &bits, sizeof bits);
      dst += sizeof bits;
    }
  }
  return out;
}

inline nlohmann::json matrix_bin_sidecar(const FrequencyGrid& grid, const std::string& data_file,
                                         const std::string& quantity, const std::string& units) {
  std::vector<double> axis(grid.size);
  for (int j = 0; j < grid.size; ++j) axis[j] = grid.detuning(j);
  return {{"data", data_file},
          {"quantity", quantity},
          {"units", units},
          {"dtype", "float64"},
          {"byte_order", "little"},
          {"order", "row-major"},
          {"shape", {grid.size, grid.size}},
          {"rows", "signal detuning Omega_s [rad/fs]"},
          {"cols", "idler detuning Omega_i [rad/fs]"},
          {"axis", axis}};
}

/// Parses a numeric CSV with one header row. Non-numeric cells become NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  double number(std::size_t row, const std::string& name) const {
    const int c = column(name);
    if (c < 0 || row >= rows.size() || static_cast<std::size_t>(c) >= rows[row].size())
      return std::nan("");
    const std::string& cell = rows[row][c];
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    return end != cell.c_str() ? v : std::nan("");
  }
};

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

}  // namespace hgpdc
