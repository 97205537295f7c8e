#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sqz/config.hpp"
#include "sqz/noise_spectra.hpp"

namespace sqz {

/// Library version recorded in every manifest.
const char* version();

/// Quotes a field per RFC 4180 when it contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

/// A table of already-formatted cells. Rows end in CRLF as RFC 4180 asks.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& data() const { return rows_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Fixed-point text with `digits` decimals; never prints "-0.00".
std::string fixed(double value, int digits);
/// dB values in tables are rounded to 0.01 dB.
inline std::string db(double value) { return fixed(value, 2); }
/// Shortest text that reads back to the same double.
std::string exact(double value);

void write_text(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const json& doc);
json read_json(const std::filesystem::path& path);

/// Complex matrix as rows of [re, im] pairs.
json matrix_json(const CMatrix& m);
json spectrum_json(const NoiseSpectrum& s);

/// Plain PGM (P2) with 16-bit gray levels; `grid` is clamped to [0, 1].
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& grid);
void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& grid);

}  // namespace sqz
