#include "sqz/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sqz/errors.hpp"

namespace sqz {

const char* version() { return SQZ_VERSION; }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw DimensionError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header_.size()));
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cells[i]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string fixed(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  std::string s = buf;
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string exact(double value) {
  if (std::isnan(value)) return "nan";
  char buf[400];
  // Plain decimals read better in tables; both forms round-trip exactly.
  const double mag = std::abs(value);
  const auto fmt = (mag == 0.0 || (mag >= 1e-4 && mag < 1e15)) ? std::chars_format::fixed : std::chars_format::general;
  auto res = std::to_chars(buf, buf + sizeof buf, value, fmt);
  return std::string(buf, res.ptr);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

json spectrum_json(const NoiseSpectrum& s) {
  json points = json::array();
  for (const auto& p : s.points) {
    points.push_back({{"frequency_Hz", p.omega / kTwoPi},
                      {"covariance_XP", {{p.covariance(0, 0), p.covariance(0, 1)},
                                         {p.covariance(1, 0), p.covariance(1, 1)}}},
                      {"s_min_dB", p.s_min_db},
                      {"s_max_dB", p.s_max_db},
                      {"theta_sq_rad", p.theta},
                      {"degenerate", p.degenerate}});
  }
  return points;
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& grid) {
  std::ostringstream os;
  os << "P2\n" << grid.cols() << " " << grid.rows() << "\n65535\n";
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      const double v = std::clamp(grid(r, c), 0.0, 1.0);
      os << (c ? " " : "") << static_cast<int>(std::lround(v * 65535.0));
    }
    os << "\n";
  }
  write_text(path, os.str());
}

void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& grid) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) os << (c ? "," : "") << exact(grid(r, c));
    os << "\r\n";
  }
  write_text(path, os.str());
}

}  // namespace sqz
