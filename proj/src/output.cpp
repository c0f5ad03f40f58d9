#include "pfoc/output.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "pfoc/error.hpp"

namespace pfoc {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string field_csv(std::span<const double> field, const GridSpec& grid) {
  require_on_grid(field, grid, "field_csv");
  std::string out = grid.dimension() == 2 ? "x,y,value\n" : "x,value\n";
  const int nx = grid.nodes(0);
  for (std::size_t n = 0; n < field.size(); ++n) {
    const int i = static_cast<int>(n) % nx;
    out += format_double(grid.coordinate(0, i));
    if (grid.dimension() == 2) out += "," + format_double(grid.coordinate(1, static_cast<int>(n) / nx));
    out += "," + format_double(field[n]) + "\n";
  }
  return out;
}

std::string series_csv(const Series& series, const TimeGrid& tg) {
  if (series.size() != tg.levels()) throw StructuralError("series_csv: level count mismatch");
  std::string out = "t";
  const std::size_t nn = series.empty() ? 0 : series.front().size();
  for (std::size_t n = 0; n < nn; ++n) out += ",n" + std::to_string(n);
  out += "\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out += format_double(tg.time(static_cast<int>(k)));
    for (double v : series[k]) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

RunDirectory::RunDirectory(const std::filesystem::path& base, const std::string& name) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);
  timestamp_ = stamp;
  std::filesystem::create_directories(base);
  for (int n = 0;; ++n) {
    std::filesystem::path p = base / (name + "-" + timestamp_ + (n ? "-" + std::to_string(n) : ""));
    if (std::filesystem::create_directory(p)) {
      path_ = p;
      break;
    }
  }
}

void RunDirectory::write(const std::string& file, const std::string& content) const {
  std::ofstream out(path_ / file, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + (path_ / file).string());
}

void RunDirectory::write_levels(const std::string& prefix, const Series& series, const GridSpec& grid) const {
  for (std::size_t k = 0; k < series.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04zu.csv", prefix.c_str(), k);
    write(name, field_csv(series[k], grid));
  }
}

}  // namespace pfoc
