#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pfoc/geometry.hpp"

namespace pfoc {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Spatial field as CSV with header `x,value` (1D) or `x,y,value` (2D).
std::string field_csv(std::span<const double> field, const GridSpec& grid);

/// Time series of fields as CSV with header `t,n0,n1,...`, one row per level.
std::string series_csv(const Series& series, const TimeGrid& tg);

/// Plain table with a header row.
std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/**
 * Output directory `<base>/<name>-<UTC timestamp>[-n]`, created on
 * construction and written by a single owner.
 */
class RunDirectory {
 public:
  RunDirectory(const std::filesystem::path& base, const std::string& name);

  const std::filesystem::path& path() const { return path_; }
  const std::string& timestamp() const { return timestamp_; }

  void write(const std::string& file, const std::string& content) const;

  /// One file per level: `<prefix>_0000.csv`, `<prefix>_0001.csv`, ...
  void write_levels(const std::string& prefix, const Series& series, const GridSpec& grid) const;

 private:
  std::filesystem::path path_;
  std::string timestamp_;
};

}  // namespace pfoc
