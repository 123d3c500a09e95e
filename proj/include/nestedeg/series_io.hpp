#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nestedeg {

// Observations read from CSV. `dim` is 0 for a plain series (`t,y`) and d for
// covariate files (`x1..xd,y`, optional leading `t`). Covariates are row-major.
struct SeriesData {
  std::size_t dim = 0;
  std::vector<double> covariates;
  std::vector<double> outcomes;
  std::optional<nlohmann::json> metadata;  // sidecar written by `simulate`

  std::size_t size() const { return outcomes.size(); }
  std::string digest() const;
};

// Formats a double with 17 significant digits (round-trips exactly).
std::string format_double(double v);
double parse_double(const std::string& field, std::size_t row, const std::string& column);

SeriesData parse_series_csv(const std::string& text);
SeriesData read_series_csv(const std::filesystem::path& path);
void write_series_csv(const std::filesystem::path& path, const std::vector<double>& values);

// `series.csv` -> `series.meta.json`
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

// 64-bit FNV-1a over the bit patterns of the values, as 16 hex digits.
std::string fnv1a_digest(const std::vector<double>& covariates, const std::vector<double>& outcomes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace nestedeg
