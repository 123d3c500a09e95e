#include "nestedeg/series_io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nestedeg/errors.hpp"

namespace nestedeg {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.pop_back();
    std::size_t b = 0;
    while (b < field.size() && field[b] == ' ') ++b;
    out.push_back(field.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw InputError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + field +
                     "' as a number");
  }
  return v;
}

std::string fnv1a_digest(const std::vector<double>& covariates, const std::vector<double>& outcomes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (double v : covariates) mix(v);
  for (double v : outcomes) mix(v);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string SeriesData::digest() const { return fnv1a_digest(covariates, outcomes); }

SeriesData parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV is empty");
  const auto header = split_fields(line);

  std::optional<std::size_t> y_col;
  std::vector<std::size_t> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (name == "y") {
      if (y_col) throw InputError("CSV header repeats the 'y' column");
      y_col = c;
    } else if (name.size() > 1 && name[0] == 'x' &&
               name.find_first_not_of("0123456789", 1) == std::string::npos) {
      if (name.substr(1) != std::to_string(x_cols.size() + 1)) {
        throw InputError("covariate columns must be x1..xd in order");
      }
      x_cols.push_back(c);
    } else if (name != "t") {
      throw InputError("unknown CSV column '" + name + "' (expected t, x1..xd, y)");
    }
  }
  if (!y_col) throw InputError("CSV header has no 'y' column");

  SeriesData data;
  data.dim = x_cols.size();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < x_cols.size(); ++j) {
      const double x = parse_double(fields[x_cols[j]], row, header[x_cols[j]]);
      if (!(x >= 0.0 && x <= 1.0)) {
        throw InputError("row " + std::to_string(row) + ": covariate " + header[x_cols[j]] + " outside [0,1]");
      }
      data.covariates.push_back(x);
    }
    const double y = parse_double(fields[*y_col], row, "y");
    if (!(y >= 0.0 && y <= 1.0)) throw InputError("row " + std::to_string(row) + ": y outside [0,1]");
    data.outcomes.push_back(y);
  }
  if (data.outcomes.empty()) throw InputError("CSV has no data rows");
  return data;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

SeriesData read_series_csv(const std::filesystem::path& path) {
  SeriesData data = parse_series_csv(read_text_file(path));
  const auto meta = sidecar_path(path);
  if (std::filesystem::exists(meta)) {
    try {
      data.metadata = nlohmann::json::parse(read_text_file(meta));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("cannot parse " + meta.string() + ": " + e.what());
    }
  }
  return data;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<double>& values) {
  std::string out = "t,y\n";
  for (std::size_t t = 0; t < values.size(); ++t) {
    out += std::to_string(t + 1);
    out += ',';
    out += format_double(values[t]);
    out += '\n';
  }
  write_text_file(path, out);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace nestedeg
