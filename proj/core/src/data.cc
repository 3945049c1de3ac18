#include "duallearn/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "duallearn/error.hpp"

namespace duallearn::data {
namespace {

std::vector<std::string> split_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError("data", "line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (first == last || ec != std::errc() || ptr != last) {
    throw ParseError("data", "line " + std::to_string(line_no) + ": column '" + column + "': not a number: '" +
                                 cell + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& column) {
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw InputError("data", "missing column '" + column + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

LoadedData load_csv(std::istream& in, const CsvSchema& schema, const std::string& name) {
  std::string line;
  std::size_t line_no = 0;
  const auto next_line = [&]() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw InputError("data", "empty file");
  const std::vector<std::string> header = split_row(line, line_no);

  const std::size_t label_col = find_column(header, schema.label);
  std::optional<std::size_t> group_col;
  if (schema.group) group_col = find_column(header, *schema.group);
  std::vector<std::size_t> feature_cols;
  LoadedData out;
  if (schema.features.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == label_col || (group_col && c == *group_col)) continue;
      feature_cols.push_back(c);
      out.feature_names.push_back(header[c]);
    }
  } else {
    for (const auto& f : schema.features) {
      feature_cols.push_back(find_column(header, f));
      out.feature_names.push_back(f);
    }
  }

  std::vector<Sample> samples;
  while (next_line()) {
    const std::vector<std::string> row = split_row(line, line_no);
    if (row.size() != header.size()) {
      throw ParseError("data", "line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                   " fields, got " + std::to_string(row.size()));
    }
    Sample s;
    s.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) s.features.push_back(parse_number(row[c], line_no, header[c]));
    s.label = parse_number(row[label_col], line_no, header[label_col]);
    if (group_col) out.groups.push_back(row[*group_col]);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw InputError("data", "no data rows");
  out.dataset = Dataset(name, std::move(samples));
  return out;
}

LoadedData load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("data", "cannot open '" + path.string() + "'");
  return load_csv(in, schema, path.stem().string());
}

void save_csv(std::ostream& out, const Dataset& dataset, std::span<const std::string> feature_names,
              const std::string& label_name, std::span<const std::string> groups, const std::string& group_name) {
  if (feature_names.size() != dataset.feature_dim()) {
    throw InputError("data", "feature name count does not match the dataset dimension");
  }
  if (!groups.empty() && groups.size() != dataset.size()) {
    throw InputError("data", "group labels do not align with samples");
  }
  for (const auto& f : feature_names) out << quote_if_needed(f) << ',';
  if (!groups.empty()) out << quote_if_needed(group_name) << ',';
  out << quote_if_needed(label_name) << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& s = dataset[i];
    for (double v : s.features) out << format_number(v) << ',';
    if (!groups.empty()) out << quote_if_needed(groups[i]) << ',';
    out << format_number(s.label) << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& dataset, std::span<const std::string> feature_names,
              const std::string& label_name, std::span<const std::string> groups, const std::string& group_name) {
  std::ofstream out(path);
  if (!out) throw InputError("data", "cannot write '" + path.string() + "'");
  save_csv(out, dataset, feature_names, label_name, groups, group_name);
}

std::map<std::string, Dataset> group_split(const Dataset& dataset, std::span<const std::string> groups) {
  if (groups.size() != dataset.size()) throw InputError("data", "group labels do not align with samples");
  std::map<std::string, std::vector<std::size_t>> positions;
  for (std::size_t i = 0; i < groups.size(); ++i) positions[groups[i]].push_back(i);
  std::map<std::string, Dataset> parts;
  for (const auto& [g, pos] : positions) {
    parts.emplace(g, dataset.subset(dataset.name() + "/" + g, pos));
  }
  return parts;
}

Dataset synth_two_gaussians(std::size_t dim, std::span<const std::vector<double>> means, double sigma, std::size_t n,
                            std::uint64_t seed) {
  if (n < 2) throw InputError("data", "two-Gaussian draw needs N >= 2");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("data", "sigma must be finite and >= 0");
  if (means.size() != 2 || means[0].size() != dim || means[1].size() != dim || dim == 0) {
    throw InputError("data", "two means of dimension " + std::to_string(dim) + " required");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % 2 == 0 ? 1 : 0;
    samples[i].label = static_cast<double>(cls);
    samples[i].features.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) samples[i].features[k] = means[cls][k] + sigma * noise(rng);
  }
  return Dataset("two-gaussians", std::move(samples));
}

}  // namespace duallearn::data
