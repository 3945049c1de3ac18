#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "duallearn/dataset.hpp"

namespace duallearn::data {

// Column selection for load_csv. An empty `features` list selects every
// column other than the label and group columns, in file order.
struct CsvSchema {
  std::string label;
  std::optional<std::string> group;
  std::vector<std::string> features;
};

struct LoadedData {
  Dataset dataset;
  // One entry per sample when the schema names a group column, else empty.
  std::vector<std::string> groups;
  std::vector<std::string> feature_names;
};

// Comma separated, dot decimal, mandatory header. Fields may be double-quoted.
// Throws ParseError (with the 1-based file line) on malformed rows or
// non-numeric cells and InputError naming any missing column.
LoadedData load_csv(std::istream& in, const CsvSchema& schema, const std::string& name = "csv");
LoadedData load_csv(const std::filesystem::path& path, const CsvSchema& schema);

// Writes the features, then the group column when `groups` is non-empty, then
// the label. Numbers use the shortest representation that reads back exactly.
void save_csv(std::ostream& out, const Dataset& dataset, std::span<const std::string> feature_names,
              const std::string& label_name, std::span<const std::string> groups = {},
              const std::string& group_name = "group");
void save_csv(const std::filesystem::path& path, const Dataset& dataset, std::span<const std::string> feature_names,
              const std::string& label_name, std::span<const std::string> groups = {},
              const std::string& group_name = "group");

// Partition into per-group views sharing the parent's storage, each keeping
// the parent's relative order.
std::map<std::string, Dataset> group_split(const Dataset& dataset, std::span<const std::string> groups);

// Two isotropic Gaussian classes. Sample i belongs to class 1 when i is even
// and class 0 when odd, giving ceil(N/2) and floor(N/2) samples.
Dataset synth_two_gaussians(std::size_t dim, std::span<const std::vector<double>> means, double sigma, std::size_t n,
                            std::uint64_t seed);

}  // namespace duallearn::data
