#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnopt/optimizer.hpp"
#include "qnopt/param_space.hpp"

namespace qnopt {

// Shortest text that parses back to the same double.
std::string format_number(double v);

// Dataset CSV layout:
//   # <metadata as one line of JSON>
//   cycle,<param names...>,<objective names...>,aggregate
//   one row per record
// Labels containing a comma, quote or newline are quoted RFC 4180 style.
class DatasetCsvWriter {
public:
  DatasetCsvWriter(const std::filesystem::path &path,
                   const nlohmann::ordered_json &metadata,
                   const SearchSpace &space,
                   const std::vector<std::string> &objective_names);

  // Writes records [written(), records.size()) and flushes.
  void sync(const std::vector<EvalRecord> &records);
  [[nodiscard]] std::size_t written() const noexcept { return written_; }

private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t params_;
  std::size_t objectives_;
  std::size_t written_ = 0;
};

struct DatasetTable {
  nlohmann::ordered_json metadata; // null when the comment line is absent
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows; // raw cells
  std::vector<std::size_t> lines;             // source line of each row
};

// Throws ParseError (with line and row number) on malformed input.
DatasetTable read_csv_table(const std::filesystem::path &path);

struct LoadedDataset {
  std::vector<std::size_t> cycles;
  std::vector<ConfigPoint> configs;
  std::vector<std::vector<double>> objectives;
};

// Interprets a table with the dataset layout above against `space`; the
// objective columns are those between the parameters and "aggregate".
LoadedDataset interpret_dataset(const DatasetTable &table, const SearchSpace &space);

nlohmann::ordered_json config_to_json(const SearchSpace &space,
                                      const ConfigPoint &config);
ConfigPoint config_from_json(const SearchSpace &space,
                             const nlohmann::ordered_json &doc);

nlohmann::ordered_json records_to_json(const SearchSpace &space,
                                       const std::vector<std::string> &names,
                                       const std::vector<EvalRecord> &records);

void write_text(const std::filesystem::path &path, const std::string &text);
void write_json(const std::filesystem::path &path, const nlohmann::ordered_json &doc);
nlohmann::ordered_json read_json(const std::filesystem::path &path);

} // namespace qnopt
