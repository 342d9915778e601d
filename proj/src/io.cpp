#include "qnopt/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qnopt/errors.hpp"

namespace qnopt {

using Json = nlohmann::ordered_json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace {

std::string csv_cell(const std::string &s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_for(const ParamValue &v) {
  if (const auto *d = std::get_if<double>(&v)) return format_number(*d);
  return csv_cell(std::get<std::string>(v));
}

bool parse_double(const std::string &s, double &out) {
  if (s == "nan") {
    out = std::nan("");
    return true;
  }
  if (s == "inf" || s == "-inf") {
    out = s[0] == '-' ? -HUGE_VAL : HUGE_VAL;
    return true;
  }
  const char *first = s.data();
  const char *last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

} // namespace

DatasetCsvWriter::DatasetCsvWriter(const std::filesystem::path &path,
                                   const Json &metadata, const SearchSpace &space,
                                   const std::vector<std::string> &objective_names)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path),
      params_(space.size()), objectives_(objective_names.size()) {
  if (!out_) throw Error("cannot write '" + path.string() + "'");
  out_ << "# " << metadata.dump() << '\n';
  out_ << "cycle";
  for (const auto &p : space.params()) out_ << ',' << csv_cell(p.name());
  for (const auto &n : objective_names) out_ << ',' << csv_cell(n);
  out_ << ",aggregate\n";
  out_.flush();
}

void DatasetCsvWriter::sync(const std::vector<EvalRecord> &records) {
  for (; written_ < records.size(); ++written_) {
    const auto &r = records[written_];
    if (r.config.values.size() != params_ || r.mean_utilities.size() != objectives_) {
      throw DimensionError("record does not match the dataset columns");
    }
    out_ << r.cycle;
    for (const auto &v : r.config.values) out_ << ',' << cell_for(v);
    for (double u : r.mean_utilities) out_ << ',' << format_number(u);
    out_ << ',' << format_number(r.aggregate()) << '\n';
  }
  out_.flush();
  if (!out_) throw Error("write to '" + path_.string() + "' failed");
}

DatasetTable read_csv_table(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read dataset '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  DatasetTable table;
  std::size_t pos = 0;
  std::size_t line = 1;
  if (text.rfind("# ", 0) == 0) {
    const auto end = text.find('\n');
    try {
      table.metadata = Json::parse(text.substr(2, end == std::string::npos
                                                      ? std::string::npos
                                                      : end - 2));
    } catch (const Json::parse_error &) {
      throw ParseError("metadata comment is not valid JSON", 1);
    }
    pos = end == std::string::npos ? text.size() : end + 1;
    line = 2;
  }

  // Splits one record starting at pos; quoted cells may span lines.
  auto read_record = [&](std::vector<std::string> &cells) {
    cells.clear();
    std::string cell;
    bool quoted = false;
    bool was_quoted = false;
    const std::size_t start_line = line;
    while (pos < text.size()) {
      const char c = text[pos++];
      if (quoted) {
        if (c == '"') {
          if (pos < text.size() && text[pos] == '"') {
            cell += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line;
          cell += c;
        }
        continue;
      }
      if (c == '"') {
        if (!cell.empty() || was_quoted) {
          throw ParseError("stray quote in cell", start_line);
        }
        quoted = was_quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
        was_quoted = false;
      } else if (c == '\n') {
        ++line;
        break;
      } else if (c == '\r') {
        // tolerated before \n
      } else {
        if (was_quoted) throw ParseError("text after closing quote", start_line);
        cell += c;
      }
    }
    if (quoted) throw ParseError("unterminated quoted cell", start_line);
    cells.push_back(std::move(cell));
    return start_line;
  };

  std::vector<std::string> cells;
  if (pos >= text.size()) throw ParseError("dataset has no header row", line);
  read_record(cells);
  table.columns = cells;
  while (pos < text.size()) {
    const std::size_t at = read_record(cells);
    if (cells.size() == 1 && cells[0].empty()) continue; // blank line
    if (cells.size() != table.columns.size()) {
      throw ParseError("row " + std::to_string(table.rows.size() + 1) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(table.columns.size()),
                       at);
    }
    table.rows.push_back(cells);
    table.lines.push_back(at);
  }
  return table;
}

LoadedDataset interpret_dataset(const DatasetTable &table, const SearchSpace &space) {
  const auto &cols = table.columns;
  const std::size_t p = space.size();
  if (cols.size() < p + 3 || cols.front() != "cycle" || cols.back() != "aggregate") {
    throw ParseError("header must be cycle, parameters, objectives, aggregate",
                     table.metadata.is_null() ? 1 : 2);
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (cols[1 + i] != space.params()[i].name()) {
      throw ParseError("column " + std::to_string(i + 2) + " is '" + cols[1 + i] +
                           "', expected parameter '" + space.params()[i].name() + "'",
                       table.metadata.is_null() ? 1 : 2);
    }
  }
  const std::size_t m = cols.size() - p - 2;
  LoadedDataset out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto &row = table.rows[r];
    const std::size_t line = table.lines[r];
    auto bad = [&](const std::string &what) -> ParseError {
      return ParseError("row " + std::to_string(r + 1) + ": " + what, line);
    };
    std::size_t cycle = 0;
    {
      const auto &c = row[0];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), cycle);
      if (ec != std::errc() || ptr != c.data() + c.size()) {
        throw bad("cycle '" + c + "' is not a non-negative integer");
      }
    }
    ConfigPoint config;
    for (std::size_t i = 0; i < p; ++i) {
      const auto &spec = space.params()[i];
      const auto &cell = row[1 + i];
      if (spec.is_numeric()) {
        double v = 0.0;
        if (!parse_double(cell, v)) {
          throw bad("value '" + cell + "' of '" + spec.name() + "' is not a number");
        }
        config.values.emplace_back(v);
      } else {
        config.values.emplace_back(cell);
      }
    }
    if (auto v = validate(space, config); !v.empty()) throw bad(v.front().message);
    std::vector<double> obj(m);
    for (std::size_t k = 0; k < m; ++k) {
      if (!parse_double(row[1 + p + k], obj[k])) {
        throw bad("objective '" + cols[1 + p + k] + "' value '" + row[1 + p + k] +
                  "' is not a number");
      }
    }
    double agg = 0.0;
    if (!parse_double(row.back(), agg)) throw bad("aggregate is not a number");
    out.cycles.push_back(cycle);
    out.configs.push_back(std::move(config));
    out.objectives.push_back(std::move(obj));
  }
  return out;
}

Json config_to_json(const SearchSpace &space, const ConfigPoint &config) {
  Json doc = Json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto &v = config.values.at(i);
    if (const auto *d = std::get_if<double>(&v)) {
      doc[space.params()[i].name()] = *d;
    } else {
      doc[space.params()[i].name()] = std::get<std::string>(v);
    }
  }
  return doc;
}

ConfigPoint config_from_json(const SearchSpace &space, const Json &doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  ConfigPoint c;
  for (const auto &spec : space.params()) {
    auto it = doc.find(spec.name());
    if (it == doc.end()) throw ConfigError("configuration lacks '" + spec.name() + "'");
    if (spec.is_numeric()) {
      if (!it->is_number()) throw ConfigError("'" + spec.name() + "' must be a number");
      c.values.emplace_back(it->get<double>());
    } else {
      if (!it->is_string()) throw ConfigError("'" + spec.name() + "' must be a string");
      c.values.emplace_back(it->get<std::string>());
    }
  }
  if (doc.size() != space.size()) {
    throw ConfigError("configuration has parameters not in the search space");
  }
  if (auto v = validate(space, c); !v.empty()) throw ConfigError(v.front().message);
  return c;
}

Json records_to_json(const SearchSpace &space, const std::vector<std::string> &names,
                     const std::vector<EvalRecord> &records) {
  Json arr = Json::array();
  for (const auto &r : records) {
    Json e = Json::object();
    e["cycle"] = r.cycle;
    e["config"] = config_to_json(space, r.config);
    Json u = Json::object();
    for (std::size_t k = 0; k < names.size(); ++k) u[names[k]] = r.mean_utilities.at(k);
    e["mean_utilities"] = std::move(u);
    e["aggregate"] = r.aggregate();
    e["sample_count"] = r.sample_count;
    arr.push_back(std::move(e));
  }
  return arr;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

void write_json(const std::filesystem::path &path, const Json &doc) {
  write_text(path, doc.dump(2) + "\n");
}

Json read_json(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error &e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

} // namespace qnopt
