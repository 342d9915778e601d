#include "qnopt/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qnopt/errors.hpp"

namespace qnopt {

namespace {

using Json = nlohmann::ordered_json;

bool is_bare_key_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '-';
}

void append_utf8(std::string &out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
public:
  explicit Parser(std::string_view text) : s_(text) {}

  Json parse() {
    Json root = Json::object();
    Json *table = &root;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        table = header(root);
      } else {
        key_value(*table);
      }
      end_of_line();
    }
    return root;
  }

private:
  [[noreturn]] void fail(const std::string &what) const {
    throw ParseError(what, line_);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char take() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }

  void skip_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) take();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') take();
    }
  }
  // Whitespace, newlines and comments (inside arrays).
  void skip_all() {
    while (!at_end()) {
      skip_ws();
      skip_comment();
      if (peek() == '\n') {
        take();
      } else if (peek() == '\r' && peek(1) == '\n') {
        take();
        take();
      } else {
        break;
      }
    }
  }
  void skip_blank_lines() { skip_all(); }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (at_end()) return;
    if (peek() == '\r') take();
    if (peek() != '\n') fail("unexpected text after value");
    take();
  }

  std::string key_part() {
    skip_ws();
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!at_end() && is_bare_key_char(peek())) k += take();
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{key_part()};
    skip_ws();
    while (peek() == '.') {
      take();
      parts.push_back(key_part());
      skip_ws();
    }
    return parts;
  }

  // Walks (creating) intermediate tables; the last element of an array of
  // tables is the one addressed.
  Json *descend(Json &root, const std::vector<std::string> &path,
                std::size_t count) {
    Json *cur = &root;
    for (std::size_t i = 0; i < count; ++i) {
      Json &next = (*cur)[path[i]];
      if (next.is_null()) next = Json::object();
      if (next.is_array()) {
        if (next.empty() || !next.back().is_object()) {
          fail("key '" + path[i] + "' is not a table");
        }
        cur = &next.back();
      } else if (next.is_object()) {
        cur = &next;
      } else {
        fail("key '" + path[i] + "' is not a table");
      }
    }
    return cur;
  }

  Json *header(Json &root) {
    take();
    const bool array = peek() == '[';
    if (array) take();
    auto path = dotted_key();
    skip_ws();
    expect(']');
    if (array) expect(']');
    Json *parent = descend(root, path, path.size() - 1);
    const std::string &last = path.back();
    std::string full;
    for (const auto &p : path) full += (full.empty() ? "" : ".") + p;
    if (array) {
      Json &arr = (*parent)[last];
      if (arr.is_null()) arr = Json::array();
      if (!arr.is_array() || static_tables_.count(full)) {
        fail("'" + full + "' is not an array of tables");
      }
      arr.push_back(Json::object());
      return &arr.back();
    }
    Json &t = (*parent)[last];
    if (t.is_null()) {
      t = Json::object();
    } else if (!t.is_object()) {
      fail("'" + full + "' is already defined as a value");
    }
    if (!static_tables_.insert(full).second) {
      fail("table '" + full + "' defined twice");
    }
    return &t;
  }

  void key_value(Json &table) {
    auto path = dotted_key();
    skip_ws();
    expect('=');
    skip_ws();
    Json *target = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      Json &next = (*target)[path[i]];
      if (next.is_null()) next = Json::object();
      if (!next.is_object()) fail("key '" + path[i] + "' is not a table");
      target = &next;
    }
    if (target->contains(path.back())) {
      fail("duplicate key '" + path.back() + "'");
    }
    (*target)[path.back()] = value();
  }

  Json value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (c == 't' || c == 'f') {
      std::string word;
      while (!at_end() && std::isalpha(static_cast<unsigned char>(peek()))) {
        word += take();
      }
      if (word == "true") return true;
      if (word == "false") return false;
      fail("invalid value '" + word + "'");
    }
    return number();
  }

  Json number() {
    std::string tok;
    while (!at_end()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
          c == '.' || c == '_') {
        tok += take();
      } else {
        break;
      }
    }
    if (tok.empty()) fail("expected a value");
    std::string body = tok;
    bool negative = false;
    if (body[0] == '+' || body[0] == '-') {
      negative = body[0] == '-';
      body.erase(0, 1);
    }
    if (body == "inf") {
      return negative ? -std::numeric_limits<double>::infinity()
                      : std::numeric_limits<double>::infinity();
    }
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::string clean;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '_') {
        if (i == 0 || i + 1 == body.size() || !std::isdigit(static_cast<unsigned char>(body[i - 1])) ||
            !std::isdigit(static_cast<unsigned char>(body[i + 1]))) {
          fail("invalid number '" + tok + "'");
        }
        continue;
      }
      clean += body[i];
    }
    if (clean.empty()) fail("invalid number '" + tok + "'");
    const bool is_float = clean.find_first_of(".eE") != std::string::npos &&
                          clean.rfind("0x", 0) != 0;
    if (!is_float) {
      int base = 10;
      std::string digits = clean;
      if (clean.size() > 2 && clean[0] == '0' &&
          (clean[1] == 'x' || clean[1] == 'o' || clean[1] == 'b')) {
        base = clean[1] == 'x' ? 16 : clean[1] == 'o' ? 8 : 2;
        digits = clean.substr(2);
      } else if (clean.size() > 1 && clean[0] == '0') {
        fail("leading zeros are not allowed in '" + tok + "'");
      }
      long long v = 0;
      const auto *first = digits.data();
      const auto *last = digits.data() + digits.size();
      auto [ptr, ec] = std::from_chars(first, last, v, base);
      if (ec == std::errc::result_out_of_range) fail("integer out of range: " + tok);
      if (ec != std::errc() || ptr != last) fail("invalid number '" + tok + "'");
      return negative ? -v : v;
    }
    double v = 0.0;
    const auto *first = clean.data();
    const auto *last = clean.data() + clean.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || clean.front() == '.' ||
        clean.back() == '.') {
      fail("invalid number '" + tok + "'");
    }
    return negative ? -v : v;
  }

  std::string basic_string() {
    take();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      char c = take();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (at_end()) fail("unterminated string");
      c = take();
      switch (c) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'u':
      case 'U': {
        const std::size_t n = c == 'u' ? 4 : 8;
        if (pos_ + n > s_.size()) fail("truncated unicode escape");
        unsigned long cp = 0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + n, cp, 16);
        if (ec != std::errc() || ptr != s_.data() + pos_ + n) {
          fail("invalid unicode escape");
        }
        pos_ += n;
        append_utf8(out, cp);
        break;
      }
      default:
        fail(std::string("invalid escape '\\") + c + "'");
      }
    }
    return out;
  }

  std::string literal_string() {
    take();
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  Json array() {
    take();
    Json arr = Json::array();
    skip_all();
    while (peek() != ']') {
      if (at_end()) fail("unterminated array");
      arr.push_back(value());
      skip_all();
      if (peek() == ',') {
        take();
        skip_all();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    take();
    return arr;
  }

  Json inline_table() {
    take();
    Json t = Json::object();
    skip_ws();
    if (peek() == '}') {
      take();
      return t;
    }
    while (true) {
      key_value(t);
      skip_ws();
      if (peek() == ',') {
        take();
        skip_ws();
        continue;
      }
      if (peek() == '}') {
        take();
        return t;
      }
      fail("expected ',' or '}' in inline table");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::set<std::string> static_tables_;
};

} // namespace

nlohmann::ordered_json parse_toml(std::string_view text) {
  return Parser(text).parse();
}

nlohmann::ordered_json load_toml(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

} // namespace qnopt
