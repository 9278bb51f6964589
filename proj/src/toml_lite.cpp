#include "moda/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <string>
#include <vector>

#include "moda/errors.hpp"

namespace moda {

namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, int line) : text_(text), line_(line) {}

  nlohmann::json parse_document_value() {
    auto value = parse_value();
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters after value");
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("TOML line " + std::to_string(line_) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  nlohmann::json parse_value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char ch = text_[pos_];
    if (ch == '"') return parse_basic_string();
    if (ch == '\'') return parse_literal_string();
    if (ch == '[') return parse_array();
    if (ch == '{') fail("inline tables are not supported");
    return parse_scalar();
  }

  nlohmann::json parse_basic_string() {
    ++pos_;
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char ch = text_[pos_++];
      if (ch == '\\') {
        if (pos_ >= text_.size()) fail("unterminated escape");
        const char esc = text_[pos_++];
        switch (esc) {
          case 'n': ch = '\n'; break;
          case 't': ch = '\t'; break;
          case 'r': ch = '\r'; break;
          case '"': ch = '"'; break;
          case '\\': ch = '\\'; break;
          default: fail(std::string("unsupported escape \\") + esc);
        }
      }
      out.push_back(ch);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  nlohmann::json parse_literal_string() {
    ++pos_;
    const auto end = text_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated literal string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  nlohmann::json parse_array() {
    ++pos_;
    auto array = nlohmann::json::array();
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated array");
      if (text_[pos_] == ']') {
        ++pos_;
        return array;
      }
      array.push_back(parse_value());
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
      } else if (pos_ < text_.size() && text_[pos_] != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  nlohmann::json parse_scalar() {
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    std::string token(text_.substr(start, pos_ - start));
    if (token == "true") return true;
    if (token == "false") return false;
    if (token == "inf" || token == "+inf") return std::numeric_limits<double>::infinity();
    if (token == "-inf") return -std::numeric_limits<double>::infinity();
    std::string digits;
    for (char ch : token) {
      if (ch != '_') digits.push_back(ch);
    }
    if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
    if (digits.empty()) fail("empty value");
    const bool is_float = digits.find_first_of(".eE") != std::string::npos;
    if (is_float) {
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail("bad float '" + token + "'");
      return value;
    }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) fail("bad value '" + token + "'");
    return value;
  }

  std::string_view text_;
  int line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_basic = false;
  bool in_literal = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (ch == '\\' && in_basic) {
      ++i;
    } else if (ch == '"' && !in_literal) {
      in_basic = !in_basic;
    } else if (ch == '\'' && !in_basic) {
      in_literal = !in_literal;
    } else if (ch == '#' && !in_basic && !in_literal) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool in_basic = false;
  bool in_literal = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char ch = s[i];
    if (ch == '\\' && in_basic) {
      ++i;
    } else if (ch == '"' && !in_literal) {
      in_basic = !in_basic;
    } else if (ch == '\'' && !in_basic) {
      in_literal = !in_literal;
    } else if (!in_basic && !in_literal) {
      depth += ch == '[' ? 1 : ch == ']' ? -1 : 0;
    }
  }
  return depth;
}

std::string parse_key(const std::string& raw, int line) {
  const std::string key = trim(raw);
  if (key.size() >= 2 && (key.front() == '"' || key.front() == '\'') && key.back() == key.front()) {
    return key.substr(1, key.size() - 2);
  }
  if (key.empty()) throw ConfigError("TOML line " + std::to_string(line) + ": empty key");
  for (char ch : key) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') {
      throw ConfigError("TOML line " + std::to_string(line) + ": unsupported key '" + key + "'");
    }
  }
  return key;
}

}  // namespace

nlohmann::json parse_toml(std::string_view text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;

  std::vector<std::string> lines;
  {
    std::string current;
    for (char ch : text) {
      if (ch == '\n') {
        lines.push_back(current);
        current.clear();
      } else {
        current.push_back(ch);
      }
    }
    lines.push_back(current);
  }

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    std::string line = trim(strip_comment(lines[i]));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.size() < 3 || line.back() != ']' || line[1] == '[') {
        throw ConfigError("TOML line " + std::to_string(line_no) + ": bad table header");
      }
      table = &root;
      std::string name = line.substr(1, line.size() - 2);
      std::size_t start = 0;
      while (true) {
        const auto dot = name.find('.', start);
        const auto part = parse_key(name.substr(start, dot - start), line_no);
        auto& next = (*table)[part];
        if (next.is_null()) next = nlohmann::json::object();
        if (!next.is_object()) {
          throw ConfigError("TOML line " + std::to_string(line_no) + ": '" + part + "' is not a table");
        }
        table = &next;
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = parse_key(line.substr(0, eq), line_no);
    std::string value = trim(line.substr(eq + 1));
    while (bracket_balance(value) > 0 && i + 1 < lines.size()) {
      value += " " + trim(strip_comment(lines[++i]));
    }
    if (table->contains(key)) {
      throw ConfigError("TOML line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    (*table)[key] = ValueParser(value, line_no).parse_document_value();
  }
  return root;
}

}  // namespace moda
