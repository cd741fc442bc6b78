#pragma once

// Brace-delimited key-value maps as they appear in "Action Input:" lines and
// in parameter examples. Parsing is lenient (single or double quotes, bare
// keys, trailing commas); rendering always emits the canonical double-quoted
// form `{"Key": "value", "Other": {"k": "v"}}`.

#include <cctype>
#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tooldrift {

using KvMap = nlohmann::ordered_json;

class KvParseError : public std::runtime_error {
 public:
  KvParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

namespace detail {

class KvReader {
 public:
  explicit KvReader(std::string_view text, std::size_t pos = 0) : text_(text), pos_(pos) {}

  std::size_t pos() const { return pos_; }

  KvMap read_map() {
    skip_ws();
    expect('{');
    KvMap out = KvMap::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      if (peek() == '}') {  // trailing comma
        ++pos_;
        return out;
      }
      std::string key = read_key();
      skip_ws();
      expect(':');
      skip_ws();
      out[key] = read_value();
      skip_ws();
      char c = peek();
      if (c == ',') {
        ++pos_;
        continue;
      }
      if (c == '}') {
        ++pos_;
        return out;
      }
      fail("expected ',' or '}'");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw KvParseError(msg, pos_); }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string read_key() {
    char c = peek();
    if (c == '"' || c == '\'') return read_string();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.') {
        ++pos_;
      } else {
        break;
      }
    }
    if (start == pos_) fail("expected key");
    return std::string(text_.substr(start, pos_ - start));
  }

  static void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string read_string() {
    const char quote = peek();
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string");
      char c = text_[pos_++];
      if (c == quote) return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated escape");
      char e = text_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u': {
          if (pos_ + 4 > text_.size()) fail("short unicode escape");
          unsigned cp = 0;
          auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + pos_ + 4, cp, 16);
          if (ec != std::errc() || p != text_.data() + pos_ + 4) fail("bad unicode escape");
          pos_ += 4;
          append_utf8(out, cp);
          break;
        }
        default: out += e; break;  // \" \' \\ \/ and anything else verbatim
      }
    }
  }

  KvMap read_value() {
    char c = peek();
    if (c == '"' || c == '\'') return read_string();
    if (c == '{') return read_map();
    if (c == '[') return read_list();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == ',' || ch == '}' || ch == ']' || std::isspace(static_cast<unsigned char>(ch))) break;
      ++pos_;
    }
    std::string_view word = text_.substr(start, pos_ - start);
    if (word.empty()) fail("expected value");
    if (word == "true") return true;
    if (word == "false") return false;
    if (word == "null") return nullptr;
    long long iv = 0;
    auto [ip, iec] = std::from_chars(word.data(), word.data() + word.size(), iv);
    if (iec == std::errc() && ip == word.data() + word.size()) return iv;
    double dv = 0;
    auto [dp, dec] = std::from_chars(word.data(), word.data() + word.size(), dv);
    if (dec == std::errc() && dp == word.data() + word.size()) return dv;
    // Bare words are kept as text: model output sometimes drops the quotes.
    return std::string(word);
  }

  KvMap read_list() {
    expect('[');
    KvMap out = KvMap::array();
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      skip_ws();
      out.push_back(read_value());
      skip_ws();
      char c = peek();
      if (c == ',') {
        ++pos_;
        skip_ws();
        if (peek() == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (c == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']'");
    }
  }

  std::string_view text_;
  std::size_t pos_;
};

inline void render_string(std::string& out, const std::string& s) {
  out += '"';
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void render_value(std::string& out, const KvMap& v) {
  if (v.is_string()) {
    render_string(out, v.get<std::string>());
  } else if (v.is_object()) {
    out += '{';
    bool first = true;
    for (const auto& [key, value] : v.items()) {
      if (!first) out += ", ";
      first = false;
      render_string(out, key);
      out += ": ";
      render_value(out, value);
    }
    out += '}';
  } else if (v.is_array()) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ", ";
      render_value(out, v[i]);
    }
    out += ']';
  } else {
    out += v.dump();
  }
}

}  // namespace detail

/// Parses the first brace-delimited map starting at or after `text[0]`
/// (leading whitespace allowed). Anything after the closing brace is ignored;
/// `consumed`, when given, receives the offset one past the closing brace.
inline KvMap parse_kv_map(std::string_view text, std::size_t* consumed = nullptr) {
  detail::KvReader reader(text);
  KvMap map = reader.read_map();
  if (consumed) *consumed = reader.pos();
  return map;
}

inline std::string render_kv(const KvMap& value) {
  std::string out;
  detail::render_value(out, value);
  return out;
}

/// Text form of a scalar or map value, used when a value has to be shown or
/// compared as plain text (numbers print without quotes).
inline std::string kv_text(const KvMap& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_object() || value.is_array()) return render_kv(value);
  return value.dump();
}

}  // namespace tooldrift
