#include "lex.hpp"

#include <stdexcept>

namespace kgq::detail {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp <= 0x10FFFF) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    throw std::invalid_argument("code point out of range");
  }
}

namespace {

std::uint32_t read_hex(std::string_view text, std::size_t& pos, int digits) {
  if (pos + digits > text.size()) throw std::invalid_argument("truncated \\u escape");
  std::uint32_t v = 0;
  for (int i = 0; i < digits; ++i) {
    char c = text[pos++];
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
    else throw std::invalid_argument("bad hex digit in escape");
  }
  return v;
}

}  // namespace

std::optional<std::string> read_quoted(std::string_view text, std::size_t& pos) {
  std::string out;
  std::size_t i = pos + 1;
  while (i < text.size()) {
    char c = text[i++];
    if (c == '"') {
      pos = i;
      return out;
    }
    if (c == '\n' || c == '\r') return std::nullopt;
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i >= text.size()) return std::nullopt;
    char e = text[i++];
    switch (e) {
      case 't': out += '\t'; break;
      case 'b': out += '\b'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'f': out += '\f'; break;
      case '"': out += '"'; break;
      case '\'': out += '\''; break;
      case '\\': out += '\\'; break;
      case 'u': append_utf8(out, read_hex(text, i, 4)); break;
      case 'U': append_utf8(out, read_hex(text, i, 8)); break;
      default: throw std::invalid_argument(std::string("bad escape \\") + e);
    }
  }
  return std::nullopt;
}

std::optional<std::string> read_iri_ref(std::string_view text, std::size_t& pos) {
  std::string out;
  std::size_t i = pos + 1;
  while (i < text.size()) {
    char c = text[i++];
    if (c == '>') {
      pos = i;
      return out;
    }
    if (c == '\\') {
      if (i >= text.size()) return std::nullopt;
      char e = text[i++];
      if (e == 'u') append_utf8(out, read_hex(text, i, 4));
      else if (e == 'U') append_utf8(out, read_hex(text, i, 8));
      else throw std::invalid_argument("bad escape in IRI");
      continue;
    }
    if (c == '\n') return std::nullopt;
    out += c;
  }
  return std::nullopt;
}

}  // namespace kgq::detail
