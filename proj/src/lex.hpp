#pragma once

// Shared lexing helpers for the N-Triples and query parsers.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kgq::detail {

void append_utf8(std::string& out, std::uint32_t cp);

// Reads a quoted string starting at text[pos] == '"'. On success advances
// pos past the closing quote. Returns nullopt if unterminated; throws
// std::invalid_argument on a bad escape.
std::optional<std::string> read_quoted(std::string_view text, std::size_t& pos);

// Reads <...> starting at text[pos] == '<', resolving \u escapes.
std::optional<std::string> read_iri_ref(std::string_view text, std::size_t& pos);

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

inline void skip_space(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
}

}  // namespace kgq::detail
