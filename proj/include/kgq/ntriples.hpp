#pragma once

#include <istream>
#include <ostream>
#include <string_view>

#include "kgq/rdf.hpp"

namespace kgq {

// Throws ParseError with the offending line number.
KnowledgeGraph parse_ntriples(std::istream& in);
KnowledgeGraph parse_ntriples(std::string_view text);

void write_ntriples(std::ostream& out, const KnowledgeGraph& g);
std::string to_ntriples(const KnowledgeGraph& g);

KnowledgeGraph read_ntriples_file(const std::string& path);
void write_ntriples_file(const std::string& path, const KnowledgeGraph& g);

}  // namespace kgq
