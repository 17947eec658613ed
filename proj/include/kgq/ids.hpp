#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>

namespace kgq {

struct FragmentId {
  std::string value;

  friend auto operator<=>(const FragmentId&, const FragmentId&) = default;
  friend bool operator==(const FragmentId&, const FragmentId&) = default;
};

// Nodes are numbered from 1 and printed as "n<id>".
struct NodeId {
  std::uint32_t value = 0;

  std::string to_string() const { return "n" + std::to_string(value); }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

// Parses "n3" or "3".
NodeId parse_node_id(const std::string& text);

inline std::ostream& operator<<(std::ostream& os, const FragmentId& f) { return os << f.value; }
inline std::ostream& operator<<(std::ostream& os, NodeId n) { return os << n.to_string(); }

}  // namespace kgq

template <>
struct std::hash<kgq::FragmentId> {
  std::size_t operator()(const kgq::FragmentId& f) const noexcept { return std::hash<std::string>{}(f.value); }
};

template <>
struct std::hash<kgq::NodeId> {
  std::size_t operator()(const kgq::NodeId& n) const noexcept { return std::hash<std::uint32_t>{}(n.value); }
};
