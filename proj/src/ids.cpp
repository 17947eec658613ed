#include "kgq/ids.hpp"

#include <charconv>

#include "kgq/error.hpp"

namespace kgq {

NodeId parse_node_id(const std::string& text) {
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == 'n' || digits.front() == 'N')) digits.remove_prefix(1);
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || v == 0)
    throw usage_error("bad node id '" + text + "'");
  return NodeId{v};
}

}  // namespace kgq
