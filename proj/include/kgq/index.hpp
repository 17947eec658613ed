#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "kgq/bloom.hpp"
#include "kgq/ids.hpp"
#include "kgq/query.hpp"

namespace kgq {

struct SPBFSlice {
  FragmentId fragment;
  SPBF spbf;
  std::set<NodeId> holders;

  friend bool operator==(const SPBFSlice&, const SPBFSlice&) = default;
};

// A node's view: fragment -> (filter, replica holders).
class SPBFIndex {
 public:
  SPBFIndex() = default;

  // Merge a slice in. Holders of an already known fragment are united.
  void add(const SPBFSlice& slice);

  const std::map<FragmentId, SPBFSlice>& slices() const noexcept { return slices_; }
  bool contains(const FragmentId& f) const { return slices_.contains(f); }
  std::size_t size() const noexcept { return slices_.size(); }

  // Throws a data error for an unknown fragment.
  const SPBFSlice& slice(const FragmentId& f) const;
  const SPBF& filter(const FragmentId& f) const { return slice(f).spbf; }
  const std::set<NodeId>& holders(const FragmentId& f) const { return slice(f).holders; }

  friend bool operator==(const SPBFIndex&, const SPBFIndex&) = default;

 private:
  std::map<FragmentId, SPBFSlice> slices_;
};

SPBFIndex combine(std::span<const SPBFSlice> slices);
SPBFIndex combine(const SPBFIndex& a, const SPBFIndex& b);

// Could fragment `spbf` hold a full match of `star`?
bool relevant_fragment(const StarPattern& star, const SPBF& spbf);

// Fragments of `idx` that may contain matches of `star`, in id order.
std::vector<FragmentId> relevant_fragments(const SPBFIndex& idx, const StarPattern& star);

// Slice file: filter binary followed by the holder list.
void write_slice(const std::string& path, const SPBFSlice& slice);
SPBFSlice read_slice(const std::string& path);

// Writes one slice file per fragment plus index.manifest listing them.
void write_index(const std::string& dir, const SPBFIndex& idx);
SPBFIndex read_index(const std::string& dir);

}  // namespace kgq
