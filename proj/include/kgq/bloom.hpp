#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kgq/fragment.hpp"
#include "kgq/rdf.hpp"

namespace kgq {

struct BloomParams {
  std::uint32_t m = 20000;  // bits per partition
  std::uint32_t k = 5;      // hash functions
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const BloomParams&, const BloomParams&) = default;
};

class Bitvector {
 public:
  explicit Bitvector(std::size_t bits = 0) : bits_(bits), words_((bits + 63) / 64, 0) {}

  std::size_t size() const noexcept { return bits_; }
  // Returns true if the bit was previously clear.
  bool set(std::size_t i);
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
  std::size_t count() const;
  bool none() const;

  Bitvector& operator&=(const Bitvector& other);
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::span<std::uint64_t> words() noexcept { return words_; }

  friend bool operator==(const Bitvector&, const Bitvector&) = default;

 private:
  std::size_t bits_;
  std::vector<std::uint64_t> words_;
};

// k distinct bit positions for `key` in [0, m).
std::vector<std::uint32_t> bloom_positions(const BloomParams& params, std::string_view key);

// A Bloom filter split into one bitvector per term prefix. Partitions are
// created on first insertion.
class PartitionedBitvector {
 public:
  explicit PartitionedBitvector(BloomParams params = {}) : params_(params) { params_.validate(); }

  const BloomParams& params() const noexcept { return params_; }
  const std::map<std::string, Bitvector>& partitions() const noexcept { return parts_; }

  // Returns the number of bits that flipped from 0 to 1.
  std::size_t insert(const Term& term);
  bool maybe_contains(const Term& term) const;

  // Raw access for tests and deserialisation.
  Bitvector& partition(const std::string& prefix);

  std::size_t popcount() const;
  bool empty() const { return parts_.empty(); }

  friend bool operator==(const PartitionedBitvector&, const PartitionedBitvector&) = default;

 private:
  BloomParams params_;
  std::map<std::string, Bitvector> parts_;
};

// Common prefixes only, bitwise AND. Throws on parameter mismatch.
PartitionedBitvector intersect(const PartitionedBitvector& a, const PartitionedBitvector& b);

// Sum over partitions of ln(1 - t/m) / (k ln(1 - 1/m)). A saturated
// partition contributes m ln(m) / k and logs a warning.
double estimate_cardinality(const PartitionedBitvector& pb);

// True if some partition has at least k bits set. Every element present in
// both operands of an intersection sets k distinct bits, so a false answer
// proves the underlying sets are disjoint.
bool may_be_nonempty(const PartitionedBitvector& pb);

// Subject filter plus one object filter per predicate of a fragment.
class SPBF {
 public:
  SPBF() = default;
  explicit SPBF(BloomParams params) : params_(params), subjects_(params) {}

  static SPBF build(const Fragment& f, const BloomParams& params);

  const BloomParams& params() const noexcept { return params_; }
  const CharacteristicSet& predicates() const noexcept { return preds_; }
  const PartitionedBitvector& subjects() const noexcept { return subjects_; }
  const std::map<Term, PartitionedBitvector>& objects() const noexcept { return objects_; }
  // Throws if `p` is not one of the predicates.
  const PartitionedBitvector& objects(const Term& p) const;

  // Filter over the predicate IRIs themselves.
  PartitionedBitvector predicate_bitvector() const;

  void add_subject(const Term& s) { subjects_.insert(s); }
  void add_object(const Term& p, const Term& o);
  void add_predicate(const Term& p);
  PartitionedBitvector& mutable_subjects() noexcept { return subjects_; }
  PartitionedBitvector& mutable_objects(const Term& p);

  friend bool operator==(const SPBF&, const SPBF&) = default;

 private:
  BloomParams params_;
  CharacteristicSet preds_;
  PartitionedBitvector subjects_;
  std::map<Term, PartitionedBitvector> objects_;
};

void write_bitvector(std::ostream& out, const PartitionedBitvector& pb);
PartitionedBitvector read_bitvector(std::istream& in);

void write_spbf(std::ostream& out, const SPBF& spbf);
SPBF read_spbf(std::istream& in);
std::string serialize_spbf(const SPBF& spbf);
SPBF deserialize_spbf(const std::string& bytes);

}  // namespace kgq
