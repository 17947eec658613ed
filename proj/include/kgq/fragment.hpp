#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kgq/ids.hpp"
#include "kgq/rdf.hpp"

namespace kgq {

// The predicate family of a subject. Kept sorted and duplicate-free.
class CharacteristicSet {
 public:
  CharacteristicSet() = default;
  explicit CharacteristicSet(std::vector<Term> predicates);

  const std::vector<Term>& predicates() const noexcept { return preds_; }
  std::size_t size() const noexcept { return preds_.size(); }
  bool contains(const Term& p) const;
  bool subset_of(const CharacteristicSet& other) const;
  CharacteristicSet intersect(const CharacteristicSet& other) const;
  CharacteristicSet minus(const CharacteristicSet& other) const;
  CharacteristicSet unite(const CharacteristicSet& other) const;

  // Space-separated IRIs; identical sets give identical strings.
  std::string canonical() const;

  friend auto operator<=>(const CharacteristicSet&, const CharacteristicSet&) = default;
  friend bool operator==(const CharacteristicSet&, const CharacteristicSet&) = default;

 private:
  std::vector<Term> preds_;
};

struct Fragment {
  FragmentId id;
  CharacteristicSet cs;
  KnowledgeGraph triples;
  std::size_t subject_count = 0;

  void recount() { subject_count = triples.subjects().size(); }
};

// Stable id from the canonical CS and the source graph's id.
FragmentId fragment_id_for(const CharacteristicSet& cs, const std::string& graph_id);

// Throws a data error if `s` is not a subject of `g`.
CharacteristicSet characteristic_set(const Term& s, const KnowledgeGraph& g);

// One fragment per distinct characteristic set, ordered by canonical CS.
std::vector<Fragment> fragment_by_cs(const KnowledgeGraph& g, const std::string& graph_id = {});

inline constexpr std::size_t kDefaultMinSubjects = 50;

struct MergeReport {
  std::vector<Fragment> fragments;
  // Infrequent fragments for which no absorbing fragment existed.
  std::vector<FragmentId> unmerged;
  // merge_to_count only: whether the target count was reached.
  bool reached_target = true;
};

MergeReport merge_infrequent(std::vector<Fragment> frags, std::size_t min_subjects,
                             const std::string& graph_id = {});

MergeReport merge_to_count(std::vector<Fragment> frags, std::size_t target_count,
                           const std::string& graph_id = {});

// One N-Triples file per fragment plus manifest.jsonl in `dir`.
void write_fragments(const std::string& dir, const std::vector<Fragment>& frags);
std::vector<Fragment> read_fragments(const std::string& dir);

}  // namespace kgq
