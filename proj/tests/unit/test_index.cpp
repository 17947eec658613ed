#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "fixtures/random_data.hpp"
#include "fixtures/running_example.hpp"
#include "kgq/error.hpp"
#include "kgq/eval.hpp"
#include "kgq/index.hpp"

using namespace kgq;
using fixture::f;
using fixture::n;

namespace {

SPBFSlice slice_for(int i) {
  auto frag = fixture::concrete_fragments()[i - 1];
  return SPBFSlice{frag.id, SPBF::build(frag, BloomParams{}), fixture::holders_of(i)};
}

SPBFIndex full_index() {
  std::vector<SPBFSlice> slices;
  for (int i = 1; i <= 5; ++i) slices.push_back(slice_for(i));
  return combine(slices);
}

std::set<FragmentId> as_set(const std::vector<FragmentId>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(Combine, NodeViewOfFiveFragments) {
  std::vector<SPBFSlice> view{slice_for(2), slice_for(4), slice_for(5)};
  auto idx = combine(view);
  EXPECT_EQ(idx.size(), 3u);
  for (int i : {2, 4, 5}) EXPECT_TRUE(idx.contains(f(i)));
  EXPECT_FALSE(idx.contains(f(1)));
}

TEST(Combine, EmptyInput) { EXPECT_EQ(combine(std::span<const SPBFSlice>{}).size(), 0u); }

TEST(Combine, DuplicateSliceIsNoOpAndHoldersUnite) {
  auto s = slice_for(1);
  std::vector<SPBFSlice> twice{s, s};
  EXPECT_EQ(combine(twice), combine(std::span<const SPBFSlice>(&s, 1)));

  auto other = s;
  other.holders = {n(1)};
  std::vector<SPBFSlice> both{s, other};
  auto idx = combine(both);
  EXPECT_EQ(idx.holders(f(1)), (std::set<NodeId>{n(1), n(2), n(4)}));
}

TEST(Combine, AssociativeAndOrderInsensitive) {
  std::vector<SPBFSlice> all;
  for (int i = 1; i <= 5; ++i) all.push_back(slice_for(i));
  auto whole = combine(all);
  std::vector<SPBFSlice> left(all.begin(), all.begin() + 2), right(all.begin() + 2, all.end());
  EXPECT_EQ(combine(combine(left), combine(right)), whole);
  std::reverse(all.begin(), all.end());
  EXPECT_EQ(combine(all), whole);
}

TEST(RelevantFragments, RunningQueryStars) {
  auto idx = full_index();
  auto stars = fixture::stars_q();
  EXPECT_EQ(as_set(relevant_fragments(idx, stars[2])), (std::set<FragmentId>{f(5)}));
  EXPECT_EQ(as_set(relevant_fragments(idx, stars[0])), (std::set<FragmentId>{f(1), f(2)}));
  EXPECT_EQ(as_set(relevant_fragments(idx, stars[1])), (std::set<FragmentId>{f(3), f(4)}));
}

TEST(RelevantFragments, AbsentConstantPrunesEverything) {
  auto idx = full_index();
  StarPattern star(Variable{"s"}, {{Variable{"s"}, fixture::dbo("capital"), fixture::dbr("Atlantis")}});
  // Brute force: no fragment contains a match.
  for (const auto& frag : fixture::concrete_fragments()) ASSERT_TRUE(evaluate_star(star, frag.triples).empty());
  EXPECT_TRUE(relevant_fragments(idx, star).empty());
}

TEST(RelevantFragments, VariablePredicateSkipsCsCheck) {
  auto idx = full_index();
  StarPattern star(Variable{"s"}, {{Variable{"s"}, Variable{"p"}, Variable{"o"}}});
  EXPECT_EQ(relevant_fragments(idx, star).size(), 5u);
}

TEST(Holders, ExactReplicaSet) {
  auto idx = full_index();
  EXPECT_EQ(idx.holders(f(4)), (std::set<NodeId>{n(2), n(5)}));
  try {
    idx.holders(FragmentId{"nope"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
  }
}

TEST(RelevantFragments, SoundAndMonotoneOnRandomData) {
  std::mt19937_64 rng(101);
  for (int round = 0; round < 60; ++round) {
    auto inst = testdata::random_instance(rng, 4, 200);
    auto frags = fragment_by_cs(inst.graph, "g");
    std::vector<SPBFSlice> slices;
    for (const auto& fr : frags) slices.push_back({fr.id, SPBF::build(fr, BloomParams{}), {n(1)}});
    auto idx = combine(slices);
    for (int qi = 0; qi < 5; ++qi) {
      auto q = testdata::random_query(rng, inst, 1);
      auto star = star_decompose(q.bgp).front();
      auto relevant = as_set(relevant_fragments(idx, star));
      for (const auto& fr : frags)
        if (!evaluate_star(star, fr.triples).empty()) EXPECT_TRUE(relevant.contains(fr.id));

      // Replace one object variable by a constant: never more fragments.
      auto patterns = star.patterns();
      for (auto& tp : patterns)
        if (tp.o.is_variable()) {
          tp.o = testdata::entity(3);
          break;
        }
      StarPattern narrower(star.subject(), patterns);
      auto fewer = as_set(relevant_fragments(idx, narrower));
      EXPECT_TRUE(std::includes(relevant.begin(), relevant.end(), fewer.begin(), fewer.end()));
    }
  }
}

TEST(IndexFiles, RoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "kgq_index_roundtrip";
  std::filesystem::remove_all(dir);
  auto idx = full_index();
  write_index(dir.string(), idx);
  EXPECT_EQ(read_index(dir.string()), idx);
  std::filesystem::remove_all(dir);
}
