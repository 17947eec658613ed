#include "kgq/fragment.hpp"

#include <sodium.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "json.hpp"
#include "kgq/error.hpp"
#include "kgq/ntriples.hpp"

namespace kgq {

CharacteristicSet::CharacteristicSet(std::vector<Term> predicates) : preds_(std::move(predicates)) {
  std::sort(preds_.begin(), preds_.end());
  preds_.erase(std::unique(preds_.begin(), preds_.end()), preds_.end());
}

bool CharacteristicSet::contains(const Term& p) const { return std::binary_search(preds_.begin(), preds_.end(), p); }

bool CharacteristicSet::subset_of(const CharacteristicSet& other) const {
  return std::includes(other.preds_.begin(), other.preds_.end(), preds_.begin(), preds_.end());
}

CharacteristicSet CharacteristicSet::intersect(const CharacteristicSet& other) const {
  std::vector<Term> out;
  std::set_intersection(preds_.begin(), preds_.end(), other.preds_.begin(), other.preds_.end(),
                        std::back_inserter(out));
  return CharacteristicSet(std::move(out));
}

CharacteristicSet CharacteristicSet::minus(const CharacteristicSet& other) const {
  std::vector<Term> out;
  std::set_difference(preds_.begin(), preds_.end(), other.preds_.begin(), other.preds_.end(),
                      std::back_inserter(out));
  return CharacteristicSet(std::move(out));
}

CharacteristicSet CharacteristicSet::unite(const CharacteristicSet& other) const {
  std::vector<Term> out;
  std::set_union(preds_.begin(), preds_.end(), other.preds_.begin(), other.preds_.end(), std::back_inserter(out));
  return CharacteristicSet(std::move(out));
}

std::string CharacteristicSet::canonical() const {
  std::string out;
  for (const auto& p : preds_) {
    if (!out.empty()) out += ' ';
    out += p.value();
  }
  return out;
}

FragmentId fragment_id_for(const CharacteristicSet& cs, const std::string& graph_id) {
  if (sodium_init() < 0) throw internal_error("libsodium initialisation failed");
  std::string input = graph_id + '\n' + cs.canonical();
  unsigned char digest[8];
  crypto_generichash(digest, sizeof digest, reinterpret_cast<const unsigned char*>(input.data()), input.size(),
                     nullptr, 0);
  char hex[sizeof digest * 2 + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return FragmentId{std::string("frag-") + hex};
}

CharacteristicSet characteristic_set(const Term& s, const KnowledgeGraph& g) {
  if (!g.has_subject(s)) throw data_error("subject not found: " + s.to_ntriples());
  std::vector<Term> preds;
  for (const auto& t : g.with_subject(s)) preds.push_back(t.p);
  return CharacteristicSet(std::move(preds));
}

std::vector<Fragment> fragment_by_cs(const KnowledgeGraph& g, const std::string& graph_id) {
  std::map<CharacteristicSet, Fragment> by_cs;
  for (const auto& s : g.subjects()) {
    auto triples = g.with_subject(s);
    std::vector<Term> preds;
    preds.reserve(triples.size());
    for (const auto& t : triples) preds.push_back(t.p);
    CharacteristicSet cs(std::move(preds));
    auto& frag = by_cs[cs];
    for (auto& t : triples) frag.triples.insert(std::move(t));
    if (frag.cs.size() == 0) frag.cs = std::move(cs);
  }
  std::vector<Fragment> out;
  out.reserve(by_cs.size());
  for (auto& [cs, frag] : by_cs) {
    frag.id = fragment_id_for(frag.cs, graph_id);
    frag.recount();
    out.push_back(std::move(frag));
  }
  std::sort(out.begin(), out.end(), [](const Fragment& a, const Fragment& b) { return a.cs.canonical() < b.cs.canonical(); });
  return out;
}

namespace {

void absorb(Fragment& into, const Fragment& from) {
  for (const auto& t : from.triples.triples()) into.triples.insert(t);
  into.recount();
}

// Move the triples of `from` whose predicate is in `preds` into `into`.
void absorb_piece(Fragment& into, Fragment& from, const CharacteristicSet& preds) {
  KnowledgeGraph rest;
  for (const auto& t : from.triples.triples()) {
    if (preds.contains(t.p)) into.triples.insert(t);
    else rest.insert(t);
  }
  from.triples = std::move(rest);
  into.recount();
  from.recount();
}

// Deterministic ordering for ties.
bool smaller_cs(const Fragment& a, const Fragment& b) {
  if (a.cs.size() != b.cs.size()) return a.cs.size() < b.cs.size();
  return a.cs.canonical() < b.cs.canonical();
}

bool fewer_subjects(const Fragment& a, const Fragment& b) {
  if (a.subject_count != b.subject_count) return a.subject_count < b.subject_count;
  return a.cs.canonical() < b.cs.canonical();
}

void sort_output(std::vector<Fragment>& frags) {
  std::sort(frags.begin(), frags.end(), [](const Fragment& a, const Fragment& b) { return a.cs.canonical() < b.cs.canonical(); });
}

// Smallest-CS fragment among `targets` whose CS contains `f.cs`.
std::ptrdiff_t subset_target(const Fragment& f, const std::vector<Fragment>& frags, const std::vector<bool>& eligible,
                             std::size_t self) {
  std::ptrdiff_t best = -1;
  for (std::size_t j = 0; j < frags.size(); ++j) {
    if (j == self || !eligible[j] || !f.cs.subset_of(frags[j].cs)) continue;
    if (best < 0 || smaller_cs(frags[j], frags[static_cast<std::size_t>(best)])) best = static_cast<std::ptrdiff_t>(j);
  }
  return best;
}

// Greedy cover of `remaining` by eligible fragments: largest intersection
// first, ties by smaller CS.
std::vector<std::pair<std::size_t, CharacteristicSet>> split_plan(CharacteristicSet remaining,
                                                                  const std::vector<Fragment>& frags,
                                                                  const std::vector<bool>& eligible, std::size_t self,
                                                                  CharacteristicSet& leftover) {
  std::vector<std::pair<std::size_t, CharacteristicSet>> pieces;
  while (remaining.size() > 0) {
    std::ptrdiff_t best = -1;
    std::size_t best_overlap = 0;
    for (std::size_t j = 0; j < frags.size(); ++j) {
      if (j == self || !eligible[j]) continue;
      std::size_t overlap = remaining.intersect(frags[j].cs).size();
      if (overlap == 0) continue;
      if (best < 0 || overlap > best_overlap ||
          (overlap == best_overlap && smaller_cs(frags[j], frags[static_cast<std::size_t>(best)]))) {
        best = static_cast<std::ptrdiff_t>(j);
        best_overlap = overlap;
      }
    }
    if (best < 0) break;
    auto piece = remaining.intersect(frags[static_cast<std::size_t>(best)].cs);
    remaining = remaining.minus(piece);
    pieces.emplace_back(static_cast<std::size_t>(best), std::move(piece));
  }
  leftover = std::move(remaining);
  return pieces;
}

// Fold fragments with identical CS together.
void coalesce(std::vector<Fragment>& frags) {
  std::map<CharacteristicSet, std::size_t> seen;
  std::vector<Fragment> out;
  for (auto& f : frags) {
    auto [it, fresh] = seen.emplace(f.cs, out.size());
    if (fresh) out.push_back(std::move(f));
    else absorb(out[it->second], f);
  }
  frags = std::move(out);
}

// One pass of subset-merge followed by split-merge. Returns true if anything moved.
bool merge_pass(std::vector<Fragment>& frags, std::size_t min_subjects, const std::string& graph_id,
                std::vector<FragmentId>& unmerged) {
  std::vector<bool> frequent(frags.size());
  for (std::size_t i = 0; i < frags.size(); ++i) frequent[i] = frags[i].subject_count >= min_subjects;

  std::vector<std::size_t> infrequent;
  for (std::size_t i = 0; i < frags.size(); ++i)
    if (!frequent[i]) infrequent.push_back(i);
  std::sort(infrequent.begin(), infrequent.end(),
            [&](std::size_t a, std::size_t b) { return fewer_subjects(frags[a], frags[b]); });

  std::vector<bool> gone(frags.size(), false);
  bool changed = false;

  for (auto i : infrequent) {
    auto target = subset_target(frags[i], frags, frequent, i);
    if (target < 0) continue;
    absorb(frags[static_cast<std::size_t>(target)], frags[i]);
    gone[i] = true;
    changed = true;
  }

  unmerged.clear();
  for (auto i : infrequent) {
    if (gone[i]) continue;
    CharacteristicSet leftover;
    auto pieces = split_plan(frags[i].cs, frags, frequent, i, leftover);
    if (pieces.empty()) {
      unmerged.push_back(frags[i].id);
      continue;
    }
    for (const auto& [target, preds] : pieces) absorb_piece(frags[target], frags[i], preds);
    changed = true;
    if (leftover.size() == 0) {
      gone[i] = true;
    } else {
      frags[i].cs = leftover;
      frags[i].id = fragment_id_for(leftover, graph_id);
    }
  }

  std::vector<Fragment> kept;
  for (std::size_t i = 0; i < frags.size(); ++i)
    if (!gone[i]) kept.push_back(std::move(frags[i]));
  frags = std::move(kept);
  coalesce(frags);
  return changed;
}

}  // namespace

MergeReport merge_infrequent(std::vector<Fragment> frags, std::size_t min_subjects, const std::string& graph_id) {
  if (min_subjects < 1) throw usage_error("min_subjects must be at least 1");
  MergeReport report;
  // Repeat until stable so that a second call at the same threshold is a no-op.
  while (merge_pass(frags, min_subjects, graph_id, report.unmerged)) {
  }
  sort_output(frags);
  report.fragments = std::move(frags);
  return report;
}

MergeReport merge_to_count(std::vector<Fragment> frags, std::size_t target_count, const std::string& graph_id) {
  if (target_count < 1 || target_count > frags.size())
    throw usage_error("target count " + std::to_string(target_count) + " outside [1, " +
                      std::to_string(frags.size()) + "]");
  while (frags.size() > target_count) {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < frags.size(); ++i)
      if (fewer_subjects(frags[i], frags[victim])) victim = i;

    std::vector<bool> eligible(frags.size(), true);
    auto target = subset_target(frags[victim], frags, eligible, victim);
    if (target >= 0) {
      absorb(frags[static_cast<std::size_t>(target)], frags[victim]);
    } else {
      CharacteristicSet leftover;
      auto pieces = split_plan(frags[victim].cs, frags, eligible, victim, leftover);
      if (leftover.size() == 0) {
        for (const auto& [t, preds] : pieces) absorb_piece(frags[t], frags[victim], preds);
      } else {
        // No exact cover: widen the best-overlapping fragment's CS instead.
        std::size_t best = victim == 0 ? 1 : 0;
        std::size_t best_overlap = frags[victim].cs.intersect(frags[best].cs).size();
        for (std::size_t j = 0; j < frags.size(); ++j) {
          if (j == victim) continue;
          auto overlap = frags[victim].cs.intersect(frags[j].cs).size();
          if (overlap > best_overlap || (overlap == best_overlap && fewer_subjects(frags[j], frags[best]))) {
            best = j;
            best_overlap = overlap;
          }
        }
        auto& into = frags[best];
        into.cs = into.cs.unite(frags[victim].cs);
        into.id = fragment_id_for(into.cs, graph_id);
        absorb(into, frags[victim]);
      }
    }
    frags.erase(frags.begin() + static_cast<std::ptrdiff_t>(victim));
    coalesce(frags);
  }
  sort_output(frags);
  MergeReport report;
  report.fragments = std::move(frags);
  report.reached_target = report.fragments.size() == target_count;
  return report;
}

void write_fragments(const std::string& dir, const std::vector<Fragment>& frags) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create directory " + dir + ": " + ec.message());
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) throw data_error("cannot write manifest in " + dir);
  for (const auto& f : frags) {
    std::string file = f.id.value + ".nt";
    write_ntriples_file((fs::path(dir) / file).string(), f.triples);
    nlohmann::ordered_json line;
    line["id"] = f.id.value;
    line["file"] = file;
    line["subject_count"] = f.subject_count;
    auto& cs = line["cs"] = nlohmann::ordered_json::array();
    for (const auto& p : f.cs.predicates()) cs.push_back(p.value());
    manifest << line.dump() << '\n';
  }
}

std::vector<Fragment> read_fragments(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) throw data_error("no fragment manifest in " + dir);
  std::vector<Fragment> out;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Fragment f;
      f.id = FragmentId{j.at("id").get<std::string>()};
      std::vector<Term> preds;
      for (const auto& p : j.at("cs")) preds.push_back(Term::iri(p.get<std::string>()));
      f.cs = CharacteristicSet(std::move(preds));
      f.triples = read_ntriples_file((fs::path(dir) / j.at("file").get<std::string>()).string());
      f.recount();
      if (f.subject_count != j.at("subject_count").get<std::size_t>())
        throw data_error("subject count mismatch for fragment " + f.id.value);
      out.push_back(std::move(f));
    } catch (const nlohmann::json::exception& e) {
      throw data_error("bad fragment manifest line: " + std::string(e.what()));
    }
  }
  return out;
}

}  // namespace kgq
