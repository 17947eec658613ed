#include "kgq/index.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgq/error.hpp"

namespace kgq {

void SPBFIndex::add(const SPBFSlice& slice) {
  auto [it, fresh] = slices_.try_emplace(slice.fragment, slice);
  if (!fresh) it->second.holders.insert(slice.holders.begin(), slice.holders.end());
}

const SPBFSlice& SPBFIndex::slice(const FragmentId& f) const {
  auto it = slices_.find(f);
  if (it == slices_.end()) throw data_error("unknown fragment " + f.value);
  return it->second;
}

SPBFIndex combine(std::span<const SPBFSlice> slices) {
  SPBFIndex idx;
  for (const auto& s : slices) idx.add(s);
  return idx;
}

SPBFIndex combine(const SPBFIndex& a, const SPBFIndex& b) {
  SPBFIndex out = a;
  for (const auto& [_, s] : b.slices()) out.add(s);
  return out;
}

bool relevant_fragment(const StarPattern& star, const SPBF& spbf) {
  const auto& subj = star.subject();
  if (subj.is_constant() && !spbf.subjects().maybe_contains(subj.term())) return false;
  for (const auto& tp : star.patterns()) {
    if (tp.p.is_variable()) {
      // Only constants constrain relevance; a constant object under a
      // variable predicate must appear under some predicate.
      if (tp.o.is_constant()) {
        bool any = false;
        for (const auto& [_, objs] : spbf.objects()) any = any || objs.maybe_contains(tp.o.term());
        if (!any) return false;
      }
      continue;
    }
    const auto& p = tp.p.term();
    if (!spbf.predicates().contains(p)) return false;
    if (tp.o.is_constant() && !spbf.objects(p).maybe_contains(tp.o.term())) return false;
  }
  return true;
}

std::vector<FragmentId> relevant_fragments(const SPBFIndex& idx, const StarPattern& star) {
  std::vector<FragmentId> out;
  for (const auto& [id, slice] : idx.slices())
    if (relevant_fragment(star, slice.spbf)) out.push_back(id);
  return out;
}

void write_slice(const std::string& path, const SPBFSlice& slice) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path);
  std::ostringstream header;
  header << "slice " << slice.fragment.value << " holders";
  for (const auto& n : slice.holders) header << ' ' << n.to_string();
  out << header.str() << '\n';
  write_spbf(out, slice.spbf);
}

SPBFSlice read_slice(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string tag, id, holders_tag;
  header >> tag >> id >> holders_tag;
  if (tag != "slice" || id.empty() || holders_tag != "holders") throw data_error("bad slice header in " + path);
  SPBFSlice slice;
  slice.fragment = FragmentId{id};
  for (std::string n; header >> n;) {
    try {
      slice.holders.insert(parse_node_id(n));
    } catch (const Error&) {
      throw data_error("bad holder '" + n + "' in " + path);
    }
  }
  if (slice.holders.empty()) throw data_error("slice without holders in " + path);
  slice.spbf = read_spbf(in);
  return slice;
}

void write_index(const std::string& dir, const SPBFIndex& idx) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw data_error("cannot create directory " + dir + ": " + ec.message());
  std::ofstream manifest(fs::path(dir) / "index.manifest");
  if (!manifest) throw data_error("cannot write index manifest in " + dir);
  for (const auto& [id, slice] : idx.slices()) {
    std::string file = id.value + ".slice";
    write_slice((fs::path(dir) / file).string(), slice);
    manifest << file << '\n';
  }
}

SPBFIndex read_index(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / "index.manifest");
  if (!manifest) throw data_error("no index manifest in " + dir);
  SPBFIndex idx;
  for (std::string file; std::getline(manifest, file);)
    if (!file.empty()) idx.add(read_slice((fs::path(dir) / file).string()));
  return idx;
}

}  // namespace kgq
