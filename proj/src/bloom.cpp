#include "kgq/bloom.hpp"

#include <sodium.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "kgq/error.hpp"

namespace kgq {

void BloomParams::validate() const {
  if (m < 64) throw usage_error("bloom parameter m must be at least 64");
  if (k < 1 || k > 64) throw usage_error("bloom parameter k must be in [1, 64]");
}

bool Bitvector::set(std::size_t i) {
  auto& w = words_[i / 64];
  std::uint64_t bit = std::uint64_t{1} << (i % 64);
  bool fresh = (w & bit) == 0;
  w |= bit;
  return fresh;
}

std::size_t Bitvector::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool Bitvector::none() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

Bitvector& Bitvector::operator&=(const Bitvector& other) {
  if (other.bits_ != bits_) throw usage_error("bitvector length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw internal_error("libsodium initialisation failed");
}

std::string hash_key(const Term& t) { return t.to_ntriples(); }

}  // namespace

std::vector<std::uint32_t> bloom_positions(const BloomParams& params, std::string_view key) {
  ensure_sodium();
  std::vector<std::uint32_t> out;
  out.reserve(params.k);
  unsigned char hkey[crypto_shorthash_KEYBYTES] = {};
  for (int b = 0; b < 8; ++b) hkey[b] = static_cast<unsigned char>(params.seed >> (8 * b));
  // Variant i keys the hash with (seed, i); colliding positions are skipped
  // so that each key sets exactly k bits.
  for (std::uint64_t i = 0; out.size() < params.k; ++i) {
    for (int b = 0; b < 8; ++b) hkey[8 + b] = static_cast<unsigned char>(i >> (8 * b));
    unsigned char digest[crypto_shorthash_BYTES];
    crypto_shorthash(digest, reinterpret_cast<const unsigned char*>(key.data()), key.size(), hkey);
    std::uint64_t h = 0;
    for (int b = 0; b < 8; ++b) h |= std::uint64_t{digest[b]} << (8 * b);
    auto pos = static_cast<std::uint32_t>(h % params.m);
    if (std::find(out.begin(), out.end(), pos) == out.end()) out.push_back(pos);
  }
  return out;
}

std::size_t PartitionedBitvector::insert(const Term& term) {
  auto& bv = partition(term.prefix());
  std::size_t fresh = 0;
  for (auto pos : bloom_positions(params_, hash_key(term))) fresh += bv.set(pos) ? 1 : 0;
  return fresh;
}

bool PartitionedBitvector::maybe_contains(const Term& term) const {
  auto it = parts_.find(term.prefix());
  if (it == parts_.end()) return false;
  for (auto pos : bloom_positions(params_, hash_key(term)))
    if (!it->second.test(pos)) return false;
  return true;
}

Bitvector& PartitionedBitvector::partition(const std::string& prefix) {
  auto it = parts_.find(prefix);
  if (it == parts_.end()) it = parts_.emplace(prefix, Bitvector(params_.m)).first;
  return it->second;
}

std::size_t PartitionedBitvector::popcount() const {
  std::size_t n = 0;
  for (const auto& [_, bv] : parts_) n += bv.count();
  return n;
}

PartitionedBitvector intersect(const PartitionedBitvector& a, const PartitionedBitvector& b) {
  if (!(a.params() == b.params())) throw usage_error("cannot intersect filters with different parameters");
  PartitionedBitvector out(a.params());
  auto ia = a.partitions().begin();
  auto ib = b.partitions().begin();
  while (ia != a.partitions().end() && ib != b.partitions().end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      auto& bv = out.partition(ia->first);
      bv = ia->second;
      bv &= ib->second;
      ++ia;
      ++ib;
    }
  }
  return out;
}

double estimate_cardinality(const PartitionedBitvector& pb) {
  const double m = pb.params().m;
  const double k = pb.params().k;
  const double denom = k * std::log1p(-1.0 / m);
  double total = 0.0;
  for (const auto& [prefix, bv] : pb.partitions()) {
    auto t = static_cast<double>(bv.count());
    if (t >= m) {
      spdlog::warn("filter partition '{}' is saturated; estimate capped", prefix);
      total += m * std::log(m) / k;
      continue;
    }
    total += std::log1p(-t / m) / denom;
  }
  return total;
}

bool may_be_nonempty(const PartitionedBitvector& pb) {
  for (const auto& [_, bv] : pb.partitions())
    if (bv.count() >= pb.params().k) return true;
  return false;
}

SPBF SPBF::build(const Fragment& f, const BloomParams& params) {
  SPBF out(params);
  for (const auto& p : f.cs.predicates()) out.add_predicate(p);
  for (const auto& t : f.triples.triples()) {
    out.add_subject(t.s);
    out.add_object(t.p, t.o);
  }
  return out;
}

const PartitionedBitvector& SPBF::objects(const Term& p) const {
  auto it = objects_.find(p);
  if (it == objects_.end()) throw data_error("predicate not in filter: " + p.to_ntriples());
  return it->second;
}

PartitionedBitvector& SPBF::mutable_objects(const Term& p) {
  add_predicate(p);
  return objects_.at(p);
}

void SPBF::add_predicate(const Term& p) {
  if (preds_.contains(p)) return;
  auto preds = preds_.predicates();
  preds.push_back(p);
  preds_ = CharacteristicSet(std::move(preds));
  objects_.try_emplace(p, params_);
}

void SPBF::add_object(const Term& p, const Term& o) {
  add_predicate(p);
  objects_.at(p).insert(o);
}

PartitionedBitvector SPBF::predicate_bitvector() const {
  PartitionedBitvector out(params_);
  for (const auto& p : preds_.predicates()) out.insert(p);
  return out;
}

// ---------------------------------------------------------------------------
// Binary format: "KGQF", u16 version, params, then records sorted by key.

namespace {

constexpr char kMagic[4] = {'K', 'G', 'Q', 'F'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T get(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw data_error("truncated filter data");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{buf[i]} << (8 * i);
  return static_cast<T>(v);
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  if (n > (1U << 24)) throw data_error("implausible string length in filter data");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw data_error("truncated filter data");
  return s;
}

void put_header(std::ostream& out, const BloomParams& p) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint16_t>(out, kVersion);
  put<std::uint32_t>(out, p.m);
  put<std::uint32_t>(out, p.k);
  put<std::uint64_t>(out, p.seed);
}

BloomParams get_header(std::istream& in) {
  char magic[4];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + 4, kMagic)) throw data_error("bad filter magic");
  if (get<std::uint16_t>(in) != kVersion) throw data_error("unsupported filter version");
  BloomParams p;
  p.m = get<std::uint32_t>(in);
  p.k = get<std::uint32_t>(in);
  p.seed = get<std::uint64_t>(in);
  try {
    p.validate();
  } catch (const Error& e) {
    throw data_error(std::string("bad filter parameters: ") + e.what());
  }
  return p;
}

void put_partitions(std::ostream& out, const PartitionedBitvector& pb) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(pb.partitions().size()));
  for (const auto& [prefix, bv] : pb.partitions()) {
    put_string(out, prefix);
    for (auto w : bv.words()) put<std::uint64_t>(out, w);
  }
}

PartitionedBitvector get_partitions(std::istream& in, const BloomParams& params) {
  PartitionedBitvector pb(params);
  auto n = get<std::uint32_t>(in);
  std::string last;
  for (std::uint32_t i = 0; i < n; ++i) {
    auto prefix = get_string(in);
    if (i > 0 && prefix <= last) throw data_error("filter partitions out of order");
    last = prefix;
    auto& bv = pb.partition(prefix);
    for (auto& w : bv.words()) w = get<std::uint64_t>(in);
  }
  return pb;
}

}  // namespace

void write_bitvector(std::ostream& out, const PartitionedBitvector& pb) {
  put_header(out, pb.params());
  put_partitions(out, pb);
}

PartitionedBitvector read_bitvector(std::istream& in) {
  auto params = get_header(in);
  return get_partitions(in, params);
}

void write_spbf(std::ostream& out, const SPBF& spbf) {
  put_header(out, spbf.params());
  put_partitions(out, spbf.subjects());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spbf.objects().size()));
  for (const auto& [p, pb] : spbf.objects()) {
    put_string(out, p.value());
    put_partitions(out, pb);
  }
}

SPBF read_spbf(std::istream& in) {
  auto params = get_header(in);
  SPBF spbf(params);
  spbf.mutable_subjects() = get_partitions(in, params);
  auto n = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    Term p = Term::iri(get_string(in));
    spbf.add_predicate(p);
    spbf.mutable_objects(p) = get_partitions(in, params);
  }
  return spbf;
}

std::string serialize_spbf(const SPBF& spbf) {
  std::ostringstream out;
  write_spbf(out, spbf);
  return out.str();
}

SPBF deserialize_spbf(const std::string& bytes) {
  std::istringstream in(bytes);
  auto spbf = read_spbf(in);
  if (in.peek() != std::char_traits<char>::eof()) throw data_error("trailing bytes after filter");
  return spbf;
}

}  // namespace kgq
