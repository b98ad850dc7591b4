#pragma once

#include <cstdlib>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cosetnet/words.hpp"

namespace cosetnet {

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Element cap for balls and normal-form tables; `COSETNET_MAX_ELEMENTS`
/// overrides the default.
inline std::size_t element_cap() {
  if (const char* env = std::getenv("COSETNET_MAX_ELEMENTS")) {
    try {
      return static_cast<std::size_t>(std::stoull(env));
    } catch (...) {
    }
  }
  return 5'000'000;
}

// ---------------------------------------------------------------------------
// Free reduction and Dehn's algorithm
// ---------------------------------------------------------------------------

inline Word reduce_free(const Alphabet& alpha, const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter c : w) {
    if (c >= alpha.size()) throw ParseError("symbol index out of alphabet");
    if (!out.empty() && out.back() == alpha.inverse(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

/// Closure of a relator list under inversion and cyclic permutation.
class SymmetrizedRelators {
 public:
  SymmetrizedRelators() = default;

  static SymmetrizedRelators from(const Alphabet& alpha, const std::vector<Word>& relators) {
    std::set<Word> all;
    for (const auto& r : relators) {
      for (const Word& base : {r, alpha.invert(r)}) {
        for (std::size_t s = 0; s < base.size(); ++s) {
          Word rot(base.begin() + static_cast<long>(s), base.end());
          rot.insert(rot.end(), base.begin(), base.begin() + static_cast<long>(s));
          all.insert(rot);
        }
      }
    }
    SymmetrizedRelators out;
    out.words_.assign(all.begin(), all.end());
    return out;
  }

  /// Takes an explicit relator set and rejects it unless it is already
  /// closed under inversion and cyclic permutation.
  static SymmetrizedRelators checked(const Alphabet& alpha, std::vector<Word> words) {
    std::set<Word> given(words.begin(), words.end());
    for (const auto& r : given) {
      Word inv = alpha.invert(r);
      if (!given.count(inv)) throw std::invalid_argument("relator set not symmetrized");
      for (std::size_t s = 1; s < r.size(); ++s) {
        Word rot(r.begin() + static_cast<long>(s), r.end());
        rot.insert(rot.end(), r.begin(), r.begin() + static_cast<long>(s));
        if (!given.count(rot)) throw std::invalid_argument("relator set not symmetrized");
      }
    }
    SymmetrizedRelators out;
    out.words_.assign(given.begin(), given.end());
    return out;
  }

  const std::vector<Word>& words() const { return words_; }

 private:
  std::vector<Word> words_;
};

/// Repeatedly replaces a subword that is more than half of some relator by
/// the inverse of the complementary piece, with free reduction in between.
/// For C'(1/6) presentations the result is empty iff `w` is trivial.
inline Word dehn_reduce(const Alphabet& alpha, const Word& w, const SymmetrizedRelators& rels) {
  Word cur = reduce_free(alpha, w);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < cur.size() && !changed; ++i) {
      for (const auto& r : rels.words()) {
        std::size_t n = r.size();
        std::size_t m = 0;
        while (m < n && i + m < cur.size() && cur[i + m] == r[m]) ++m;
        if (2 * m > n) {
          Word rest(r.begin() + static_cast<long>(m), r.end());
          Word repl = alpha.invert(rest);
          Word next(cur.begin(), cur.begin() + static_cast<long>(i));
          next.insert(next.end(), repl.begin(), repl.end());
          next.insert(next.end(), cur.begin() + static_cast<long>(i + m), cur.end());
          cur = reduce_free(alpha, next);
          changed = true;
          break;
        }
      }
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Group families
// ---------------------------------------------------------------------------

enum class Family { Free, FreeAbelian, FreeProductCyclic, Surface };

namespace detail {

// Shortlex-least geodesic representatives for surface groups, grown level by
// level. Equality is decided by Dehn reduction; candidates are bucketed by
// their images under retractions onto free groups so only a few comparisons
// are needed per lookup.
class SurfaceTable {
 public:
  SurfaceTable(Alphabet alpha, int genus, SymmetrizedRelators rels)
      : alpha_(std::move(alpha)), genus_(genus), rels_(std::move(rels)) {
    words_.push_back({});
    levels_.push_back(0);
    buckets_[key(Word{})].push_back(0);
  }

  Word normal_form(const Word& w) {
    std::lock_guard<std::mutex> lock(mu_);
    Word red = dehn_reduce(alpha_, w, rels_);
    for (;;) {
      if (auto hit = find(red)) return words_[*hit];
      if (radius() >= red.size()) break;
      grow();
    }
    throw std::logic_error("surface normal form: element not found within its Dehn length");
  }

  bool equal(const Word& u, const Word& v) const {
    return dehn_reduce(alpha_, concat(u, alpha_.invert(v)), rels_).empty();
  }

 private:
  std::size_t radius() const { return levels_.size() - 1; }

  std::optional<int> find(const Word& w) const {
    auto it = buckets_.find(key(w));
    if (it == buckets_.end()) return std::nullopt;
    for (int id : it->second)
      if (equal(w, words_[static_cast<std::size_t>(id)])) return id;
    return std::nullopt;
  }

  void grow() {
    std::size_t begin = levels_.back();
    std::size_t end = words_.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (Letter c = 0; c < alpha_.size(); ++c) {
        const Word& base = words_[i];
        if (!base.empty() && base.back() == alpha_.inverse(c)) continue;
        Word cand = base;
        cand.push_back(c);
        if (find(cand)) continue;
        if (words_.size() >= element_cap())
          throw ResourceLimit("surface normal-form table exceeded element cap");
        buckets_[key(cand)].push_back(static_cast<int>(words_.size()));
        words_.push_back(std::move(cand));
      }
    }
    levels_.push_back(end);
  }

  // Images under four retractions; each kills one generator from every
  // commutator pair, so the relator maps to the identity.
  std::string key(const Word& w) const {
    std::string out;
    for (int pattern = 0; pattern < 4; ++pattern) {
      Word img;
      for (Letter c : w) {
        int gen = c / 2;
        int pair = gen / 2;
        int member = gen % 2;
        int killed = (pattern < 2) ? pattern : ((pair + pattern) % 2);
        if (member == killed) continue;
        Letter im = static_cast<Letter>(2 * pair + (c % 2));
        if (!img.empty() && (img.back() ^ 1) == im && img.back() / 2 == im / 2)
          img.pop_back();
        else
          img.push_back(im);
      }
      out.append(img.begin(), img.end());
      out.push_back('|');
    }
    return out;
  }

  Alphabet alpha_;
  int genus_;
  SymmetrizedRelators rels_;
  std::vector<Word> words_;
  std::vector<std::size_t> levels_;
  std::unordered_map<std::string, std::vector<int>> buckets_;
  mutable std::mutex mu_;
};

}  // namespace detail

/// A group with solvable word problem. Normal forms are shortlex-least
/// geodesic words, so `normal_form(w).size()` is the word length of w.
class GroupOracle {
 public:
  static GroupOracle free(int rank) {
    if (rank < 1 || rank > 13) throw ParseError("free rank must be in [1,13]");
    GroupOracle g(Family::Free, "free:" + std::to_string(rank));
    std::vector<char> names;
    std::vector<Letter> inv;
    for (int i = 0; i < rank; ++i) {
      names.push_back(static_cast<char>('a' + i));
      names.push_back(static_cast<char>('A' + i));
      inv.push_back(static_cast<Letter>(2 * i + 1));
      inv.push_back(static_cast<Letter>(2 * i));
    }
    g.alpha_ = Alphabet(names, inv);
    g.params_ = {rank};
    return g;
  }

  static GroupOracle free_abelian(int dim) {
    static const std::string gens = "xyzwuv";
    if (dim < 1 || dim > static_cast<int>(gens.size()))
      throw ParseError("free abelian dimension must be in [1,6]");
    GroupOracle g(Family::FreeAbelian, "zfree:" + std::to_string(dim));
    std::vector<char> names;
    std::vector<Letter> inv;
    for (int i = 0; i < dim; ++i) {
      names.push_back(gens[static_cast<std::size_t>(i)]);
      names.push_back(static_cast<char>(gens[static_cast<std::size_t>(i)] - 'a' + 'A'));
      inv.push_back(static_cast<Letter>(2 * i + 1));
      inv.push_back(static_cast<Letter>(2 * i));
    }
    g.alpha_ = Alphabet(names, inv);
    g.params_ = {dim};
    return g;
  }

  /// Z/m * Z/n generated by a (order m) and b (order n). An order-2
  /// generator is its own inverse and contributes a single letter.
  static GroupOracle free_product_cyclic(int m, int n) {
    if (m < 2 || n < 2) throw ParseError("cyclic factor orders must be >= 2");
    GroupOracle g(Family::FreeProductCyclic, "fpc:" + std::to_string(m) + "," + std::to_string(n));
    std::vector<char> names;
    std::vector<Letter> inv;
    auto add = [&](char name, int order) {
      Letter self = static_cast<Letter>(names.size());
      names.push_back(name);
      if (order == 2) {
        inv.push_back(self);
      } else {
        names.push_back(static_cast<char>(name - 'a' + 'A'));
        inv.push_back(static_cast<Letter>(self + 1));
        inv.push_back(self);
      }
      g.gen_first_.push_back(self);
    };
    add('a', m);
    add('b', n);
    g.alpha_ = Alphabet(names, inv);
    g.params_ = {m, n};
    return g;
  }

  /// Fundamental group of the closed orientable surface of genus g with the
  /// standard one-relator presentation prod [x_i, y_i].
  static GroupOracle surface(int genus) {
    if (genus < 2 || genus > 6) throw ParseError("surface genus must be in [2,6]");
    GroupOracle g(Family::Surface, "surface:" + std::to_string(genus));
    std::vector<char> names;
    std::vector<Letter> inv;
    for (int i = 0; i < 2 * genus; ++i) {
      names.push_back(static_cast<char>('a' + i));
      names.push_back(static_cast<char>('A' + i));
      inv.push_back(static_cast<Letter>(2 * i + 1));
      inv.push_back(static_cast<Letter>(2 * i));
    }
    g.alpha_ = Alphabet(names, inv);
    Word rel;
    for (int i = 0; i < genus; ++i) {
      Letter x = static_cast<Letter>(4 * i), y = static_cast<Letter>(4 * i + 2);
      rel.insert(rel.end(), {x, y, static_cast<Letter>(x + 1), static_cast<Letter>(y + 1)});
    }
    g.relators_ = {rel};
    g.sym_ = SymmetrizedRelators::from(g.alpha_, g.relators_);
    g.table_ = std::make_shared<detail::SurfaceTable>(g.alpha_, genus, g.sym_);
    g.params_ = {genus};
    return g;
  }

  Family family() const { return family_; }
  const std::string& label() const { return label_; }
  const Alphabet& alphabet() const { return alpha_; }
  const std::vector<int>& params() const { return params_; }
  const std::vector<Word>& relators() const { return relators_; }
  const SymmetrizedRelators& symmetrized_relators() const { return sym_; }

  /// Families whose Cayley graphs are hyperbolic (all but free abelian).
  bool hyperbolic() const {
    return family_ != Family::FreeAbelian;
  }

  Word normal_form(const Word& w) const {
    check(w);
    switch (family_) {
      case Family::Free:
        return reduce_free(alpha_, w);
      case Family::FreeAbelian:
        return abelian_nf(w);
      case Family::FreeProductCyclic:
        return fpc_nf(w);
      case Family::Surface:
        return table_->normal_form(w);
    }
    return w;
  }

  Word multiply(const Word& u, const Word& v) const { return normal_form(concat(u, v)); }
  Word invert(const Word& u) const { return normal_form(alpha_.invert(u)); }
  std::size_t length(const Word& w) const { return normal_form(w).size(); }

  bool equal(const Word& u, const Word& v) const {
    if (family_ == Family::Surface) {
      check(u);
      check(v);
      return table_->equal(u, v);
    }
    return normal_form(u) == normal_form(v);
  }

  Word parse(std::string_view text) const { return alpha_.parse(text); }
  std::string format(const Word& w) const { return alpha_.format(w); }

 private:
  GroupOracle(Family f, std::string label) : family_(f), label_(std::move(label)) {}

  void check(const Word& w) const {
    for (Letter c : w)
      if (c >= alpha_.size()) throw ParseError("alphabet mismatch: letter index out of range");
  }

  Word abelian_nf(const Word& w) const {
    std::vector<long> e(alpha_.size() / 2, 0);
    for (Letter c : w) e[c / 2] += (c % 2 == 0) ? 1 : -1;
    Word out;
    for (std::size_t i = 0; i < e.size(); ++i) {
      Letter l = static_cast<Letter>(2 * i + (e[i] < 0 ? 1 : 0));
      for (long k = 0; k < std::labs(e[i]); ++k) out.push_back(l);
    }
    return out;
  }

  Word fpc_nf(const Word& w) const {
    // (generator, exponent mod order) syllables
    std::vector<std::pair<int, int>> syl;
    for (Letter c : w) {
      int gen = (c >= gen_first_[1]) ? 1 : 0;
      int order = params_[static_cast<std::size_t>(gen)];
      int e = (c == gen_first_[static_cast<std::size_t>(gen)]) ? 1 : order - 1;
      if (!syl.empty() && syl.back().first == gen) {
        syl.back().second = (syl.back().second + e) % order;
        if (syl.back().second == 0) syl.pop_back();
      } else {
        syl.emplace_back(gen, e);
      }
    }
    Word out;
    for (auto [gen, e] : syl) {
      int order = params_[static_cast<std::size_t>(gen)];
      Letter pos = gen_first_[static_cast<std::size_t>(gen)];
      if (2 * e <= order) {
        for (int k = 0; k < e; ++k) out.push_back(pos);
      } else {
        for (int k = 0; k < order - e; ++k) out.push_back(alpha_.inverse(pos));
      }
    }
    return out;
  }

  Family family_;
  std::string label_;
  Alphabet alpha_;
  std::vector<int> params_;
  std::vector<Letter> gen_first_;
  std::vector<Word> relators_;
  SymmetrizedRelators sym_;
  std::shared_ptr<detail::SurfaceTable> table_;
};

/// Parses `free:K`, `zfree:D`, `fpc:M,N` or `surface:G`.
inline GroupOracle parse_group(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw ParseError("group spec must look like family:params");
  std::string fam = text.substr(0, colon);
  std::string rest = text.substr(colon + 1);
  auto num = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError("bad number '" + s + "' in group spec");
    return std::stoi(s);
  };
  if (fam == "free") return GroupOracle::free(num(rest));
  if (fam == "zfree") return GroupOracle::free_abelian(num(rest));
  if (fam == "surface") return GroupOracle::surface(num(rest));
  if (fam == "fpc") {
    auto comma = rest.find(',');
    if (comma == std::string::npos) throw ParseError("fpc needs two orders: fpc:M,N");
    return GroupOracle::free_product_cyclic(num(rest.substr(0, comma)), num(rest.substr(comma + 1)));
  }
  throw ParseError("unknown group family '" + fam + "'");
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

struct SubgroupSpec {
  std::string label;
  std::vector<Word> generators;  // normal forms, closed under inversion
  std::function<bool(const Word&)> membership;  // exact, on normal forms; may be empty

  bool trivial() const { return generators.empty(); }
};

/// Builds a subgroup from generator words; attaches an exact membership test
/// where the family admits one (trivial subgroup, whole group, cyclic
/// subgroups outside the surface family).
inline SubgroupSpec make_subgroup(const GroupOracle& g, const std::vector<Word>& gens, std::string label) {
  SubgroupSpec h;
  h.label = std::move(label);
  std::set<Word> seen;
  for (const auto& w : gens) {
    Word nf = g.normal_form(w);
    if (nf.empty()) continue;
    for (const Word& x : {nf, g.invert(nf)}) {
      if (seen.insert(x).second) h.generators.push_back(x);
    }
  }
  const Alphabet& alpha = g.alphabet();
  std::set<Letter> letters;
  for (const auto& w : h.generators)
    if (w.size() == 1) letters.insert(w[0]);
  if (h.generators.empty()) {
    h.membership = [](const Word& w) { return w.empty(); };
  } else if (letters.size() == alpha.size()) {
    h.membership = [](const Word&) { return true; };
  } else if (h.generators.size() <= 2 &&
             g.family() != Family::Surface) {
    Word u = h.generators.front();
    GroupOracle oracle = g;
    h.membership = [oracle, u](const Word& w) {
      Word nf = oracle.normal_form(w);
      if (nf.empty()) return true;
      long bound = static_cast<long>(nf.size()) + 1;
      Word pos, neg;
      Word uinv = oracle.invert(u);
      for (long k = 1; k <= bound; ++k) {
        pos = oracle.multiply(pos, u);
        neg = oracle.multiply(neg, uinv);
        if (pos == nf || neg == nf) return true;
      }
      return false;
    };
  }
  return h;
}

/// Comma-separated generator words, e.g. `a`, `ab`, `a^2,b^2`; `1` (or an
/// empty string) is the trivial subgroup.
inline SubgroupSpec parse_subgroup(const GroupOracle& g, const std::string& text) {
  std::vector<Word> gens;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) gens.push_back(g.parse(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return make_subgroup(g, gens, text.empty() ? "1" : text);
}

}  // namespace cosetnet
