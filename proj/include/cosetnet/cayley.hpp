#pragma once

#include <array>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "cosetnet/groups.hpp"
#include "cosetnet/parallel.hpp"
#include "json.hpp"

namespace cosetnet {

struct OutOfBall : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Element = int;

/// The exact ball B(R) of the Cayley graph, elements in shortlex order of
/// their normal forms (which is BFS discovery order).
class Ball {
 public:
  const GroupOracle& oracle() const { return oracle_; }
  const Alphabet& alphabet() const { return oracle_.alphabet(); }
  int radius() const { return radius_; }
  std::size_t size() const { return words_.size(); }

  const Word& word(Element e) const { return words_.at(static_cast<std::size_t>(e)); }
  int length(Element e) const { return static_cast<int>(words_.at(static_cast<std::size_t>(e)).size()); }

  /// Right neighbour e·c, or -1 when it lies outside the ball.
  Element step(Element e, Letter c) const {
    return adj_[static_cast<std::size_t>(e) * alphabet().size() + c];
  }

  /// (letter, predecessor) pairs with predecessor·letter = e on a geodesic.
  const std::vector<std::pair<Letter, Element>>& parents(Element e) const {
    return parents_.at(static_cast<std::size_t>(e));
  }

  std::optional<Element> find_normal(const Word& nf) const {
    auto it = index_.find(word_key(nf));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Element> find(const Word& w) const { return find_normal(oracle_.normal_form(w)); }

  Element at(const Word& w) const {
    auto e = find(w);
    if (!e) throw OutOfBall("element " + oracle_.format(oracle_.normal_form(w)) + " outside B(" +
                            std::to_string(radius_) + ")");
    return *e;
  }

  /// Elements with length <= r (a prefix of the element list).
  std::size_t count_within(int r) const {
    if (r < 0) return 0;
    if (r >= radius_) return size();
    return level_start_[static_cast<std::size_t>(r) + 1];
  }

  std::size_t sphere_size(int n) const {
    if (n < 0 || n > radius_) return 0;
    return level_start_[static_cast<std::size_t>(n) + 1] - level_start_[static_cast<std::size_t>(n)];
  }

  /// Evaluates a word by walking right multiplications from the identity;
  /// nullopt if the walk leaves the ball.
  std::optional<Element> walk(Element from, const Word& w) const {
    Element cur = from;
    for (Letter c : w) {
      cur = step(cur, c);
      if (cur < 0) return std::nullopt;
    }
    return cur;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["family"] = oracle_.label();
    j["radius"] = radius_;
    auto& el = j["elements"] = nlohmann::json::array();
    auto& len = j["length"] = nlohmann::json::array();
    auto& edges = j["edges"] = nlohmann::json::array();
    for (std::size_t i = 0; i < size(); ++i) {
      el.push_back(oracle_.format(words_[i]));
      len.push_back(words_[i].size());
      for (Letter c = 0; c < alphabet().size(); ++c) {
        Element t = step(static_cast<Element>(i), c);
        if (t >= 0) edges.push_back({i, std::string(1, alphabet().name(c)), t});
      }
    }
    return j;
  }

  friend Ball build_ball(const GroupOracle& o, int R, std::size_t cap);

 private:
  explicit Ball(GroupOracle o) : oracle_(std::move(o)) {}

  GroupOracle oracle_;
  int radius_ = 0;
  std::vector<Word> words_;
  std::vector<std::size_t> level_start_;
  std::vector<Element> adj_;
  std::vector<std::vector<std::pair<Letter, Element>>> parents_;
  std::unordered_map<std::string, Element> index_;
};

inline Ball build_ball(const GroupOracle& o, int R, std::size_t cap = element_cap()) {
  if (R < 0) throw std::invalid_argument("ball radius must be >= 0");
  Ball b(o);
  b.radius_ = R;
  const std::size_t k = o.alphabet().size();
  b.words_.push_back({});
  b.index_.emplace(std::string(), 0);
  b.level_start_ = {0, 1};
  for (int n = 0; n < R; ++n) {
    std::size_t lo = b.level_start_[static_cast<std::size_t>(n)];
    std::size_t hi = b.level_start_[static_cast<std::size_t>(n) + 1];
    for (std::size_t i = lo; i < hi; ++i) {
      for (Letter c = 0; c < k; ++c) {
        Word nf = o.normal_form(concat(b.words_[i], Word{c}));
        if (nf.size() != static_cast<std::size_t>(n) + 1) continue;
        std::string key = word_key(nf);
        if (b.index_.count(key)) continue;
        if (b.words_.size() >= cap) throw ResourceLimit("ball exceeded element cap");
        b.index_.emplace(std::move(key), static_cast<Element>(b.words_.size()));
        b.words_.push_back(std::move(nf));
      }
    }
    b.level_start_.push_back(b.words_.size());
  }
  const std::size_t n = b.words_.size();
  b.adj_.assign(n * k, -1);
  b.parents_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (Letter c = 0; c < k; ++c) {
      Word nf = o.normal_form(concat(b.words_[i], Word{c}));
      auto it = b.index_.find(word_key(nf));
      if (it == b.index_.end()) continue;
      b.adj_[i * k + c] = it->second;
      if (nf.size() == b.words_[i].size() + 1)
        b.parents_[static_cast<std::size_t>(it->second)].emplace_back(c, static_cast<Element>(i));
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

/// d(x, y) = |x^-1 y|, required to lie in the ball.
inline int distance(const Ball& b, Element x, Element y) {
  if (x == y) return 0;
  const auto& o = b.oracle();
  Word w = o.normal_form(concat(o.alphabet().invert(b.word(x)), b.word(y)));
  if (w.size() > static_cast<std::size_t>(b.radius()))
    throw OutOfBall("distance query exceeds ball radius");
  return static_cast<int>(w.size());
}

/// Word-metric distance between arbitrary elements given as words; uses the
/// oracle directly (normal forms are geodesic).
inline int word_distance(const GroupOracle& o, const Word& x, const Word& y) {
  return static_cast<int>(o.length(concat(o.alphabet().invert(x), y)));
}

/// Twice the Gromov product (p.q)_base, so the result is an exact integer.
inline int gromov_product2(const Ball& b, Element p, Element q, Element base) {
  return distance(b, p, base) + distance(b, q, base) - distance(b, p, q);
}

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

/// All geodesic words from the identity to e, via backward walks over parents.
inline std::vector<Word> geodesic_words(const Ball& b, Element e, std::size_t cap = 100000) {
  std::vector<Word> out;
  Word suffix;
  std::function<void(Element)> rec = [&](Element cur) {
    if (b.length(cur) == 0) {
      out.emplace_back(suffix.rbegin(), suffix.rend());
      if (out.size() > cap) throw ResourceLimit("geodesic enumeration exceeded cap");
      return;
    }
    for (auto [c, p] : b.parents(cur)) {
      suffix.push_back(c);
      rec(p);
      suffix.pop_back();
    }
  };
  rec(e);
  std::sort(out.begin(), out.end(), shortlex_less);
  return out;
}

/// Geodesic words labelling paths from x to y.
inline std::vector<Word> enumerate_geodesics(const Ball& b, Element x, Element y,
                                             std::size_t cap = 100000) {
  const auto& o = b.oracle();
  Word diff = o.normal_form(concat(o.alphabet().invert(b.word(x)), b.word(y)));
  auto e = b.find_normal(diff);
  if (!e) throw OutOfBall("geodesic endpoints too far apart for the ball");
  return geodesic_words(b, *e, cap);
}

/// Vertices visited by each geodesic from x to y, as normal-form words.
inline std::vector<std::vector<Word>> geodesic_paths(const Ball& b, const Word& x, const Word& y,
                                                     std::size_t cap = 100000) {
  const auto& o = b.oracle();
  Word diff = o.normal_form(concat(o.alphabet().invert(x), y));
  auto e = b.find_normal(diff);
  if (!e) throw OutOfBall("geodesic endpoints too far apart for the ball");
  std::vector<std::vector<Word>> paths;
  for (const Word& g : geodesic_words(b, *e, cap)) {
    std::vector<Word> pts;
    Word cur = x;
    pts.push_back(o.normal_form(cur));
    for (Letter c : g) {
      cur.push_back(c);
      pts.push_back(o.normal_form(cur));
    }
    paths.push_back(std::move(pts));
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Hyperbolicity
// ---------------------------------------------------------------------------

struct DeltaMode {
  bool exhaustive = true;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int workers = 1;

  static DeltaMode exhaustive_scan(int workers = 1) { return {true, 0, 0, workers}; }
  static DeltaMode sampled(std::size_t n, std::uint64_t seed = 0, int workers = 1) {
    return {false, n, seed, workers};
  }
};

/// Lower bounds for delta. Values are doubled (half-integers stored exactly).
struct HyperbolicityProfile {
  int delta_thin2 = 0;
  int delta_four_point2 = 0;
  std::size_t sample_size = 0;
  bool exhaustive = true;
};

namespace detail {

inline int dist_to_path(const GroupOracle& o, const Word& p, const std::vector<Word>& path) {
  int best = std::numeric_limits<int>::max();
  for (const auto& q : path) best = std::min(best, word_distance(o, p, q));
  return best;
}

// Largest distance from a point on some geodesic [u w] to the union of the
// other two sides, maximised over every choice of geodesics.
inline int thin_side(const GroupOracle& o, const std::vector<std::vector<Word>>& side,
                     const std::vector<std::vector<Word>>& other1,
                     const std::vector<std::vector<Word>>& other2) {
  std::set<Word> pts;
  for (const auto& p : side) pts.insert(p.begin(), p.end());
  int eps = 0;
  for (const auto& pt : pts) {
    int d1 = 0, d2 = 0;
    for (const auto& g : other1) d1 = std::max(d1, dist_to_path(o, pt, g));
    for (const auto& g : other2) d2 = std::max(d2, dist_to_path(o, pt, g));
    eps = std::max(eps, std::min(d1, d2));
  }
  return eps;
}

inline int thin_triangle(const Ball& b, const Word& p, const Word& q, const Word& r) {
  const auto& o = b.oracle();
  auto pq = geodesic_paths(b, p, q), qr = geodesic_paths(b, q, r), pr = geodesic_paths(b, p, r);
  int eps = thin_side(o, pr, pq, qr);
  eps = std::max(eps, thin_side(o, pq, pr, qr));
  eps = std::max(eps, thin_side(o, qr, pq, pr));
  return eps;
}

}  // namespace detail

/// Scans triangles and quadruples with one vertex at the identity (the
/// metric is left-invariant) and the others in B(R/2), so every distance
/// needed is at most R.
inline HyperbolicityProfile estimate_delta(const Ball& b, const DeltaMode& mode) {
  if (b.radius() < 2) throw std::invalid_argument("estimate_delta needs radius >= 2");
  const auto& o = b.oracle();
  const std::size_t m = b.count_within(b.radius() / 2);
  HyperbolicityProfile prof;
  prof.exhaustive = mode.exhaustive;

  auto g2 = [&](Element p, Element q) {  // 2 (p.q)_1
    return b.length(p) + b.length(q) - word_distance(o, b.word(p), b.word(q));
  };

  std::vector<std::array<Element, 3>> triples;
  std::vector<std::array<Element, 2>> pairs;
  if (mode.exhaustive) {
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q) {
        pairs.push_back({static_cast<Element>(p), static_cast<Element>(q)});
        for (std::size_t r = 0; r < m; ++r)
          triples.push_back({static_cast<Element>(p), static_cast<Element>(q), static_cast<Element>(r)});
      }
  } else {
    std::mt19937_64 rng(mode.seed);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t i = 0; i < mode.samples; ++i) {
      Element p = static_cast<Element>(pick(rng)), q = static_cast<Element>(pick(rng)),
              r = static_cast<Element>(pick(rng));
      triples.push_back({p, q, r});
      pairs.push_back({p, q});
    }
  }
  prof.sample_size = triples.size();

  std::vector<int> four(triples.size(), 0);
  parallel_for(triples.size(), mode.workers, [&](std::size_t i) {
    auto [p, q, r] = triples[i];
    four[i] = std::min(g2(p, r), g2(q, r)) - g2(p, q);
  });
  for (int v : four) prof.delta_four_point2 = std::max(prof.delta_four_point2, v);

  std::vector<int> thin(pairs.size(), 0);
  parallel_for(pairs.size(), mode.workers, [&](std::size_t i) {
    auto [q, r] = pairs[i];
    thin[i] = detail::thin_triangle(b, Word{}, b.word(q), b.word(r));
  });
  for (int v : thin) prof.delta_thin2 = std::max(prof.delta_thin2, 2 * v);
  return prof;
}

/// Both estimates unchanged when recomputed on B(R-1). False below radius 3.
inline bool delta_stable(const Ball& b, const DeltaMode& mode, const HyperbolicityProfile& at_r) {
  if (b.radius() < 3) return false;
  auto prev = estimate_delta(build_ball(b.oracle(), b.radius() - 1), mode);
  return prev.delta_thin2 == at_r.delta_thin2 && prev.delta_four_point2 == at_r.delta_four_point2;
}

// ---------------------------------------------------------------------------
// Subgroups inside the ball
// ---------------------------------------------------------------------------

struct SubgroupBall {
  int radius = 0;
  std::vector<Word> elements;  // shortlex order
  std::unordered_set<std::string> keys;
  bool exact = false;

  bool contains(const Word& nf) const { return keys.count(word_key(nf)) > 0; }
  std::size_t size() const { return elements.size(); }
};

namespace detail {

inline std::set<Word, decltype(&shortlex_less)> explore_subgroup(const GroupOracle& o,
                                                                 const SubgroupSpec& h, int radius,
                                                                 int enlargement) {
  std::size_t maxgen = 1;
  for (const auto& g : h.generators) maxgen = std::max(maxgen, g.size());
  std::size_t prune = static_cast<std::size_t>(radius) +
                      static_cast<std::size_t>(std::max(0, enlargement - 1)) * maxgen;
  std::size_t max_steps = static_cast<std::size_t>(enlargement) * static_cast<std::size_t>(std::max(radius, 1));
  std::set<Word, decltype(&shortlex_less)> found(&shortlex_less);
  std::unordered_set<std::string> seen{std::string()};
  std::vector<Word> frontier{Word{}};
  found.insert(Word{});
  for (std::size_t step = 0; step < max_steps && !frontier.empty(); ++step) {
    std::vector<Word> next;
    for (const auto& w : frontier) {
      for (const auto& g : h.generators) {
        Word nf = o.multiply(w, g);
        if (nf.size() > prune) continue;
        if (!seen.insert(word_key(nf)).second) continue;
        if (seen.size() > element_cap()) throw ResourceLimit("subgroup enumeration exceeded element cap");
        if (nf.size() <= static_cast<std::size_t>(radius)) found.insert(nf);
        next.push_back(std::move(nf));
      }
    }
    frontier = std::move(next);
  }
  return found;
}

}  // namespace detail

/// H ∩ B(radius) by exploring H-words; exact when the family supplies a
/// membership predicate or when one more unit of enlargement adds nothing.
inline SubgroupBall subgroup_elements(const GroupOracle& o, const SubgroupSpec& h, int radius,
                                      int enlargement = 3) {
  if (enlargement < 1) throw std::invalid_argument("enlargement must be >= 1");
  SubgroupBall out;
  out.radius = radius;
  auto found = detail::explore_subgroup(o, h, radius, enlargement);
  if (h.membership) {
    out.exact = true;
  } else {
    auto more = detail::explore_subgroup(o, h, radius, enlargement + 1);
    out.exact = (more.size() == found.size());
    found = std::move(more);
  }
  out.elements.assign(found.begin(), found.end());
  for (const auto& w : out.elements) out.keys.insert(word_key(w));
  return out;
}

/// H ∩ B(R) for the ball's radius. With an exact membership predicate the
/// ball is filtered directly.
inline SubgroupBall subgroup_ball(const Ball& b, const SubgroupSpec& h, int enlargement = 3) {
  if (h.membership) {
    SubgroupBall out;
    out.radius = b.radius();
    out.exact = true;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Word& w = b.word(static_cast<Element>(i));
      if (h.membership(w)) {
        out.elements.push_back(w);
        out.keys.insert(word_key(w));
      }
    }
    return out;
  }
  return subgroup_elements(b.oracle(), h, b.radius(), enlargement);
}

struct QuasiconvexityEstimate {
  int K = 0;
  std::size_t pairs = 0;
};

/// Largest distance from a point of a geodesic between two elements of
/// H ∩ B(R/2) to H ∩ B(R). A lower bound for the quasiconvexity constant.
inline QuasiconvexityEstimate estimate_quasiconvexity(const Ball& b, const SubgroupBall& hb,
                                                      int workers = 1) {
  if (hb.elements.empty()) throw std::invalid_argument("subgroup ball is empty");
  const auto& o = b.oracle();
  std::vector<Word> inner;
  for (const auto& w : hb.elements)
    if (static_cast<int>(w.size()) <= b.radius() / 2) inner.push_back(w);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < inner.size(); ++i)
    for (std::size_t j = i + 1; j < inner.size(); ++j) pairs.emplace_back(i, j);
  std::vector<int> worst(pairs.size(), 0);
  parallel_for(pairs.size(), workers, [&](std::size_t t) {
    auto [i, j] = pairs[t];
    std::set<Word> pts;
    for (const auto& path : geodesic_paths(b, inner[i], inner[j])) pts.insert(path.begin(), path.end());
    int w = 0;
    for (const auto& p : pts) {
      if (hb.contains(p)) continue;
      int best = std::numeric_limits<int>::max();
      for (const auto& h : hb.elements) best = std::min(best, word_distance(o, p, h));
      w = std::max(w, best);
    }
    worst[t] = w;
  });
  QuasiconvexityEstimate q;
  q.pairs = pairs.size();
  for (int v : worst) q.K = std::max(q.K, v);
  return q;
}

/// Least C such that every g in B(R - C) lies within C of a vertex on a
/// geodesic from 1 to the sphere of radius R.
inline int ray_extension_constant(const Ball& b) {
  if (b.radius() < 2) throw std::invalid_argument("ray_extension_constant needs radius >= 2");
  const std::size_t n = b.size();
  const std::size_t k = b.alphabet().size();
  std::vector<char> on_ray(n, 0);
  std::deque<Element> queue;
  for (std::size_t i = b.count_within(b.radius() - 1); i < n; ++i) {
    on_ray[i] = 1;
    queue.push_back(static_cast<Element>(i));
  }
  while (!queue.empty()) {
    Element e = queue.front();
    queue.pop_front();
    for (auto [c, p] : b.parents(e)) {
      if (!on_ray[static_cast<std::size_t>(p)]) {
        on_ray[static_cast<std::size_t>(p)] = 1;
        queue.push_back(p);
      }
    }
  }
  std::vector<int> dist(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (on_ray[i]) {
      dist[i] = 0;
      queue.push_back(static_cast<Element>(i));
    }
  while (!queue.empty()) {
    Element e = queue.front();
    queue.pop_front();
    for (Letter c = 0; c < k; ++c) {
      Element t = b.step(e, c);
      if (t >= 0 && dist[static_cast<std::size_t>(t)] < 0) {
        dist[static_cast<std::size_t>(t)] = dist[static_cast<std::size_t>(e)] + 1;
        queue.push_back(t);
      }
    }
  }
  for (int C = 0; C <= b.radius(); ++C) {
    bool ok = true;
    for (std::size_t i = 0; i < b.count_within(b.radius() - C) && ok; ++i)
      ok = dist[i] >= 0 && dist[i] <= C;
    if (ok) return C;
  }
  return b.radius();
}

}  // namespace cosetnet
