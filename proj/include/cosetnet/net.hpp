#pragma once

#include <numeric>

#include "cosetnet/cayley.hpp"
#include "cosetnet/cone_lang.hpp"

namespace cosetnet {

struct InsufficientRadius : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// min |gh| over h in H. Needs H exact up to radius 2|g|: any h with
/// |gh| < |g| has |h| < 2|g|.
inline int sigma(const GroupOracle& o, const SubgroupBall& hb, const Word& g) {
  const std::size_t lg = o.length(g);
  if (!hb.exact || static_cast<std::size_t>(hb.radius) < 2 * lg)
    throw InsufficientRadius("sigma: subgroup ball radius below 2|g|");
  std::size_t best = lg;
  for (const Word& h : hb.elements) {
    if (h.size() >= 2 * lg) break;  // elements are shortlex sorted
    best = std::min(best, o.length(concat(g, h)));
  }
  return static_cast<int>(best);
}

/// {g in B(radius) : |g| = sigma(g)}, as ball elements in shortlex order.
inline std::vector<Element> compute_S_bruteforce(const Ball& b, const SubgroupBall& hb, int radius, int workers = 1) {
  if (radius > b.radius()) throw InsufficientRadius("brute-force S radius beyond ball");
  const std::size_t n = b.count_within(radius);
  std::vector<char> in(n, 0);
  parallel_for(n, workers, [&](std::size_t i) {
    const Word& g = b.word(static_cast<Element>(i));
    in[i] = sigma(b.oracle(), hb, g) == static_cast<int>(g.size());
  });
  std::vector<Element> out;
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) out.push_back(static_cast<Element>(i));
  return out;
}

/// Right cosets gH restricted to the ball.
struct CosetTable {
  const Ball* ball = nullptr;
  std::vector<int> coset;                      // per element
  std::vector<std::vector<Element>> members;   // per coset, shortlex order
  std::vector<int> min_length;                 // per coset: sigma of its elements
  std::vector<std::vector<Element>> S;         // per coset: members of minimal length

  std::size_t count() const { return members.size(); }
  int sigma_of(Element e) const { return min_length[static_cast<std::size_t>(coset[static_cast<std::size_t>(e)])]; }
};

/// Union-find over g ~ gh for h in H with |h| <= 2R; complete because two
/// elements of B(R) in one coset differ by such an h. Coset ids follow the
/// shortlex order of their first element.
inline CosetTable build_coset_table(const Ball& b, const SubgroupBall& hb, int workers = 1) {
  if (!hb.exact || hb.radius < 2 * b.radius())
    throw InsufficientRadius("coset table needs an exact subgroup ball of radius 2R");
  const std::size_t n = b.size();
  std::vector<std::vector<Element>> links(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const Word& g = b.word(static_cast<Element>(i));
    for (const Word& h : hb.elements) {
      if (h.empty()) continue;
      if (auto e = b.find(concat(g, h)); e && *e > static_cast<Element>(i)) links[i].push_back(*e);
    }
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (Element j : links[i]) {
      std::size_t a = root(i), c = root(static_cast<std::size_t>(j));
      if (a != c) parent[std::max(a, c)] = std::min(a, c);
    }
  CosetTable t;
  t.ball = &b;
  t.coset.assign(n, -1);
  std::unordered_map<std::size_t, int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = ids.emplace(root(i), static_cast<int>(t.members.size()));
    if (fresh) {
      t.members.emplace_back();
      t.min_length.push_back(b.length(static_cast<Element>(i)));
    }
    t.coset[i] = it->second;
    t.members[static_cast<std::size_t>(it->second)].push_back(static_cast<Element>(i));
  }
  t.S.resize(t.count());
  for (std::size_t c = 0; c < t.count(); ++c)
    for (Element e : t.members[c])
      if (b.length(e) == t.min_length[c]) t.S[c].push_back(e);
  return t;
}

struct Lemma5AReport {
  int max_slack = std::numeric_limits<int>::min();
  int max_S_diameter = 0;
  std::size_t pairs = 0;
  std::vector<int> slack_within;   // max slack over pairs inside B(r)
};

/// Slack d(x1, x2) - (|x1| + |x2| - 2 sigma) over same-coset pairs in
/// B(radius), and the diameter of S in each coset.
inline Lemma5AReport check_lemma_5A(const CosetTable& ct, int radius) {
  const Ball& b = *ct.ball;
  if (radius > b.radius()) throw InsufficientRadius("lemma check radius beyond ball");
  const auto& o = b.oracle();
  Lemma5AReport rep;
  rep.slack_within.assign(static_cast<std::size_t>(radius) + 1, std::numeric_limits<int>::min());
  for (std::size_t c = 0; c < ct.count(); ++c) {
    const auto& m = ct.members[c];
    const int s = ct.min_length[c];
    for (std::size_t i = 0; i < m.size() && b.length(m[i]) <= radius; ++i)
      for (std::size_t j = i; j < m.size() && b.length(m[j]) <= radius; ++j) {
        const Word& x1 = b.word(m[i]);
        const Word& x2 = b.word(m[j]);
        const int d = static_cast<int>(o.length(concat(o.alphabet().invert(x1), x2)));
        const int slack = d - (static_cast<int>(x1.size() + x2.size()) - 2 * s);
        const std::size_t r = std::max(x1.size(), x2.size());
        rep.slack_within[r] = std::max(rep.slack_within[r], slack);
        rep.max_slack = std::max(rep.max_slack, slack);
        ++rep.pairs;
        if (static_cast<int>(x1.size()) == s && static_cast<int>(x2.size()) == s)
          rep.max_S_diameter = std::max(rep.max_S_diameter, d);
      }
  }
  for (std::size_t r = 1; r < rep.slack_within.size(); ++r)
    rep.slack_within[r] = std::max(rep.slack_within[r], rep.slack_within[r - 1]);
  return rep;
}

/// One element of S per coset: shortlex-least (or shortlex-greatest for the
/// worst-case comparison).
inline std::vector<Element> build_section(const CosetTable& ct, bool greatest = false) {
  std::vector<Element> s(ct.count());
  for (std::size_t c = 0; c < ct.count(); ++c) {
    if (ct.S[c].empty()) throw InsufficientRadius("coset without an S element in the ball");
    s[c] = greatest ? ct.S[c].back() : ct.S[c].front();
  }
  return s;
}

/// max over g in B(r - margin) of the distance to the section image inside
/// B(r), by multi-source BFS in the ball. Exact whenever the result is at
/// most `margin`.
inline int net_defect(const Ball& b, const std::vector<char>& image, int margin, int r) {
  if (r > b.radius()) throw InsufficientRadius("defect radius beyond ball");
  const std::size_t n = b.count_within(r);
  std::vector<int> dist(n, -1);
  std::deque<Element> q;
  for (std::size_t i = 0; i < n; ++i)
    if (image[i]) {
      dist[i] = 0;
      q.push_back(static_cast<Element>(i));
    }
  const std::size_t k = b.alphabet().size();
  while (!q.empty()) {
    Element e = q.front();
    q.pop_front();
    for (Letter c = 0; c < k; ++c) {
      Element f = b.step(e, c);
      if (f < 0 || static_cast<std::size_t>(f) >= n || dist[static_cast<std::size_t>(f)] >= 0) continue;
      dist[static_cast<std::size_t>(f)] = dist[static_cast<std::size_t>(e)] + 1;
      q.push_back(f);
    }
  }
  int worst = 0;
  for (std::size_t i = 0; i < b.count_within(std::max(0, r - margin)); ++i) worst = std::max(worst, dist[i]);
  return worst;
}

inline std::vector<char> section_image(const Ball& b, const std::vector<Element>& s, int r) {
  std::vector<char> img(b.size(), 0);
  for (Element e : s)
    if (b.length(e) <= r) img[static_cast<std::size_t>(e)] = 1;
  return img;
}

struct ActionReport {
  int max_displacement = 0;   // over all g and cosets
  int max_excess = std::numeric_limits<int>::min();  // displacement - (C1 + 2|g|)
  std::size_t cosets_checked = 0;
};

/// d(s(g xH), g s(xH)) over g in B(glen) and cosets whose section point x
/// has |x| <= R - |g|, so g x stays in the ball.
inline ActionReport action_displacement(const CosetTable& ct, const std::vector<Element>& s, int glen, int C1) {
  const Ball& b = *ct.ball;
  const auto& o = b.oracle();
  ActionReport rep;
  for (std::size_t gi = 0; gi < b.count_within(glen); ++gi) {
    const Word& g = b.word(static_cast<Element>(gi));
    const int lg = static_cast<int>(g.size());
    for (std::size_t c = 0; c < ct.count(); ++c) {
      const Word& x = b.word(s[c]);
      if (static_cast<int>(x.size()) > b.radius() - lg) continue;
      Element gx = b.at(concat(g, x));
      const Word& sgx = b.word(s[static_cast<std::size_t>(ct.coset[static_cast<std::size_t>(gx)])]);
      const int d = static_cast<int>(o.length(concat(o.alphabet().invert(sgx), b.word(gx))));
      rep.max_displacement = std::max(rep.max_displacement, d);
      rep.max_excess = std::max(rep.max_excess, d - (C1 + 2 * lg));
      ++rep.cosets_checked;
    }
  }
  return rep;
}

struct Crosscheck {
  bool agree = true;
  std::string witness;       // shortlex-least element in the symmetric difference
  std::string witness_side;  // "automaton" or "bruteforce": the side containing it
};

/// Compares {x : x accepted, |x| <= radius} with brute-force S as element sets.
inline Crosscheck oracle_crosscheck(const Automaton& s_lang, const std::vector<Element>& brute, const Ball& b,
                                    int radius) {
  std::set<Element> from_auto;
  for (const Word& w : enumerate_words(s_lang, radius)) from_auto.insert(b.at(w));
  std::set<Element> want(brute.begin(), brute.end());
  for (auto it = want.begin(); it != want.end();) {
    if (b.length(*it) > radius) it = want.erase(it);
    else ++it;
  }
  Crosscheck out;
  std::optional<Element> first;
  std::string side;
  for (Element e : from_auto)
    if (!want.count(e)) {
      first = e;
      side = "automaton";
      break;
    }
  for (Element e : want)
    if (!from_auto.count(e)) {
      if (!first || e < *first) {
        first = e;
        side = "bruteforce";
      }
      break;
    }
  if (first) {
    out.agree = false;
    out.witness = b.oracle().format(b.word(*first));
    out.witness_side = side;
  }
  return out;
}

/// Section property: s(c)^-1 g in H for every member g of coset c.
inline bool section_property_holds(const CosetTable& ct, const std::vector<Element>& s,
                                   const std::function<bool(const Word&)>& in_h) {
  const Ball& b = *ct.ball;
  const auto& o = b.oracle();
  for (std::size_t c = 0; c < ct.count(); ++c) {
    const Word inv = o.alphabet().invert(b.word(s[c]));
    for (Element g : ct.members[c])
      if (!in_h(o.normal_form(concat(inv, b.word(g))))) return false;
  }
  return true;
}

struct RadiusRow {
  int R = 0;
  std::size_t coset_count = 0;
  std::size_t S_size = 0;
  int defect = 0;
  int lemma5A_max_slack = 0;
};

/// Per-radius table for r in [1, R]: cosets meeting B(r), |S ∩ B(r)|, the
/// defect of the section restricted to B(r), and the same-coset slack.
inline std::vector<RadiusRow> radius_table(const CosetTable& ct, const std::vector<Element>& s, int margin,
                                           const Lemma5AReport& lemma) {
  const Ball& b = *ct.ball;
  std::vector<RadiusRow> rows;
  for (int r = 1; r <= b.radius(); ++r) {
    RadiusRow row;
    row.R = r;
    for (std::size_t c = 0; c < ct.count(); ++c) {
      if (ct.min_length[c] <= r) ++row.coset_count;
      for (Element e : ct.S[c])
        if (b.length(e) <= r) ++row.S_size;
    }
    row.defect = net_defect(b, section_image(b, s, r), std::min(margin, r), r);
    const auto& sw = lemma.slack_within;
    row.lemma5A_max_slack = sw.empty() ? 0 : sw[static_cast<std::size_t>(std::min<int>(r, static_cast<int>(sw.size()) - 1))];
    rows.push_back(row);
  }
  return rows;
}

inline std::string radius_csv(const std::vector<RadiusRow>& rows) {
  std::ostringstream os;
  os << "R,coset_count,S_size,defect,lemma5A_max_slack\n";
  for (const auto& r : rows)
    os << r.R << ',' << r.coset_count << ',' << r.S_size << ',' << r.defect << ',' << r.lemma5A_max_slack << '\n';
  return os.str();
}

}  // namespace cosetnet
