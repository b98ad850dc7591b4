#pragma once

#include <array>
#include <map>

#include "cosetnet/automata.hpp"
#include "cosetnet/cayley.hpp"

namespace cosetnet {

struct ConeTypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DifferenceBoundExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QuasiconvexityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Cone types
// ---------------------------------------------------------------------------

inline constexpr int kNotExtending = -1;
inline constexpr int kUnobserved = -2;

/// Partition of B(R - k) by signature. For a single letter y the entry is
/// |xy| - |x|; for longer y in B(k) it records whether xy continues a
/// geodesic (|xy| = |x| + |y|). The full difference |xy| - |x| for longer y
/// also sees how far back y cancels into x, which splits genuine cone types
/// (free(2) would get 17 classes at k = 2 instead of 5).
struct ConeTypeTable {
  const Ball* ball = nullptr;
  int k = 0;
  int region = 0;                               // R - k
  std::vector<int> cls;                         // per element of B(region), -1 outside
  std::vector<Element> representative;          // first member in shortlex order
  std::vector<std::vector<int>> signature;      // per class, indexed by element of B(k)
  std::vector<std::vector<int>> successor;      // class x letter
  std::vector<std::size_t> classes_within;      // distinct classes met in B(r), r <= region

  std::size_t num_classes() const { return representative.size(); }
  int class_of(Element e) const { return cls.at(static_cast<std::size_t>(e)); }

  /// |xc| - |x| for any x in the class, c a single letter.
  int letter_step(int c, Letter letter) const {
    Element e = ball->step(0, letter);
    return signature.at(static_cast<std::size_t>(c)).at(static_cast<std::size_t>(e));
  }
};

inline ConeTypeTable compute_cone_types(const Ball& b, int k, int workers = 1) {
  if (k < 1) throw std::invalid_argument("cone types: k must be >= 1");
  if (k > b.radius() - 1) throw std::invalid_argument("cone types: k too large for ball");
  ConeTypeTable t;
  t.ball = &b;
  t.k = k;
  t.region = b.radius() - k;
  const std::size_t inner = b.count_within(t.region);
  const std::size_t ys = b.count_within(k);
  std::vector<std::vector<int>> sig(inner, std::vector<int>(ys));
  parallel_for(inner, workers, [&](std::size_t i) {
    const int lx = b.length(static_cast<Element>(i));
    for (std::size_t y = 0; y < ys; ++y) {
      auto xy = b.walk(static_cast<Element>(i), b.word(static_cast<Element>(y)));
      const int ly = b.length(static_cast<Element>(y));
      const int step = b.length(*xy) - lx;
      sig[i][y] = ly <= 1 ? step : (step == ly ? 1 : 0);
    }
  });
  std::map<std::vector<int>, int> ids;
  t.cls.assign(b.size(), -1);
  std::size_t next_len = 0;
  for (std::size_t i = 0; i < inner; ++i) {
    while (static_cast<int>(next_len) < b.length(static_cast<Element>(i))) {
      t.classes_within.push_back(ids.size());
      ++next_len;
    }
    auto it = ids.find(sig[i]);
    if (it == ids.end()) {
      it = ids.emplace(sig[i], static_cast<int>(t.representative.size())).first;
      t.representative.push_back(static_cast<Element>(i));
      t.signature.push_back(sig[i]);
    }
    t.cls[i] = it->second;
  }
  while (static_cast<int>(t.classes_within.size()) <= t.region) t.classes_within.push_back(ids.size());

  const std::size_t n = b.alphabet().size();
  t.successor.assign(t.num_classes(), std::vector<int>(n, kUnobserved));
  for (std::size_t c = 0; c < t.num_classes(); ++c)
    for (Letter u = 0; u < n; ++u)
      if (t.letter_step(static_cast<int>(c), u) != 1) t.successor[c][u] = kNotExtending;
  for (std::size_t i = 0; i < inner; ++i) {
    if (b.length(static_cast<Element>(i)) >= t.region) break;
    const int c = t.cls[i];
    for (Letter u = 0; u < n; ++u) {
      if (t.successor[static_cast<std::size_t>(c)][u] == kNotExtending) continue;
      Element xu = b.step(static_cast<Element>(i), u);
      const int d = t.cls.at(static_cast<std::size_t>(xu));
      int& slot = t.successor[static_cast<std::size_t>(c)][u];
      if (slot == kUnobserved) {
        slot = d;
      } else if (slot != d) {
        throw ConeTypeError("successor map inconsistent; signature radius k too small");
      }
    }
  }
  return t;
}

/// Default signature radius 2 delta + 2, from the doubled thin-triangle
/// estimate.
inline int default_cone_radius(const HyperbolicityProfile& p) {
  return 2 * ((p.delta_thin2 + 1) / 2) + 2;
}

/// One state per cone type plus a rejecting sink. Transitions follow
/// geodesic extensions only.
inline Automaton geodesic_acceptor(const ConeTypeTable& t) {
  const Alphabet& al = t.ball->alphabet();
  Automaton a(TapeAlphabet{al, 1});
  for (std::size_t c = 0; c < t.num_classes(); ++c) a.add_state(true);
  const int reject = a.add_state(false);
  a.add_start(t.class_of(0));
  // only classes reachable from the identity need known successors
  std::vector<char> seen(t.num_classes(), 0);
  std::vector<int> stack{t.class_of(0)};
  seen[static_cast<std::size_t>(t.class_of(0))] = 1;
  while (!stack.empty()) {
    int c = stack.back();
    stack.pop_back();
    for (Letter u = 0; u < al.size(); ++u) {
      int d = t.successor[static_cast<std::size_t>(c)][u];
      if (d == kUnobserved) throw ConeTypeError("cone type successor unobserved; ball too small for k");
      if (d == kNotExtending) {
        a.add_transition(c, u, reject);
        continue;
      }
      a.add_transition(c, u, d);
      if (!seen[static_cast<std::size_t>(d)]) {
        seen[static_cast<std::size_t>(d)] = 1;
        stack.push_back(d);
      }
    }
  }
  for (Letter u = 0; u < al.size(); ++u) a.add_transition(reject, u, reject);
  a.normalize();
  return a;
}

/// Number of geodesic words of each length in the ball.
inline std::vector<std::uint64_t> geodesic_word_counts(const Ball& b) {
  std::vector<std::uint64_t> per(b.size(), 0), out(static_cast<std::size_t>(b.radius()) + 1, 0);
  per[0] = 1;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (const auto& [c, p] : b.parents(static_cast<Element>(i))) per[i] += per[static_cast<std::size_t>(p)];
    out[static_cast<std::size_t>(b.length(static_cast<Element>(i)))] += per[i];
  }
  return out;
}

/// Accepted words up to length `maxlen` are exactly the geodesic words:
/// counts agree per length and every accepted word is geodesic.
inline std::optional<std::string> validate_acceptor(const Ball& b, const Automaton& lambda, int maxlen) {
  if (maxlen > b.radius()) throw std::invalid_argument("validate_acceptor: length beyond ball");
  auto want = geodesic_word_counts(b);
  auto got = count_by_length(lambda, maxlen);
  for (int n = 0; n <= maxlen; ++n)
    if (want[static_cast<std::size_t>(n)] != got[static_cast<std::size_t>(n)])
      return "geodesic count mismatch at length " + std::to_string(n) + ": acceptor " +
             std::to_string(got[static_cast<std::size_t>(n)]) + ", ball " +
             std::to_string(want[static_cast<std::size_t>(n)]);
  for (const Word& w : enumerate_words(lambda, std::min(maxlen, 6)))
    if (b.oracle().length(w) != w.size()) return "accepted non-geodesic word " + b.oracle().format(w);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Word differences
// ---------------------------------------------------------------------------

/// Synchronous 2-tape automaton accepting {(u, v) in Lambda^2 : u x = v}.
/// States are differences u_t^-1 v_t of length <= D.
inline Automaton build_word_difference_machine(const Ball& b, const Automaton& lambda, int D, const Word& x) {
  if (2 * D > b.radius()) throw std::invalid_argument("difference bound exceeds half the ball radius");
  const auto& o = b.oracle();
  const Alphabet& al = o.alphabet();
  TapeAlphabet ta{al, 2};
  const std::size_t states = b.count_within(D);
  const Element target = b.at(x);
  if (b.length(target) > D) throw DifferenceBoundExceeded("multiplier longer than the difference bound");
  Automaton m(ta);
  for (std::size_t s = 0; s < states; ++s) m.add_state(static_cast<Element>(s) == target);
  m.add_start(0);
  const int pad = ta.pad();
  for (std::size_t s = 0; s < states; ++s)
    for (int a = 0; a <= pad; ++a)
      for (int c = 0; c <= pad; ++c) {
        if (a == pad && c == pad) continue;
        Word w;
        if (a != pad) w.push_back(al.inverse(static_cast<Letter>(a)));
        const Word& d = b.word(static_cast<Element>(s));
        w.insert(w.end(), d.begin(), d.end());
        if (c != pad) w.push_back(static_cast<Letter>(c));
        auto e = b.find(w);
        if (!e || b.length(*e) > D) continue;
        m.add_transition(static_cast<int>(s), encode_symbol(ta, {a, c}), *e);
      }
  m.normalize();
  return combine(m, pad_join(lambda, lambda), BoolOp::Intersect);
}

/// Checks that every pair (u, v) of geodesic words with |u| <= maxlen and
/// u x = v is accepted. Throws when the bound D was too small.
inline void validate_multiplier(const Ball& b, const Automaton& m, const Word& x, int maxlen) {
  const auto& o = b.oracle();
  const TapeAlphabet& ta = m.tape_alphabet();
  for (std::size_t i = 0; i < b.count_within(maxlen); ++i) {
    auto gx = b.find(concat(b.word(static_cast<Element>(i)), x));
    if (!gx) continue;
    auto us = geodesic_words(b, static_cast<Element>(i));
    auto vs = geodesic_words(b, *gx);
    for (const auto& u : us)
      for (const auto& v : vs)
        if (!run_columns(m, sync_columns(ta, {u, v})))
          throw DifferenceBoundExceeded("word difference bound too small: rejects (" + o.format(u) + ", " +
                                        o.format(v) + ")");
  }
}

/// Builds and validates M_x, doubling D on failure up to R/2.
inline std::pair<Automaton, int> build_multiplier(const Ball& b, const Automaton& lambda, const Word& x, int D0,
                                                  int check_len) {
  int D = std::max(1, D0);
  const int cap = b.radius() / 2;
  D = std::min(D, cap);
  for (;;) {
    try {
      Automaton m = build_word_difference_machine(b, lambda, D, x);
      validate_multiplier(b, m, x, check_len);
      return {std::move(m), D};
    } catch (const DifferenceBoundExceeded&) {
      if (D >= cap) throw;
      D = std::min(2 * D, cap);
    }
  }
}

// ---------------------------------------------------------------------------
// The regular-language pipeline
// ---------------------------------------------------------------------------

struct PipelineOptions {
  int D = -1;              // initial difference bound; -1 = 4 delta + 2
  int check_len = -1;      // brute-force validation length; -1 = min(R - k, 5)
  std::size_t budget = kDefaultStateBudget;
};

/// Holds the geodesic acceptor and the derived multi-tape languages. L_n
/// languages use the sequential schedule (x read first, then y).
class ConePipeline {
 public:
  ConePipeline(const Ball& b, ConeTypeTable table, int delta_thin2, PipelineOptions opt = {})
      : ball_(&b), table_(std::move(table)), opt_(opt) {
    lambda_raw_ = geodesic_acceptor(table_);
    lambda_ = minimize(lambda_raw_);
    if (opt_.D < 0) opt_.D = 2 * delta_thin2 + 2;
    if (opt_.check_len < 0) opt_.check_len = std::min(table_.region, 5);
    if (auto err = validate_acceptor(b, lambda_, table_.region)) throw ConeTypeError(*err);
  }

  const Ball& ball() const { return *ball_; }
  const Alphabet& alphabet() const { return ball_->alphabet(); }
  const ConeTypeTable& table() const { return table_; }
  const Automaton& lambda() const { return lambda_; }
  const Automaton& lambda_unminimized() const { return lambda_raw_; }
  int difference_bound() const { return D_used_; }
  const PipelineOptions& options() const { return opt_; }

  /// M_x for |x| <= 1 (x given as a word of length 0 or 1).
  const Automaton& multiplier(const Word& x) {
    auto key = word_key(x);
    auto it = mult_.find(key);
    if (it != mult_.end()) return it->second;
    auto [m, D] = build_multiplier(*ball_, lambda_, x, opt_.D, opt_.check_len);
    D_used_ = std::max(D_used_, D);
    return mult_.emplace(key, std::move(m)).first->second;
  }

  /// P_0(c), P_1(c), P_2(c) from the cone-type signature.
  const std::array<Automaton, 3>& P(Letter c) {
    auto it = P_.find(c);
    if (it != P_.end()) return it->second;
    std::array<Automaton, 3> out;
    for (int i = 0; i < 3; ++i) {
      Automaton a = lambda_raw_;
      for (std::size_t s = 0; s < table_.num_classes(); ++s)
        a.set_accept(static_cast<int>(s), 1 - table_.letter_step(static_cast<int>(s), c) == i);
      out[static_cast<std::size_t>(i)] = minimize(a);
    }
    return P_.emplace(c, std::move(out)).first->second;
  }

  /// P_2(c) through the multiplier: x with some y in P_0(c^-1), y = xc.
  Automaton P2_via_multiplier(Letter c) {
    const Automaton& m = multiplier(Word{c});
    const Automaton& p0 = P(alphabet().inverse(c))[0];
    Automaton j = join(alphabet(), 2, {{&m, {0, 1}}, {&p0, {1}}}, opt_.budget);
    return determinize_minimize(project(j, {0}), opt_.budget);
  }

  /// Raw R machine on (x, y, z, w): x and z are read together, then y
  /// extends z while it stays geodesic, then y and w are read together.
  Automaton R_raw() const {
    const Alphabet& al = alphabet();
    TapeAlphabet ta{al, 4};
    const int pad = ta.pad();
    const std::size_t nc = table_.num_classes();
    Automaton a(ta);
    // x-phase states [0, nc), y-phase states [nc, 2nc), rest state 2nc
    for (std::size_t s = 0; s < 2 * nc + 1; ++s) a.add_state(true);
    const int rest = static_cast<int>(2 * nc);
    a.add_start(table_.class_of(0));
    for (std::size_t c = 0; c < nc; ++c)
      for (Letter u = 0; u < al.size(); ++u) {
        const int d = table_.successor[c][u];
        if (d >= 0) {
          a.add_transition(static_cast<int>(c), encode_symbol(ta, {u, pad, u, pad}), d);
          a.add_transition(static_cast<int>(c), encode_symbol(ta, {pad, u, u, pad}), d + static_cast<int>(nc));
          a.add_transition(static_cast<int>(c + nc), encode_symbol(ta, {pad, u, u, pad}), d + static_cast<int>(nc));
        } else if (d == kNotExtending) {
          a.add_transition(static_cast<int>(c), encode_symbol(ta, {pad, u, pad, u}), rest);
          a.add_transition(static_cast<int>(c + nc), encode_symbol(ta, {pad, u, pad, u}), rest);
        }
      }
    for (Letter u = 0; u < al.size(); ++u) a.add_transition(rest, encode_symbol(ta, {pad, u, pad, u}), rest);
    a.normalize();
    return trim(a);
  }

  /// R: quadruples (x, y, z, w) with y geodesic, z = x y_1..y_i for the
  /// largest geodesic i, and w the rest of y.
  const Automaton& R() {
    if (!R_) {
      Automaton raw = R_raw();
      R_ = determinize_minimize(join(alphabet(), 4, {{&raw, {0, 1, 2, 3}}, {&lambda_, {1}}}, opt_.budget),
                                opt_.budget);
    }
    return *R_;
  }

  /// R restricted to w starting with c.
  Automaton R_c(Letter c) {
    const Automaton& r = R();
    Automaton first = first_letter(c);
    return determinize_minimize(join(alphabet(), 4, {{&r, {0, 1, 2, 3}}, {&first, {3}}}, opt_.budget),
                                opt_.budget);
  }

  /// R'_c: sextuples (x, y, z, w, z', w') with (x, y, z, w) in R_c,
  /// z' = zc in the group and w' = w_2..w_n.
  const Automaton& R_prime(Letter c) {
    auto it = Rp_.find(c);
    if (it != Rp_.end()) return it->second;
    const Automaton& r = R();
    const Automaton& m = multiplier(Word{c});
    Automaton sh = shift(c);
    Automaton j = join(alphabet(), 6, {{&r, {0, 1, 2, 3}}, {&sh, {3, 5}}, {&m, {2, 4}}}, opt_.budget);
    return Rp_.emplace(c, determinize_minimize(j, opt_.budget)).first->second;
  }

  /// L_n = {(x, y) in Lambda^2 : <x, y> = n}.
  const Automaton& L(int n) {
    if (n < 0) throw std::invalid_argument("L_n: n must be >= 0");
    while (static_cast<int>(L_.size()) <= n) {
      const int m = static_cast<int>(L_.size());
      if (m == 0) {
        L_.push_back(combine(split_tape(lambda_), sequential_join(lambda_, lambda_), BoolOp::Intersect,
                             opt_.budget));
        continue;
      }
      Automaton acc = empty_automaton(TapeAlphabet{alphabet(), 2});
      for (Letter c = 0; c < alphabet().size(); ++c) {
        for (int i = 1; i <= 2 && i <= m; ++i) {
          const Automaton& p = P(c)[static_cast<std::size_t>(i)];
          if (is_empty(p)) continue;
          const Automaton& rp = R_prime(c);
          const Automaton& prev = L_[static_cast<std::size_t>(m - i)];
          Automaton j = join(alphabet(), 6, {{&rp, {0, 1, 2, 3, 4, 5}}, {&p, {2}}, {&prev, {4, 5}}}, opt_.budget);
          Automaton part = determinize_minimize(project(j, {0, 1}), opt_.budget);
          acc = combine(acc, part, BoolOp::Union, opt_.budget);
        }
      }
      L_.push_back(std::move(acc));
    }
    return L_[static_cast<std::size_t>(n)];
  }

  /// {(x, y) in Lambda^2 : <x, y> <= n}.
  const Automaton& L_upto(int n) {
    while (static_cast<int>(Lle_.size()) <= n) {
      const int m = static_cast<int>(Lle_.size());
      if (m == 0) {
        Lle_.push_back(L(0));
      } else {
        Lle_.push_back(combine(Lle_.back(), L(m), BoolOp::Union, opt_.budget));
      }
    }
    return Lle_[static_cast<std::size_t>(n)];
  }

 private:
  Automaton first_letter(Letter c) const {
    Automaton a(TapeAlphabet{alphabet(), 1});
    a.add_start(a.add_state(false));
    a.add_state(true);
    a.add_transition(0, c, 1);
    for (Letter u = 0; u < alphabet().size(); ++u) a.add_transition(1, u, 1);
    a.normalize();
    return a;
  }

  /// (w, w') with w = c w': (c, $) then (u, u)*.
  Automaton shift(Letter c) const {
    TapeAlphabet ta{alphabet(), 2};
    Automaton a(ta);
    a.add_start(a.add_state(false));
    a.add_state(true);
    a.add_transition(0, encode_symbol(ta, {c, ta.pad()}), 1);
    for (Letter u = 0; u < alphabet().size(); ++u) a.add_transition(1, encode_symbol(ta, {u, u}), 1);
    a.normalize();
    return a;
  }

  const Ball* ball_;
  ConeTypeTable table_;
  PipelineOptions opt_;
  Automaton lambda_raw_, lambda_;
  int D_used_ = 0;
  std::map<std::string, Automaton> mult_;
  std::map<Letter, std::array<Automaton, 3>> P_;
  std::optional<Automaton> R_;
  std::map<Letter, Automaton> Rp_;
  std::vector<Automaton> L_, Lle_;
};

// ---------------------------------------------------------------------------
// Subgroup geodesics and the S-language
// ---------------------------------------------------------------------------

/// Tracks right cosets H u with u in B(K) while reading a word; accepts when
/// the coset is H. Intersected with Lambda this is {y in Lambda : y in H},
/// exact when H is K-quasiconvex.
inline Automaton coset_tracker(const Ball& b, const std::function<bool(const Word&)>& in_h, int K) {
  if (2 * K + 1 > b.radius()) throw std::invalid_argument("coset tracker: K too large for ball");
  const auto& o = b.oracle();
  const std::size_t n = b.count_within(K);
  std::vector<int> rep(n, -1);
  std::vector<int> state_of(n, -1);
  Automaton a(TapeAlphabet{o.alphabet(), 1});
  std::vector<Element> reps;
  for (std::size_t u = 0; u < n; ++u) {
    if (rep[u] >= 0) continue;
    rep[u] = static_cast<int>(reps.size());
    for (std::size_t v = u + 1; v < n; ++v)
      if (rep[v] < 0 && in_h(o.normal_form(concat(b.word(static_cast<Element>(u)), o.alphabet().invert(b.word(static_cast<Element>(v)))))))
        rep[v] = static_cast<int>(reps.size());
    reps.push_back(static_cast<Element>(u));
    a.add_state(u == 0);
  }
  a.add_start(0);
  for (std::size_t s = 0; s < reps.size(); ++s)
    for (Letter c = 0; c < o.alphabet().size(); ++c) {
      Word uc = concat(b.word(reps[s]), Word{c});
      for (std::size_t v = 0; v < n; ++v)
        if (in_h(o.normal_form(concat(uc, o.alphabet().invert(b.word(static_cast<Element>(v))))))) {
          a.add_transition(static_cast<int>(s), c, rep[v]);
          break;
        }
    }
  a.normalize();
  return a;
}

/// Brute-force geodesic words of H-elements per length in the ball.
inline std::vector<std::uint64_t> subgroup_geodesic_counts(const Ball& b, const std::function<bool(const Word&)>& in_h,
                                                           int maxlen) {
  std::vector<std::uint64_t> per(b.size(), 0), out(static_cast<std::size_t>(maxlen) + 1, 0);
  per[0] = 1;
  for (std::size_t i = 0; i < b.count_within(maxlen); ++i) {
    for (const auto& [c, p] : b.parents(static_cast<Element>(i))) per[i] += per[static_cast<std::size_t>(p)];
    if (in_h(b.word(static_cast<Element>(i)))) out[static_cast<std::size_t>(b.length(static_cast<Element>(i)))] += per[i];
  }
  return out;
}

struct SubgroupLanguage {
  Automaton automaton;
  int K = 0;  // tracker radius actually used
};

/// Lambda_H = {y in Lambda : y in H}. Starts from K0 and grows the tracker
/// radius until the in-ball count of H-geodesics matches.
inline SubgroupLanguage subgroup_geodesics(const Ball& b, const Automaton& lambda,
                                           const std::function<bool(const Word&)>& in_h, int K0, int check_len) {
  auto want = subgroup_geodesic_counts(b, in_h, check_len);
  for (int K = std::max(0, K0); 2 * K + 1 <= b.radius(); ++K) {
    Automaton a = combine(coset_tracker(b, in_h, K), lambda, BoolOp::Intersect);
    if (count_by_length(a, check_len) == want) return {std::move(a), K};
  }
  throw QuasiconvexityError("subgroup geodesics not captured within the ball; quasiconvexity constant too large");
}

/// Membership predicate for H on normal forms: the family predicate when
/// present, otherwise a subgroup ball that must be exact.
inline std::function<bool(const Word&)> membership_for(const GroupOracle& o, const SubgroupSpec& h, int radius) {
  if (h.membership) return h.membership;
  auto hb = std::make_shared<SubgroupBall>(subgroup_elements(o, h, radius));
  if (!hb->exact) throw QuasiconvexityError("subgroup ball not certified exact at radius " + std::to_string(radius));
  return [hb, radius](const Word& w) {
    if (static_cast<int>(w.size()) > radius) throw std::out_of_range("membership query beyond certified subgroup radius");
    return hb->contains(w);
  };
}

struct SLanguage {
  Automaton S;            // corrected form
  Automaton good;         // {x : <x, y> <= C1 for all y in Lambda_H}
  Automaton union_form;   // diagnostic: good intersected with the union over r
};

/// 1-tape automaton for all words of length <= n.
inline Automaton words_upto(const Alphabet& al, int n) {
  Automaton a(TapeAlphabet{al, 1});
  for (int i = 0; i <= n; ++i) a.add_state(true);
  a.add_start(0);
  for (int i = 0; i < n; ++i)
    for (Letter c = 0; c < al.size(); ++c) a.add_transition(i, c, i + 1);
  a.normalize();
  return a;
}

/// {x in Lambda : <x, y> <= bound for all y in Lambda_H with |y| <= ylen},
/// by complementing the projection of the violating pairs.
inline Automaton bounded_constraint(ConePipeline& p, const Automaton& lambda_h, int ylen, int bound) {
  const auto budget = p.options().budget;
  Automaton ys = combine(lambda_h, words_upto(p.alphabet(), ylen), BoolOp::Intersect, budget);
  Automaton pairs = sequential_join(p.lambda(), ys);
  Automaton bad = combine(pairs, p.L_upto(bound), BoolOp::Difference, budget);
  return combine(p.lambda(), determinize_minimize(project(bad, {0}), budget), BoolOp::Difference, budget);
}

/// S = {x in Lambda : <x, y> <= min(|y|, C1) for all y in Lambda_H}, as
///   {x : for all y, <x, y> <= C1}  intersected with
///   {x : for all y with |y| <= C1, <x, y> <= |y|}.
/// The second factor is the union over n <= C1 of violating pairs with
/// <x, y> = n and |y| < n, projected and complemented.
inline SLanguage build_S_language(ConePipeline& p, const Automaton& lambda_h, int C1, bool diagnostic = false) {
  if (C1 < 0) throw std::invalid_argument("C1 must be >= 0");
  const auto budget = p.options().budget;
  const Automaton& lambda = p.lambda();
  SLanguage out;
  {
    Automaton universe = sequential_join(lambda, lambda_h);
    Automaton bad = combine(universe, p.L_upto(C1), BoolOp::Difference, budget);
    out.good = combine(lambda, determinize_minimize(project(bad, {0}), budget), BoolOp::Difference, budget);
  }
  Automaton violating = empty_automaton(TapeAlphabet{p.alphabet(), 2});
  for (int n = 1; n <= C1; ++n) {
    Automaton ys = combine(lambda_h, words_upto(p.alphabet(), n - 1), BoolOp::Intersect, budget);
    Automaton pairs = combine(sequential_join(lambda, ys), p.L(n), BoolOp::Intersect, budget);
    violating = combine(violating, pairs, BoolOp::Union, budget);
  }
  Automaton short_ok =
      combine(lambda, determinize_minimize(project(violating, {0}), budget), BoolOp::Difference, budget);
  out.S = combine(out.good, short_ok, BoolOp::Intersect, budget);
  if (diagnostic) {
    Automaton uni = empty_automaton(TapeAlphabet{p.alphabet(), 1});
    for (int r = 0; r <= C1; ++r) uni = combine(uni, bounded_constraint(p, lambda_h, r, r), BoolOp::Union, budget);
    out.union_form = combine(out.good, uni, BoolOp::Intersect, budget);
  }
  return out;
}

/// Literal form of the short-word factor: one fixed-tape language per
/// subgroup geodesic y with |y| <= C1. Used to cross-check the bulk form.
inline Automaton short_word_factor_literal(ConePipeline& p, const Automaton& lambda_h, int C1) {
  Automaton out = p.lambda();
  for (const Word& y : enumerate_words(lambda_h, C1))
    out = combine(out, fix_tape(p.L_upto(static_cast<int>(y.size())), 1, y), BoolOp::Intersect, p.options().budget);
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force references
// ---------------------------------------------------------------------------

/// Twice-free Gromov-type quantity <x, y> = |x| + |y| - |xy|.
inline int inner_product(const GroupOracle& o, const Word& x, const Word& y) {
  return static_cast<int>(o.length(x) + o.length(y) - o.length(concat(x, y)));
}

/// All geodesic words of length <= maxlen, shortlex order.
inline std::vector<Word> geodesic_words_upto(const Ball& b, int maxlen) {
  std::vector<Word> out;
  for (std::size_t i = 0; i < b.count_within(maxlen); ++i)
    for (auto& w : geodesic_words(b, static_cast<Element>(i))) out.push_back(std::move(w));
  std::sort(out.begin(), out.end(), shortlex_less);
  return out;
}

/// Reference R tuples for geodesic x, y with |x| + |y| <= maxlen.
inline std::set<Tuple> brute_R(const Ball& b, int maxlen) {
  const auto& o = b.oracle();
  auto words = geodesic_words_upto(b, maxlen);
  std::set<Tuple> out;
  for (const Word& x : words)
    for (const Word& y : words) {
      if (x.size() + y.size() > static_cast<std::size_t>(maxlen)) continue;
      std::size_t i = 0;
      Word z = x;
      while (i < y.size()) {
        Word z2 = z;
        z2.push_back(y[i]);
        if (o.length(z2) != z2.size()) break;
        z = std::move(z2);
        ++i;
      }
      out.insert({x, y, z, Word(y.begin() + static_cast<long>(i), y.end())});
    }
  return out;
}

}  // namespace cosetnet
