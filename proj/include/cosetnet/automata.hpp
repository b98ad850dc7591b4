#pragma once

#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cosetnet/words.hpp"
#include "json.hpp"

namespace cosetnet {

struct StateBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// k-tape alphabet over a base alphabet plus the padding symbol `$`.
///
/// A tuple of words is fed to an automaton column by column. Each tape reads
/// `$* w $*`: leading padding lets a tape start late (a tape that is read
/// after another one has finished), trailing padding is the usual right
/// padding of a convolution. The all-`$` column never labels a transition.
struct TapeAlphabet {
  Alphabet base;
  int tapes = 1;

  int pad() const { return static_cast<int>(base.size()); }
  std::uint64_t radix() const { return base.size() + 1; }

  bool operator==(const TapeAlphabet& o) const { return tapes == o.tapes && base == o.base; }
};

/// Composite column symbol. Tape 0 is the most significant digit, so the
/// numeric order is lexicographic by tape with `$` last.
using Symbol = std::uint64_t;
inline constexpr Symbol kEpsilon = std::numeric_limits<Symbol>::max();

inline Symbol encode_symbol(const TapeAlphabet& ta, const std::vector<int>& letters) {
  Symbol s = 0;
  for (int l : letters) s = s * ta.radix() + static_cast<Symbol>(l);
  return s;
}

inline std::vector<int> decode_symbol(const TapeAlphabet& ta, Symbol s) {
  std::vector<int> out(static_cast<std::size_t>(ta.tapes));
  for (int t = ta.tapes - 1; t >= 0; --t) {
    out[static_cast<std::size_t>(t)] = static_cast<int>(s % ta.radix());
    s /= ta.radix();
  }
  return out;
}

inline Symbol all_pad(const TapeAlphabet& ta) {
  return encode_symbol(ta, std::vector<int>(static_cast<std::size_t>(ta.tapes), ta.pad()));
}

/// A word tuple, one word per tape.
using Tuple = std::vector<Word>;

/// Finite automaton over a TapeAlphabet. Transitions are sparse lists keyed
/// by composite symbol; `kEpsilon` marks silent moves (only produced by
/// projection, removed by determinize).
class MultiTapeAutomaton {
 public:
  MultiTapeAutomaton() = default;
  explicit MultiTapeAutomaton(TapeAlphabet ta) : ta_(std::move(ta)) {}

  const TapeAlphabet& tape_alphabet() const { return ta_; }
  int tapes() const { return ta_.tapes; }
  std::size_t num_states() const { return trans_.size(); }

  int add_state(bool accepting = false) {
    trans_.emplace_back();
    accept_.push_back(accepting ? 1 : 0);
    return static_cast<int>(trans_.size() - 1);
  }
  void add_start(int s) { start_.push_back(s); }
  void set_accept(int s, bool a = true) { accept_.at(static_cast<std::size_t>(s)) = a ? 1 : 0; }
  void add_transition(int from, Symbol sym, int to) {
    trans_.at(static_cast<std::size_t>(from)).emplace_back(sym, to);
  }

  const std::vector<int>& starts() const { return start_; }
  bool accepting(int s) const { return accept_.at(static_cast<std::size_t>(s)) != 0; }
  const std::vector<std::pair<Symbol, int>>& transitions(int s) const {
    return trans_.at(static_cast<std::size_t>(s));
  }

  /// Sorts transition lists; deterministic automata then support lookup.
  void normalize() {
    for (auto& t : trans_) {
      std::sort(t.begin(), t.end());
      t.erase(std::unique(t.begin(), t.end()), t.end());
    }
    std::sort(start_.begin(), start_.end());
    start_.erase(std::unique(start_.begin(), start_.end()), start_.end());
  }

  bool deterministic() const {
    if (start_.size() != 1) return false;
    for (const auto& t : trans_) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].first == kEpsilon) return false;
        if (i > 0 && t[i].first == t[i - 1].first) return false;
      }
    }
    return true;
  }

  bool has_epsilon() const {
    for (const auto& t : trans_)
      for (const auto& [s, d] : t)
        if (s == kEpsilon) return true;
    return false;
  }

  /// Successor in a normalized deterministic automaton, -1 if none.
  int next(int s, Symbol sym) const {
    const auto& t = trans_[static_cast<std::size_t>(s)];
    auto it = std::lower_bound(t.begin(), t.end(), std::make_pair(sym, std::numeric_limits<int>::min()));
    if (it == t.end() || it->first != sym) return -1;
    return it->second;
  }

  std::size_t num_transitions() const {
    std::size_t n = 0;
    for (const auto& t : trans_) n += t.size();
    return n;
  }

 private:
  TapeAlphabet ta_;
  std::vector<std::vector<std::pair<Symbol, int>>> trans_;
  std::vector<int> start_;
  std::vector<char> accept_;
};

using Automaton = MultiTapeAutomaton;

inline void require_same_alphabet(const Automaton& a, const Automaton& b) {
  if (!(a.tape_alphabet() == b.tape_alphabet())) throw std::invalid_argument("tape alphabet mismatch");
}

// ---------------------------------------------------------------------------
// Basic constructions
// ---------------------------------------------------------------------------

/// 1-tape automaton accepting exactly `w`.
inline Automaton word_automaton(const Alphabet& base, const Word& w) {
  Automaton a(TapeAlphabet{base, 1});
  int s = a.add_state(w.empty());
  a.add_start(s);
  for (std::size_t i = 0; i < w.size(); ++i) {
    int t = a.add_state(i + 1 == w.size());
    a.add_transition(s, w[i], t);
    s = t;
  }
  a.normalize();
  return a;
}

inline Automaton empty_automaton(const TapeAlphabet& ta) {
  Automaton a(ta);
  a.add_start(a.add_state(false));
  return a;
}

/// All padding-valid k-tuples read synchronously (every tape starts at the
/// first column). The universe for complementation.
inline Automaton sync_universe(const TapeAlphabet& ta) {
  if (ta.tapes > 4) throw std::invalid_argument("sync_universe supports at most 4 tapes");
  Automaton a(ta);
  const int k = ta.tapes;
  const int masks = 1 << k;
  for (int m = 0; m < masks; ++m) a.add_state(true);
  a.add_start(0);
  const Symbol total = [&] {
    Symbol t = 1;
    for (int i = 0; i < k; ++i) t *= ta.radix();
    return t;
  }();
  for (int m = 0; m < masks; ++m) {
    for (Symbol s = 0; s < total; ++s) {
      auto letters = decode_symbol(ta, s);
      bool ok = false, valid = true;
      int nm = m;
      for (int t = 0; t < k; ++t) {
        bool pad = letters[static_cast<std::size_t>(t)] == ta.pad();
        if (!pad) ok = true;
        if (!pad && (m >> t & 1)) valid = false;
        if (pad) nm |= 1 << t;
      }
      if (ok && valid) a.add_transition(m, s, nm);
    }
  }
  a.normalize();
  return a;
}

// ---------------------------------------------------------------------------
// Determinization, trimming, minimization
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultStateBudget = 1'000'000;

inline Automaton determinize(const Automaton& a, std::size_t budget = kDefaultStateBudget) {
  auto closure = [&](std::vector<int> set) {
    std::vector<int> stack = set;
    std::set<int> seen(set.begin(), set.end());
    while (!stack.empty()) {
      int s = stack.back();
      stack.pop_back();
      for (const auto& [sym, d] : a.transitions(s))
        if (sym == kEpsilon && seen.insert(d).second) stack.push_back(d);
    }
    return std::vector<int>(seen.begin(), seen.end());
  };
  Automaton out(a.tape_alphabet());
  std::map<std::vector<int>, int> ids;
  std::deque<std::vector<int>> work;
  auto intern = [&](std::vector<int> set) {
    auto it = ids.find(set);
    if (it != ids.end()) return it->second;
    if (ids.size() >= budget) throw StateBudgetExceeded("determinize: state budget exceeded");
    bool acc = false;
    for (int s : set) acc = acc || a.accepting(s);
    int id = out.add_state(acc);
    ids.emplace(set, id);
    work.push_back(std::move(set));
    return id;
  };
  out.add_start(intern(closure(a.starts())));
  while (!work.empty()) {
    std::vector<int> set = std::move(work.front());
    work.pop_front();
    int id = ids.at(set);
    std::map<Symbol, std::set<int>> moves;
    for (int s : set)
      for (const auto& [sym, d] : a.transitions(s))
        if (sym != kEpsilon) moves[sym].insert(d);
    for (auto& [sym, targets] : moves) {
      int t = intern(closure(std::vector<int>(targets.begin(), targets.end())));
      out.add_transition(id, sym, t);
    }
  }
  out.normalize();
  return out;
}

/// Keeps states that are reachable and co-reachable. The start state is
/// kept even when the language is empty.
inline Automaton trim(const Automaton& a) {
  const std::size_t n = a.num_states();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<int> stack(a.starts().begin(), a.starts().end());
  for (int s : stack) fwd[static_cast<std::size_t>(s)] = 1;
  std::vector<std::vector<int>> rev(n);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) rev[static_cast<std::size_t>(d)].push_back(static_cast<int>(s));
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (const auto& [sym, d] : a.transitions(s))
      if (!fwd[static_cast<std::size_t>(d)]) {
        fwd[static_cast<std::size_t>(d)] = 1;
        stack.push_back(d);
      }
  }
  for (std::size_t s = 0; s < n; ++s)
    if (a.accepting(static_cast<int>(s))) {
      bwd[s] = 1;
      stack.push_back(static_cast<int>(s));
    }
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    for (int p : rev[static_cast<std::size_t>(s)])
      if (!bwd[static_cast<std::size_t>(p)]) {
        bwd[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
  }
  std::vector<int> map(n, -1);
  Automaton out(a.tape_alphabet());
  for (std::size_t s = 0; s < n; ++s)
    if (fwd[s] && bwd[s]) map[s] = out.add_state(a.accepting(static_cast<int>(s)));
  bool any_start = false;
  for (int s : a.starts())
    if (map[static_cast<std::size_t>(s)] >= 0) {
      out.add_start(map[static_cast<std::size_t>(s)]);
      any_start = true;
    }
  if (!any_start) return empty_automaton(a.tape_alphabet());
  for (std::size_t s = 0; s < n; ++s) {
    if (map[s] < 0) continue;
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s)))
      if (map[static_cast<std::size_t>(d)] >= 0) out.add_transition(map[s], sym, map[static_cast<std::size_t>(d)]);
  }
  out.normalize();
  return out;
}

/// Renumbers states in BFS order from the start, following symbols in
/// increasing order, so equal minimal automata are identical.
inline Automaton canonical_renumber(const Automaton& a) {
  if (!a.deterministic()) throw std::invalid_argument("canonical_renumber needs a deterministic automaton");
  std::vector<int> order(a.num_states(), -1);
  std::deque<int> q{a.starts().front()};
  order[static_cast<std::size_t>(a.starts().front())] = 0;
  int next = 1;
  std::vector<int> seq;
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    seq.push_back(s);
    for (const auto& [sym, d] : a.transitions(s))
      if (order[static_cast<std::size_t>(d)] < 0) {
        order[static_cast<std::size_t>(d)] = next++;
        q.push_back(d);
      }
  }
  Automaton out(a.tape_alphabet());
  for (int s : seq) out.add_state(a.accepting(s));
  out.add_start(0);
  for (int s : seq)
    for (const auto& [sym, d] : a.transitions(s)) out.add_transition(order[static_cast<std::size_t>(s)], sym, order[static_cast<std::size_t>(d)]);
  out.normalize();
  return out;
}

/// Moore partition refinement on a trimmed deterministic automaton.
inline Automaton minimize(const Automaton& input) {
  Automaton a = trim(input.deterministic() ? input : determinize(input));
  const std::size_t n = a.num_states();
  std::vector<int> cls(n);
  for (std::size_t s = 0; s < n; ++s) cls[s] = a.accepting(static_cast<int>(s)) ? 1 : 0;
  std::size_t count = 0;
  for (;;) {
    std::map<std::pair<int, std::vector<std::pair<Symbol, int>>>, int> sig_ids;
    std::vector<int> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::pair<Symbol, int>> sig;
      for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) sig.emplace_back(sym, cls[static_cast<std::size_t>(d)]);
      auto key = std::make_pair(cls[s], std::move(sig));
      auto it = sig_ids.find(key);
      if (it == sig_ids.end()) it = sig_ids.emplace(std::move(key), static_cast<int>(sig_ids.size())).first;
      next[s] = it->second;
    }
    cls = std::move(next);
    if (sig_ids.size() == count) break;
    count = sig_ids.size();
  }
  Automaton q(a.tape_alphabet());
  for (std::size_t c = 0; c < count; ++c) q.add_state(false);
  for (std::size_t s = 0; s < n; ++s) {
    if (a.accepting(static_cast<int>(s))) q.set_accept(cls[s]);
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) q.add_transition(cls[s], sym, cls[static_cast<std::size_t>(d)]);
  }
  q.add_start(cls[static_cast<std::size_t>(a.starts().front())]);
  q.normalize();
  return canonical_renumber(q);
}

inline Automaton determinize_minimize(const Automaton& a, std::size_t budget = kDefaultStateBudget) {
  return minimize(a.deterministic() ? a : determinize(a, budget));
}

// ---------------------------------------------------------------------------
// Boolean operations
// ---------------------------------------------------------------------------

enum class BoolOp { Intersect, Union, Difference };

/// Product construction on identical column encodings. Both operands must
/// use the same tape schedule (e.g. both synchronous or both sequential).
inline Automaton combine(const Automaton& x, const Automaton& y, BoolOp op,
                         std::size_t budget = kDefaultStateBudget) {
  require_same_alphabet(x, y);
  Automaton a = x.deterministic() ? x : determinize(x, budget);
  Automaton b = y.deterministic() ? y : determinize(y, budget);
  Automaton out(a.tape_alphabet());
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> work;
  auto acc = [&](int p, int q) {
    bool ia = p >= 0 && a.accepting(p), ib = q >= 0 && b.accepting(q);
    switch (op) {
      case BoolOp::Intersect: return ia && ib;
      case BoolOp::Union: return ia || ib;
      case BoolOp::Difference: return ia && !ib;
    }
    return false;
  };
  auto intern = [&](int p, int q) {
    auto key = std::make_pair(p, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    if (ids.size() >= budget) throw StateBudgetExceeded("combine: state budget exceeded");
    int id = out.add_state(acc(p, q));
    ids.emplace(key, id);
    work.push_back(key);
    return id;
  };
  out.add_start(intern(a.starts().front(), b.starts().front()));
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    int id = ids.at({p, q});
    std::set<Symbol> syms;
    if (p >= 0)
      for (const auto& [s, d] : a.transitions(p)) syms.insert(s);
    if (q >= 0)
      for (const auto& [s, d] : b.transitions(q)) syms.insert(s);
    for (Symbol s : syms) {
      int np = p >= 0 ? a.next(p, s) : -1;
      int nq = q >= 0 ? b.next(q, s) : -1;
      if (op == BoolOp::Intersect && (np < 0 || nq < 0)) continue;
      if (op == BoolOp::Difference && np < 0) continue;
      if (np < 0 && nq < 0) continue;
      out.add_transition(id, s, intern(np, nq));
    }
  }
  out.normalize();
  return minimize(out);
}

/// Complement relative to all padding-valid synchronous tuples.
inline Automaton complement_sync(const Automaton& a) {
  return combine(sync_universe(a.tape_alphabet()), a, BoolOp::Difference);
}

inline bool is_empty(const Automaton& a) {
  std::vector<char> seen(a.num_states(), 0);
  std::vector<int> stack(a.starts().begin(), a.starts().end());
  for (int s : stack) seen[static_cast<std::size_t>(s)] = 1;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    if (a.accepting(s)) return false;
    for (const auto& [sym, d] : a.transitions(s))
      if (!seen[static_cast<std::size_t>(d)]) {
        seen[static_cast<std::size_t>(d)] = 1;
        stack.push_back(d);
      }
  }
  return true;
}

inline bool equivalent(const Automaton& a, const Automaton& b) {
  return is_empty(combine(a, b, BoolOp::Difference)) && is_empty(combine(b, a, BoolOp::Difference));
}

// ---------------------------------------------------------------------------
// Tape manipulation
// ---------------------------------------------------------------------------

/// A component of a multi-tape product: an automaton reading the listed
/// tapes of the product in order.
struct TapeBinding {
  const Automaton* automaton;
  std::vector<int> tapes;
};

/// Product of automata bound to subsets of `tapes` tapes. Every column of the
/// product is assembled from the components' moves; a component whose tapes
/// all read `$` in a column stays put. Padding validity of each product tape
/// is enforced (letters on a tape are contiguous).
///
/// Components must be free of silent moves. The tuple language is the
/// intersection of the components' tuple languages for tuples whose column
/// schedule each component accepts.
inline Automaton join(const Alphabet& base, int tapes, const std::vector<TapeBinding>& comps,
                      std::size_t budget = kDefaultStateBudget) {
  TapeAlphabet ta{base, tapes};
  const int pad = ta.pad();
  const std::size_t nc = comps.size();
  std::vector<std::vector<std::vector<std::pair<std::vector<int>, int>>>> moves(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    const Automaton& a = *comps[c].automaton;
    if (a.has_epsilon()) throw std::invalid_argument("join: component has silent moves");
    if (a.tape_alphabet().base.size() != base.size() ||
        a.tapes() != static_cast<int>(comps[c].tapes.size()))
      throw std::invalid_argument("join: component alphabet mismatch");
    moves[c].resize(a.num_states());
    for (std::size_t s = 0; s < a.num_states(); ++s)
      for (const auto& [sym, d] : a.transitions(static_cast<int>(s)))
        moves[c][s].emplace_back(decode_symbol(a.tape_alphabet(), sym), d);
  }

  // key: component states followed by per-tape phase (0 before, 1 in, 2 after)
  using Key = std::vector<int>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ull;
      for (int v : k) h = (h ^ static_cast<std::size_t>(v + 7)) * 1099511628211ull;
      return h;
    }
  };
  Automaton out(ta);
  std::unordered_map<Key, int, KeyHash> ids;
  std::deque<Key> work;
  auto intern = [&](const Key& k) {
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    if (ids.size() >= budget) throw StateBudgetExceeded("join: state budget exceeded");
    bool acc = true;
    for (std::size_t c = 0; c < nc; ++c) acc = acc && comps[c].automaton->accepting(k[c]);
    int id = out.add_state(acc);
    ids.emplace(k, id);
    work.push_back(k);
    return id;
  };

  // start states: all combinations
  std::vector<Key> starts{Key{}};
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<Key> next;
    for (const auto& k : starts)
      for (int s : comps[c].automaton->starts()) {
        Key k2 = k;
        k2.push_back(s);
        next.push_back(std::move(k2));
      }
    starts = std::move(next);
  }
  for (auto& k : starts) {
    k.resize(nc + static_cast<std::size_t>(tapes), 0);
    out.add_start(intern(k));
  }

  std::vector<int> col(static_cast<std::size_t>(tapes), -1);
  Key cur, nxt;
  int cur_id = 0;
  std::function<void(std::size_t)> rec = [&](std::size_t c) {
    if (c == nc) {
      bool any = false;
      Key k = nxt;
      for (int t = 0; t < tapes; ++t) {
        int l = col[static_cast<std::size_t>(t)] < 0 ? pad : col[static_cast<std::size_t>(t)];
        int& ph = k[nc + static_cast<std::size_t>(t)];
        if (l != pad) {
          any = true;
          if (ph == 2) return;
          ph = 1;
        } else if (ph == 1) {
          ph = 2;
        }
      }
      if (!any) return;
      std::vector<int> letters(static_cast<std::size_t>(tapes));
      for (int t = 0; t < tapes; ++t)
        letters[static_cast<std::size_t>(t)] = col[static_cast<std::size_t>(t)] < 0 ? pad : col[static_cast<std::size_t>(t)];
      out.add_transition(cur_id, encode_symbol(ta, letters), intern(k));
      return;
    }
    const auto& tp = comps[c].tapes;
    std::vector<int> assigned;
    auto undo = [&] {
      for (int t : assigned) col[static_cast<std::size_t>(t)] = -1;
      assigned.clear();
    };
    for (const auto& [letters, d] : moves[c][static_cast<std::size_t>(cur[c])]) {
      bool ok = true;
      for (std::size_t i = 0; i < tp.size() && ok; ++i) {
        int& slot = col[static_cast<std::size_t>(tp[i])];
        if (slot < 0) {
          slot = letters[i];
          assigned.push_back(tp[i]);
        } else if (slot != letters[i]) {
          ok = false;
        }
      }
      if (ok) {
        nxt[c] = d;
        rec(c + 1);
      }
      undo();
    }
    // idle
    bool ok = true;
    for (std::size_t i = 0; i < tp.size() && ok; ++i) {
      int& slot = col[static_cast<std::size_t>(tp[i])];
      if (slot < 0) {
        slot = pad;
        assigned.push_back(tp[i]);
      } else if (slot != pad) {
        ok = false;
      }
    }
    if (ok) {
      nxt[c] = cur[c];
      rec(c + 1);
    }
    undo();
  };

  while (!work.empty()) {
    cur = work.front();
    work.pop_front();
    cur_id = ids.at(cur);
    nxt = cur;
    rec(0);
  }
  out.normalize();
  return out;
}

/// Existential projection onto the kept tapes (in the given order). Columns
/// that become all-`$` turn into silent moves.
inline Automaton project(const Automaton& a, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("project: keep set must be nonempty");
  TapeAlphabet ta{a.tape_alphabet().base, static_cast<int>(keep.size())};
  Automaton out(ta);
  for (std::size_t s = 0; s < a.num_states(); ++s) out.add_state(a.accepting(static_cast<int>(s)));
  for (int s : a.starts()) out.add_start(s);
  const Symbol blank = all_pad(ta);
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) {
      if (sym == kEpsilon) {
        out.add_transition(static_cast<int>(s), kEpsilon, d);
        continue;
      }
      auto letters = decode_symbol(a.tape_alphabet(), sym);
      std::vector<int> kept;
      for (int t : keep) kept.push_back(letters.at(static_cast<std::size_t>(t)));
      Symbol ns = encode_symbol(ta, kept);
      out.add_transition(static_cast<int>(s), ns == blank ? kEpsilon : ns, d);
    }
  }
  out.normalize();
  return out;
}

/// Tuples of `a` whose tape `t` reads `w`, projected onto the other tapes.
inline Automaton fix_tape(const Automaton& a, int t, const Word& w) {
  if (t < 0 || t >= a.tapes()) throw std::invalid_argument("fix_tape: tape out of range");
  if (a.tapes() == 1) throw std::invalid_argument("fix_tape: need at least two tapes");
  Automaton det = a.has_epsilon() ? determinize(a) : a;
  Automaton word = word_automaton(a.tape_alphabet().base, w);
  std::vector<int> all;
  for (int i = 0; i < a.tapes(); ++i) all.push_back(i);
  Automaton j = join(a.tape_alphabet().base, a.tapes(), {{&det, all}, {&word, {t}}});
  std::vector<int> keep;
  for (int i = 0; i < a.tapes(); ++i)
    if (i != t) keep.push_back(i);
  return determinize_minimize(project(j, keep));
}

/// Synchronous pairing: {(u, v) : u in L(A), v in L(B)} with both tuples
/// starting at the first column and right-padded.
inline Automaton pad_join(const Automaton& x, const Automaton& y) {
  if (!(x.tape_alphabet().base == y.tape_alphabet().base)) throw std::invalid_argument("pad_join: alphabet mismatch");
  Automaton a = x.deterministic() ? x : determinize(x);
  Automaton b = y.deterministic() ? y : determinize(y);
  const int ka = a.tapes(), kb = b.tapes();
  TapeAlphabet ta{a.tape_alphabet().base, ka + kb};
  Automaton out(ta);
  // state: (p, q) with -1 meaning that side has finished (all `$`)
  std::map<std::pair<int, int>, int> ids;
  std::deque<std::pair<int, int>> work;
  auto intern = [&](int p, int q) {
    auto key = std::make_pair(p, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    bool acc = (p < 0 || a.accepting(p)) && (q < 0 || b.accepting(q));
    int id = out.add_state(acc);
    ids.emplace(key, id);
    work.push_back(key);
    return id;
  };
  out.add_start(intern(a.starts().front(), b.starts().front()));
  std::vector<int> pad_a(static_cast<std::size_t>(ka), ta.pad()), pad_b(static_cast<std::size_t>(kb), ta.pad());
  while (!work.empty()) {
    auto [p, q] = work.front();
    work.pop_front();
    int id = ids.at({p, q});
    // options per side: (letters, next) ; finishing is allowed from accept states
    auto options = [&](const Automaton& m, int s, const std::vector<int>& padv) {
      std::vector<std::pair<std::vector<int>, int>> opts;
      if (s >= 0)
        for (const auto& [sym, d] : m.transitions(s)) opts.emplace_back(decode_symbol(m.tape_alphabet(), sym), d);
      if (s < 0 || m.accepting(s)) opts.emplace_back(padv, -1);
      return opts;
    };
    auto oa = options(a, p, pad_a);
    auto ob = options(b, q, pad_b);
    for (const auto& [la, na] : oa)
      for (const auto& [lb, nb] : ob) {
        if (na < 0 && nb < 0) continue;
        std::vector<int> letters = la;
        letters.insert(letters.end(), lb.begin(), lb.end());
        out.add_transition(id, encode_symbol(ta, letters), intern(na, nb));
      }
  }
  out.normalize();
  return minimize(out);
}

/// Sequential pairing: the tapes of A are read first (B's tapes padded),
/// then A's tapes pad while B's are read.
inline Automaton sequential_join(const Automaton& x, const Automaton& y) {
  if (!(x.tape_alphabet().base == y.tape_alphabet().base)) throw std::invalid_argument("sequential_join: alphabet mismatch");
  Automaton a = x.deterministic() ? x : determinize(x);
  Automaton b = y.deterministic() ? y : determinize(y);
  const int ka = a.tapes(), kb = b.tapes();
  TapeAlphabet ta{a.tape_alphabet().base, ka + kb};
  Automaton out(ta);
  std::map<std::tuple<int, int, int>, int> ids;
  std::deque<std::tuple<int, int, int>> work;
  auto intern = [&](int p, int q, int phase) {
    auto key = std::make_tuple(p, q, phase);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    bool acc = a.accepting(p) && b.accepting(q);
    int id = out.add_state(acc);
    ids.emplace(key, id);
    work.push_back(key);
    return id;
  };
  const int b0 = b.starts().front();
  out.add_start(intern(a.starts().front(), b0, 0));
  std::vector<int> pad_a(static_cast<std::size_t>(ka), ta.pad()), pad_b(static_cast<std::size_t>(kb), ta.pad());
  while (!work.empty()) {
    auto [p, q, phase] = work.front();
    work.pop_front();
    int id = ids.at({p, q, phase});
    if (phase == 0)
      for (const auto& [sym, d] : a.transitions(p)) {
        auto letters = decode_symbol(a.tape_alphabet(), sym);
        letters.insert(letters.end(), pad_b.begin(), pad_b.end());
        out.add_transition(id, encode_symbol(ta, letters), intern(d, q, 0));
      }
    if (a.accepting(p))
      for (const auto& [sym, d] : b.transitions(q)) {
        auto letters = pad_a;
        auto lb = decode_symbol(b.tape_alphabet(), sym);
        letters.insert(letters.end(), lb.begin(), lb.end());
        out.add_transition(id, encode_symbol(ta, letters), intern(p, d, 1));
      }
  }
  out.normalize();
  return minimize(out);
}

/// Splits a 1-tape language: {(x, y) : xy in L(A)}, x read first then y.
inline Automaton split_tape(const Automaton& x) {
  if (x.tapes() != 1) throw std::invalid_argument("split_tape needs a 1-tape automaton");
  Automaton a = x.deterministic() ? x : determinize(x);
  TapeAlphabet ta{a.tape_alphabet().base, 2};
  Automaton out(ta);
  const std::size_t n = a.num_states();
  // phase 0 copies: reading x; phase 1 copies: reading y
  for (std::size_t s = 0; s < 2 * n; ++s) out.add_state(a.accepting(static_cast<int>(s % n)));
  out.add_start(a.starts().front());
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) {
      int c = static_cast<int>(sym);
      out.add_transition(static_cast<int>(s), encode_symbol(ta, {c, ta.pad()}), d);
      out.add_transition(static_cast<int>(s), encode_symbol(ta, {ta.pad(), c}), d + static_cast<int>(n));
      out.add_transition(static_cast<int>(s + n), encode_symbol(ta, {ta.pad(), c}), d + static_cast<int>(n));
    }
  out.normalize();
  return minimize(out);
}

// ---------------------------------------------------------------------------
// Language queries
// ---------------------------------------------------------------------------

inline Automaton prefix_closure(const Automaton& a) {
  Automaton t = trim(a.deterministic() ? a : determinize(a));
  if (is_empty(t)) return t;
  Automaton out(t.tape_alphabet());
  for (std::size_t s = 0; s < t.num_states(); ++s) out.add_state(true);
  out.add_start(t.starts().front());
  for (std::size_t s = 0; s < t.num_states(); ++s)
    for (const auto& [sym, d] : t.transitions(static_cast<int>(s))) out.add_transition(static_cast<int>(s), sym, d);
  out.normalize();
  return minimize(out);
}

/// Least D such that every prefix of an accepted word extends to an
/// accepted word with at most D more symbols.
inline int completion_distance(const Automaton& a) {
  Automaton t = minimize(a);
  if (is_empty(t)) throw std::invalid_argument("completion_distance: empty language");
  const std::size_t n = t.num_states();
  std::vector<std::vector<int>> rev(n);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [sym, d] : t.transitions(static_cast<int>(s))) rev[static_cast<std::size_t>(d)].push_back(static_cast<int>(s));
  std::vector<int> dist(n, -1);
  std::deque<int> q;
  for (std::size_t s = 0; s < n; ++s)
    if (t.accepting(static_cast<int>(s))) {
      dist[s] = 0;
      q.push_back(static_cast<int>(s));
    }
  while (!q.empty()) {
    int s = q.front();
    q.pop_front();
    for (int p : rev[static_cast<std::size_t>(s)])
      if (dist[static_cast<std::size_t>(p)] < 0) {
        dist[static_cast<std::size_t>(p)] = dist[static_cast<std::size_t>(s)] + 1;
        q.push_back(p);
      }
  }
  return *std::max_element(dist.begin(), dist.end());
}

inline Tuple decode_columns(const TapeAlphabet& ta, const std::vector<Symbol>& cols) {
  Tuple t(static_cast<std::size_t>(ta.tapes));
  for (Symbol s : cols) {
    auto letters = decode_symbol(ta, s);
    for (int i = 0; i < ta.tapes; ++i)
      if (letters[static_cast<std::size_t>(i)] != ta.pad())
        t[static_cast<std::size_t>(i)].push_back(static_cast<Letter>(letters[static_cast<std::size_t>(i)]));
  }
  return t;
}

/// Accepted tuples whose encoding has at most `maxlen` columns, in shortlex
/// order of the encodings, duplicates removed.
inline std::vector<Tuple> enumerate(const Automaton& input, int maxlen, std::size_t cap = 2'000'000) {
  Automaton a = input.deterministic() ? input : determinize(input);
  a = trim(a);
  std::vector<Tuple> out;
  std::set<Tuple> seen;
  std::vector<std::pair<int, std::vector<Symbol>>> level{{a.starts().front(), {}}};
  for (int len = 0; len <= maxlen && !level.empty(); ++len) {
    std::vector<std::pair<int, std::vector<Symbol>>> next;
    for (auto& [s, cols] : level) {
      if (a.accepting(s)) {
        Tuple t = decode_columns(a.tape_alphabet(), cols);
        if (seen.insert(t).second) {
          out.push_back(std::move(t));
          if (out.size() > cap) throw std::length_error("enumerate: cap exceeded");
        }
      }
      if (len == maxlen) continue;
      for (const auto& [sym, d] : a.transitions(s)) {
        auto c2 = cols;
        c2.push_back(sym);
        next.emplace_back(d, std::move(c2));
        if (next.size() > cap) throw std::length_error("enumerate: cap exceeded");
      }
    }
    level = std::move(next);
  }
  return out;
}

/// 1-tape convenience: accepted words of length <= maxlen.
inline std::vector<Word> enumerate_words(const Automaton& a, int maxlen) {
  if (a.tapes() != 1) throw std::invalid_argument("enumerate_words needs a 1-tape automaton");
  std::vector<Word> out;
  for (auto& t : enumerate(a, maxlen)) out.push_back(std::move(t[0]));
  return out;
}

/// Membership of a tuple under any padding-valid column schedule.
inline bool accepts(const Automaton& a, const Tuple& tuple) {
  const TapeAlphabet& ta = a.tape_alphabet();
  if (static_cast<int>(tuple.size()) != ta.tapes) throw std::invalid_argument("accepts: tuple arity mismatch");
  const std::size_t k = tuple.size();
  using Cfg = std::vector<int>;  // state, then positions
  std::set<Cfg> seen;
  std::vector<Cfg> stack;
  for (int s : a.starts()) {
    Cfg c(k + 1, 0);
    c[0] = s;
    stack.push_back(c);
  }
  while (!stack.empty()) {
    Cfg c = stack.back();
    stack.pop_back();
    if (!seen.insert(c).second) continue;
    bool done = true;
    for (std::size_t i = 0; i < k; ++i) done = done && c[i + 1] == static_cast<int>(tuple[i].size());
    if (done && a.accepting(c[0])) return true;
    for (const auto& [sym, d] : a.transitions(c[0])) {
      Cfg n = c;
      n[0] = d;
      if (sym != kEpsilon) {
        auto letters = decode_symbol(ta, sym);
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
          int pos = c[i + 1];
          int len = static_cast<int>(tuple[i].size());
          if (letters[i] == ta.pad()) {
            ok = (pos == 0 || pos == len);
          } else {
            ok = pos < len && tuple[i][static_cast<std::size_t>(pos)] == letters[i];
            n[i + 1] = pos + 1;
          }
        }
        if (!ok) continue;
      }
      stack.push_back(std::move(n));
    }
  }
  return false;
}

/// Synchronous encoding: every tape starts at column 0.
inline std::vector<Symbol> sync_columns(const TapeAlphabet& ta, const Tuple& t) {
  std::size_t n = 0;
  for (const auto& w : t) n = std::max(n, w.size());
  std::vector<Symbol> cols;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> letters;
    for (const auto& w : t) letters.push_back(i < w.size() ? w[i] : ta.pad());
    cols.push_back(encode_symbol(ta, letters));
  }
  return cols;
}

/// Sequential encoding: tape j starts after tapes 0..j-1 have finished.
inline std::vector<Symbol> sequential_columns(const TapeAlphabet& ta, const Tuple& t) {
  std::vector<Symbol> cols;
  for (std::size_t j = 0; j < t.size(); ++j)
    for (Letter c : t[j]) {
      std::vector<int> letters(t.size(), ta.pad());
      letters[j] = c;
      cols.push_back(encode_symbol(ta, letters));
    }
  return cols;
}

/// Runs a normalized deterministic automaton on an explicit column sequence.
inline bool run_columns(const Automaton& dfa, const std::vector<Symbol>& cols) {
  int s = dfa.starts().front();
  for (Symbol c : cols) {
    s = dfa.next(s, c);
    if (s < 0) return false;
  }
  return dfa.accepting(s);
}

/// Number of accepted encodings of each length 0..maxlen (deterministic input).
inline std::vector<std::uint64_t> count_by_length(const Automaton& input, int maxlen) {
  Automaton a = input.deterministic() ? input : determinize(input);
  std::vector<std::uint64_t> cur(a.num_states(), 0), out;
  cur[static_cast<std::size_t>(a.starts().front())] = 1;
  for (int len = 0; len <= maxlen; ++len) {
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < a.num_states(); ++s)
      if (a.accepting(static_cast<int>(s))) total += cur[s];
    out.push_back(total);
    std::vector<std::uint64_t> nxt(a.num_states(), 0);
    for (std::size_t s = 0; s < a.num_states(); ++s)
      if (cur[s])
        for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) nxt[static_cast<std::size_t>(d)] += cur[s];
    cur = std::move(nxt);
  }
  return out;
}

/// True iff no accepted encoding reads a letter on a tape after that tape
/// has read trailing padding.
inline bool padding_valid(const Automaton& a) {
  Automaton t = trim(a);
  const TapeAlphabet& ta = t.tape_alphabet();
  const std::size_t k = static_cast<std::size_t>(ta.tapes);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> stack;
  for (int s : t.starts()) {
    std::vector<int> c(k + 1, 0);
    c[0] = s;
    stack.push_back(c);
  }
  while (!stack.empty()) {
    auto c = stack.back();
    stack.pop_back();
    if (!seen.insert(c).second) continue;
    for (const auto& [sym, d] : t.transitions(c[0])) {
      auto n = c;
      n[0] = d;
      if (sym != kEpsilon) {
        auto letters = decode_symbol(ta, sym);
        for (std::size_t i = 0; i < k; ++i) {
          bool pad = letters[i] == ta.pad();
          if (!pad && c[i + 1] == 2) return false;
          if (!pad) n[i + 1] = 1;
          else if (c[i + 1] == 1) n[i + 1] = 2;
        }
      }
      stack.push_back(std::move(n));
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline std::string symbol_name(const TapeAlphabet& ta, int letter) {
  return letter == ta.pad() ? "$" : std::string(1, ta.base.name(static_cast<Letter>(letter)));
}

inline nlohmann::json to_json(const Automaton& a) {
  const TapeAlphabet& ta = a.tape_alphabet();
  nlohmann::json j;
  j["states"] = a.num_states();
  j["start"] = a.starts();
  std::vector<int> acc;
  for (std::size_t s = 0; s < a.num_states(); ++s)
    if (a.accepting(static_cast<int>(s))) acc.push_back(static_cast<int>(s));
  j["accept"] = acc;
  j["tapes"] = ta.tapes;
  std::string names(ta.base.names().begin(), ta.base.names().end());
  std::vector<int> inv;
  for (std::size_t i = 0; i < ta.base.size(); ++i) inv.push_back(ta.base.inverse(static_cast<Letter>(i)));
  j["alphabet"] = {{"names", names}, {"inverse", inv}};
  auto& tr = j["transitions"] = nlohmann::json::array();
  for (std::size_t s = 0; s < a.num_states(); ++s)
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) {
      nlohmann::json syms = nlohmann::json::array();
      if (sym != kEpsilon)
        for (int l : decode_symbol(ta, sym)) syms.push_back(symbol_name(ta, l));
      tr.push_back({s, syms, d});
    }
  return j;
}

inline Automaton from_json(const nlohmann::json& j) {
  std::string names = j.at("alphabet").at("names").get<std::string>();
  std::vector<int> inv = j.at("alphabet").at("inverse").get<std::vector<int>>();
  Alphabet base(std::vector<char>(names.begin(), names.end()),
                std::vector<Letter>(inv.begin(), inv.end()));
  TapeAlphabet ta{base, j.at("tapes").get<int>()};
  Automaton a(ta);
  std::size_t n = j.at("states").get<std::size_t>();
  for (std::size_t s = 0; s < n; ++s) a.add_state(false);
  for (int s : j.at("start").get<std::vector<int>>()) a.add_start(s);
  for (int s : j.at("accept").get<std::vector<int>>()) a.set_accept(s);
  for (const auto& t : j.at("transitions")) {
    const auto& syms = t.at(1);
    Symbol sym = kEpsilon;
    if (!syms.empty()) {
      std::vector<int> letters;
      for (const auto& x : syms) {
        std::string v = x.get<std::string>();
        letters.push_back(v == "$" ? ta.pad() : base.letter(v.at(0)));
      }
      sym = encode_symbol(ta, letters);
    }
    a.add_transition(t.at(0).get<int>(), sym, t.at(2).get<int>());
  }
  a.normalize();
  return a;
}

inline std::string to_dot(const Automaton& a, const std::string& name = "M") {
  const TapeAlphabet& ta = a.tape_alphabet();
  std::ostringstream os;
  os << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (std::size_t s = 0; s < a.num_states(); ++s)
    os << "  q" << s << " [label=\"" << s << "\"" << (a.accepting(static_cast<int>(s)) ? ", shape=doublecircle" : "")
       << "];\n";
  for (int s : a.starts()) os << "  start" << s << " [shape=point];\n  start" << s << " -> q" << s << ";\n";
  for (std::size_t s = 0; s < a.num_states(); ++s) {
    std::map<int, std::vector<std::string>> labels;
    for (const auto& [sym, d] : a.transitions(static_cast<int>(s))) {
      std::string lab;
      if (sym == kEpsilon) {
        lab = "eps";
      } else {
        auto letters = decode_symbol(ta, sym);
        if (ta.tapes > 1) lab += "(";
        for (std::size_t i = 0; i < letters.size(); ++i) {
          if (i) lab += ",";
          lab += symbol_name(ta, letters[i]);
        }
        if (ta.tapes > 1) lab += ")";
      }
      labels[d].push_back(lab);
    }
    for (const auto& [d, labs] : labels) {
      os << "  q" << s << " -> q" << d << " [label=\"";
      for (std::size_t i = 0; i < labs.size(); ++i) os << (i ? " " : "") << labs[i];
      os << "\"];\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace cosetnet
