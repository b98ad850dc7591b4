#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cosetnet {

using Letter = std::uint8_t;
using Word = std::vector<Letter>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite generating alphabet closed under inversion. Letter order is the
/// order of construction and drives shortlex comparisons.
class Alphabet {
 public:
  Alphabet() = default;

  /// `names[i]` is printed for letter i; `inverse[i]` is the inverse letter.
  Alphabet(std::vector<char> names, std::vector<Letter> inverse)
      : names_(std::move(names)), inverse_(std::move(inverse)) {
    if (names_.size() != inverse_.size())
      throw std::invalid_argument("alphabet: names/inverse size mismatch");
    for (std::size_t i = 0; i < inverse_.size(); ++i) {
      if (inverse_[i] >= inverse_.size() || inverse_[inverse_[i]] != i)
        throw std::invalid_argument("alphabet: inverse map is not an involution");
    }
  }

  std::size_t size() const { return names_.size(); }
  Letter inverse(Letter c) const { return inverse_.at(c); }
  char name(Letter c) const { return names_.at(c); }
  const std::vector<char>& names() const { return names_; }

  bool contains(char ch) const {
    return std::find(names_.begin(), names_.end(), ch) != names_.end();
  }

  Letter letter(char ch) const {
    auto it = std::find(names_.begin(), names_.end(), ch);
    if (it == names_.end())
      throw ParseError(std::string("symbol '") + ch + "' not in alphabet");
    return static_cast<Letter>(it - names_.begin());
  }

  bool operator==(const Alphabet& o) const {
    return names_ == o.names_ && inverse_ == o.inverse_;
  }

  /// Formal inverse: reversed word with every letter inverted.
  Word invert(const Word& w) const {
    Word out(w.rbegin(), w.rend());
    for (auto& c : out) c = inverse_[c];
    return out;
  }

  std::string format(const Word& w) const {
    if (w.empty()) return "1";
    std::string s;
    s.reserve(w.size());
    for (Letter c : w) s.push_back(names_.at(c));
    return s;
  }

  /// Parses a word. Letters are alphabet names; `^n` repeats the preceding
  /// letter or parenthesised group (negative n inverts it); `1` and the empty
  /// string denote the identity.
  Word parse(std::string_view text) const {
    std::size_t pos = 0;
    Word w = parse_seq(text, pos, 0);
    if (pos != text.size()) throw ParseError("unbalanced ')' in word '" + std::string(text) + "'");
    return w;
  }

 private:
  Word parse_seq(std::string_view t, std::size_t& pos, int depth) const {
    Word out;
    while (pos < t.size()) {
      char ch = t[pos];
      if (ch == ')') {
        if (depth == 0) return out;
        return out;
      }
      Word atom;
      if (ch == '(') {
        ++pos;
        atom = parse_seq(t, pos, depth + 1);
        if (pos >= t.size() || t[pos] != ')') throw ParseError("missing ')' in word");
        ++pos;
      } else if (ch == '1' && (pos + 1 >= t.size() || t[pos + 1] != '^')) {
        ++pos;
        continue;
      } else {
        atom.push_back(letter(ch));
        ++pos;
      }
      if (pos < t.size() && t[pos] == '^') {
        ++pos;
        bool neg = false;
        if (pos < t.size() && t[pos] == '-') {
          neg = true;
          ++pos;
        }
        std::size_t start = pos;
        while (pos < t.size() && t[pos] >= '0' && t[pos] <= '9') ++pos;
        if (start == pos) throw ParseError("expected exponent after '^'");
        long n = std::stol(std::string(t.substr(start, pos - start)));
        if (n > 10000) throw ParseError("exponent too large");
        Word base = neg ? invert(atom) : atom;
        atom.clear();
        for (long i = 0; i < n; ++i) atom.insert(atom.end(), base.begin(), base.end());
      }
      out.insert(out.end(), atom.begin(), atom.end());
    }
    if (depth > 0) return out;
    return out;
  }

  std::vector<char> names_;
  std::vector<Letter> inverse_;
};

/// Shortlex: shorter first, then lexicographic by letter index.
inline bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

inline Word concat(const Word& a, const Word& b) {
  Word out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline std::string word_key(const Word& w) { return std::string(w.begin(), w.end()); }

}  // namespace cosetnet
