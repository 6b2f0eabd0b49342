#pragma once

// Formulas, contexts and stacks of multiplicative linear logic extended with
// the dual modalities box ([]) and diamond (<>).
//
// Concrete syntax:
//   F ::= ident | "~" ident | "(" F "%" F ")" | "(" F "*" F ")" | "[]" F | "<>" F
// A context is a formula in which exactly one atom position is replaced by
// the hole "[.]".

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmll/error.hpp"

namespace qmll {

enum class Polarity : std::uint8_t { Positive, Negative };

inline Polarity flip(Polarity p) {
  return p == Polarity::Positive ? Polarity::Negative : Polarity::Positive;
}

struct Atom {
  std::string name;
  Polarity polarity = Polarity::Positive;

  Atom dual() const { return Atom{name, flip(polarity)}; }
  friend bool operator==(const Atom&, const Atom&) = default;
};

enum class Modality : std::uint8_t { Box, Diamond };

inline Modality dual(Modality m) {
  return m == Modality::Box ? Modality::Diamond : Modality::Box;
}

inline const char* symbol(Modality m) { return m == Modality::Box ? "[]" : "<>"; }

class Formula {
 public:
  enum class Kind : std::uint8_t { Atom, Par, Tensor, Box, Diamond };

  static Formula atom(std::string name, Polarity polarity = Polarity::Positive);
  static Formula atom(const Atom& a) { return atom(a.name, a.polarity); }
  static Formula par(Formula left, Formula right);
  static Formula tensor(Formula left, Formula right);
  static Formula box(Formula body);
  static Formula diamond(Formula body);
  static Formula modal(Modality m, Formula body) {
    return m == Modality::Box ? box(std::move(body)) : diamond(std::move(body));
  }
  // Wraps `body` in n copies of the modality.
  static Formula modal(Modality m, std::size_t n, Formula body);

  Kind kind() const;
  bool isAtom() const { return kind() == Kind::Atom; }
  bool isModal() const { return kind() == Kind::Box || kind() == Kind::Diamond; }
  bool isBinary() const { return kind() == Kind::Par || kind() == Kind::Tensor; }
  std::optional<Modality> modality() const;

  // Atom accessors; valid only when isAtom().
  Atom atomValue() const;
  const std::string& name() const;
  Polarity polarity() const;

  const Formula& left() const;
  const Formula& right() const;
  const Formula& body() const;

  std::size_t size() const;
  std::size_t hash() const;
  std::size_t atomCount() const;

  // Number of consecutive identical modalities at the head, e.g. 2 for [][]<>a.
  std::size_t modalRun() const;
  // Number of modalities at the head regardless of kind, e.g. 3 for [][]<>a.
  std::size_t modalPrefix() const;
  // Strips n head modalities. Precondition: modalPrefix() >= n.
  Formula stripModal(std::size_t n) const;

  Formula dual() const;

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  Kind kind = Kind::Atom;
  std::string name;
  Polarity polarity = Polarity::Positive;
  std::vector<Formula> children;
  std::size_t size = 1;
  std::size_t atoms = 1;
  std::size_t hash = 0;
};

inline Formula::Kind Formula::kind() const { return node_->kind; }
inline Atom Formula::atomValue() const { return Atom{node_->name, node_->polarity}; }
inline const std::string& Formula::name() const { return node_->name; }
inline Polarity Formula::polarity() const { return node_->polarity; }
inline const Formula& Formula::left() const { return node_->children[0]; }
inline const Formula& Formula::right() const { return node_->children[1]; }
inline const Formula& Formula::body() const { return node_->children[0]; }
inline std::size_t Formula::size() const { return node_->size; }
inline std::size_t Formula::hash() const { return node_->hash; }
inline std::size_t Formula::atomCount() const { return node_->atoms; }

namespace detail {
inline std::size_t mixHash(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
}  // namespace detail

inline Formula Formula::atom(std::string name, Polarity polarity) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->hash = detail::mixHash(std::hash<std::string>{}(name),
                            polarity == Polarity::Negative ? 17 : 3);
  n->name = std::move(name);
  n->polarity = polarity;
  return Formula(std::move(n));
}

inline Formula Formula::par(Formula left, Formula right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Par;
  n->size = 1 + left.size() + right.size();
  n->atoms = left.atomCount() + right.atomCount();
  n->hash = detail::mixHash(detail::mixHash(101, left.hash()), right.hash());
  n->children = {std::move(left), std::move(right)};
  return Formula(std::move(n));
}

inline Formula Formula::tensor(Formula left, Formula right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Tensor;
  n->size = 1 + left.size() + right.size();
  n->atoms = left.atomCount() + right.atomCount();
  n->hash = detail::mixHash(detail::mixHash(211, left.hash()), right.hash());
  n->children = {std::move(left), std::move(right)};
  return Formula(std::move(n));
}

inline Formula Formula::box(Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Box;
  n->size = 1 + body.size();
  n->atoms = body.atomCount();
  n->hash = detail::mixHash(307, body.hash());
  n->children = {std::move(body)};
  return Formula(std::move(n));
}

inline Formula Formula::diamond(Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Diamond;
  n->size = 1 + body.size();
  n->atoms = body.atomCount();
  n->hash = detail::mixHash(401, body.hash());
  n->children = {std::move(body)};
  return Formula(std::move(n));
}

inline Formula Formula::modal(Modality m, std::size_t n, Formula body) {
  for (std::size_t k = 0; k < n; ++k) body = modal(m, std::move(body));
  return body;
}

inline std::optional<Modality> Formula::modality() const {
  switch (kind()) {
    case Kind::Box:
      return Modality::Box;
    case Kind::Diamond:
      return Modality::Diamond;
    default:
      return std::nullopt;
  }
}

inline std::size_t Formula::modalRun() const {
  auto m = modality();
  if (!m) return 0;
  std::size_t n = 0;
  const Formula* f = this;
  while (f->modality() == m) {
    ++n;
    f = &f->body();
  }
  return n;
}

inline std::size_t Formula::modalPrefix() const {
  std::size_t n = 0;
  const Formula* f = this;
  while (f->isModal()) {
    ++n;
    f = &f->body();
  }
  return n;
}

inline Formula Formula::stripModal(std::size_t n) const {
  Formula f = *this;
  for (std::size_t k = 0; k < n; ++k) {
    if (!f.isModal()) throw PreconditionError("stripModal: formula has too few modalities");
    f = f.body();
  }
  return f;
}

inline Formula Formula::dual() const {
  switch (kind()) {
    case Kind::Atom:
      return atom(name(), flip(polarity()));
    case Kind::Par:
      return tensor(left().dual(), right().dual());
    case Kind::Tensor:
      return par(left().dual(), right().dual());
    case Kind::Box:
      return diamond(body().dual());
    case Kind::Diamond:
      return box(body().dual());
  }
  return *this;
}

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size() || a.kind() != b.kind()) return false;
  if (a.isAtom()) return a.name() == b.name() && a.polarity() == b.polarity();
  if (a.isModal()) return a.body() == b.body();
  return a.left() == b.left() && a.right() == b.right();
}

// ---------------------------------------------------------------------------
// Printing and parsing.

inline void printFormula(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      if (f.polarity() == Polarity::Negative) out += '~';
      out += f.name();
      return;
    case Formula::Kind::Par:
    case Formula::Kind::Tensor:
      out += '(';
      printFormula(f.left(), out);
      out += f.kind() == Formula::Kind::Par ? " % " : " * ";
      printFormula(f.right(), out);
      out += ')';
      return;
    case Formula::Kind::Box:
      out += "[]";
      printFormula(f.body(), out);
      return;
    case Formula::Kind::Diamond:
      out += "<>";
      printFormula(f.body(), out);
      return;
  }
}

inline std::string printFormula(const Formula& f) {
  std::string out;
  printFormula(f, out);
  return out;
}

// Character cursor shared by the formula, context and proof readers.
class TextCursor {
 public:
  explicit TextCursor(std::string_view text) : text_(text) {}

  // Skips whitespace and ';' line comments.
  void skipSpace() {
    while (pos_ < text_.size()) {
      if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }
  bool atEnd() {
    skipSpace();
    return pos_ >= text_.size();
  }
  char peek() {
    skipSpace();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }
  bool startsWith(std::string_view s) {
    skipSpace();
    return text_.substr(pos_, s.size()) == s;
  }
  bool accept(std::string_view s) {
    if (!startsWith(s)) return false;
    pos_ += s.size();
    return true;
  }
  void expect(std::string_view s) {
    if (!accept(s)) fail("expected '" + std::string(s) + "'");
  }
  static bool isIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }
  std::string identifier() {
    skipSpace();
    std::size_t start = pos_;
    while (pos_ < text_.size() && isIdentChar(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }
  // Raw token up to whitespace or a delimiter.
  std::string token() {
    skipSpace();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != '[' && text_[pos_] != ']' &&
           text_[pos_] != ',')
      ++pos_;
    if (start == pos_) fail("expected token");
    return std::string(text_.substr(start, pos_ - start));
  }
  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }
  std::size_t position() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

namespace detail {

// Parses a formula; if `hole` is non-null the hole token "[.]" is accepted
// once and its path (root-first, 0 = left/body, 1 = right) recorded.
struct HoleRecord {
  bool seen = false;
  std::vector<int> path;
};

inline Formula parseFormulaAt(TextCursor& in, HoleRecord* hole, std::vector<int>& path) {
  if (hole && in.accept("[.]")) {
    if (hole->seen) in.fail("context has more than one hole");
    hole->seen = true;
    hole->path = path;
    return Formula::atom("[.]");
  }
  if (in.accept("[]")) {
    path.push_back(0);
    Formula body = parseFormulaAt(in, hole, path);
    path.pop_back();
    return Formula::box(std::move(body));
  }
  if (in.accept("<>")) {
    path.push_back(0);
    Formula body = parseFormulaAt(in, hole, path);
    path.pop_back();
    return Formula::diamond(std::move(body));
  }
  if (in.accept("(")) {
    path.push_back(0);
    Formula left = parseFormulaAt(in, hole, path);
    path.pop_back();
    bool isPar;
    if (in.accept("%"))
      isPar = true;
    else if (in.accept("*"))
      isPar = false;
    else
      in.fail("expected '%' or '*'");
    path.push_back(1);
    Formula right = parseFormulaAt(in, hole, path);
    path.pop_back();
    in.expect(")");
    return isPar ? Formula::par(std::move(left), std::move(right))
                 : Formula::tensor(std::move(left), std::move(right));
  }
  if (in.accept("~")) return Formula::atom(in.identifier(), Polarity::Negative);
  if (!TextCursor::isIdentChar(in.peek())) in.fail("expected formula");
  return Formula::atom(in.identifier(), Polarity::Positive);
}

}  // namespace detail

inline Formula parseFormula(TextCursor& in) {
  std::vector<int> path;
  return detail::parseFormulaAt(in, nullptr, path);
}

inline Formula parseFormula(std::string_view text) {
  TextCursor in(text);
  Formula f = parseFormula(in);
  if (!in.atEnd()) in.fail("trailing input after formula");
  return f;
}

// ---------------------------------------------------------------------------
// Contexts.

class Context {
 public:
  enum class Side : std::uint8_t { Left, Right };

  // One constructor on the path from the root to the hole. `sibling` is the
  // other operand of a binary connective; unused for modal frames.
  struct Frame {
    Formula::Kind kind;
    Side side = Side::Left;
    std::optional<Formula> sibling;

    bool isModal() const { return kind == Formula::Kind::Box || kind == Formula::Kind::Diamond; }
    friend bool operator==(const Frame& a, const Frame& b) {
      return a.kind == b.kind && a.side == b.side && a.sibling == b.sibling;
    }
  };

  Context() = default;
  static Context hole() { return Context(); }

  const std::vector<Frame>& frames() const { return frames_; }
  bool isHole() const { return frames_.empty(); }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& f : frames_) d += f.isModal() ? 1 : 0;
    return d;
  }

  Formula subst(const Formula& a) const {
    Formula f = a;
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      switch (it->kind) {
        case Formula::Kind::Box:
          f = Formula::box(std::move(f));
          break;
        case Formula::Kind::Diamond:
          f = Formula::diamond(std::move(f));
          break;
        case Formula::Kind::Par:
          f = it->side == Side::Left ? Formula::par(std::move(f), *it->sibling)
                                     : Formula::par(*it->sibling, std::move(f));
          break;
        case Formula::Kind::Tensor:
          f = it->side == Side::Left ? Formula::tensor(std::move(f), *it->sibling)
                                     : Formula::tensor(*it->sibling, std::move(f));
          break;
        case Formula::Kind::Atom:
          break;
      }
    }
    return f;
  }

  Context dual() const {
    Context c;
    c.frames_.reserve(frames_.size());
    for (const auto& f : frames_) {
      Frame d = f;
      switch (f.kind) {
        case Formula::Kind::Box:
          d.kind = Formula::Kind::Diamond;
          break;
        case Formula::Kind::Diamond:
          d.kind = Formula::Kind::Box;
          break;
        case Formula::Kind::Par:
          d.kind = Formula::Kind::Tensor;
          d.sibling = f.sibling->dual();
          break;
        case Formula::Kind::Tensor:
          d.kind = Formula::Kind::Par;
          d.sibling = f.sibling->dual();
          break;
        case Formula::Kind::Atom:
          break;
      }
      c.frames_.push_back(std::move(d));
    }
    return c;
  }

  // The atom sitting at the hole position of `f`, if this context fits `f`.
  std::optional<Atom> atomIn(const Formula& f) const {
    const Formula* cur = &f;
    for (const auto& fr : frames_) {
      if (cur->kind() != fr.kind) return std::nullopt;
      if (fr.isModal()) {
        cur = &cur->body();
      } else {
        const Formula& other = fr.side == Side::Left ? cur->right() : cur->left();
        if (other != *fr.sibling) return std::nullopt;
        cur = fr.side == Side::Left ? &cur->left() : &cur->right();
      }
    }
    if (!cur->isAtom()) return std::nullopt;
    return cur->atomValue();
  }

  // Positive iff A = C[alpha], negative iff A = C[~alpha].
  std::optional<Polarity> polarityFor(const Formula& f) const {
    auto a = atomIn(f);
    if (!a) return std::nullopt;
    return a->polarity;
  }

  // Outermost-frame manipulation used by the machine transitions.
  const Frame& outer() const { return frames_.front(); }
  Context withoutOuter(std::size_t n = 1) const {
    Context c;
    c.frames_.assign(frames_.begin() + static_cast<std::ptrdiff_t>(n), frames_.end());
    return c;
  }
  Context withOuter(Frame f) const {
    Context c;
    c.frames_.reserve(frames_.size() + 1);
    c.frames_.push_back(std::move(f));
    c.frames_.insert(c.frames_.end(), frames_.begin(), frames_.end());
    return c;
  }
  Context withOuterModal(Modality m, std::size_t n) const {
    Context c;
    Frame fr{m == Modality::Box ? Formula::Kind::Box : Formula::Kind::Diamond, Side::Left,
             std::nullopt};
    c.frames_.assign(n, fr);
    c.frames_.insert(c.frames_.end(), frames_.begin(), frames_.end());
    return c;
  }
  // True iff the n outermost frames all carry modality m.
  bool hasOuterModal(Modality m, std::size_t n) const {
    if (frames_.size() < n) return false;
    auto k = m == Modality::Box ? Formula::Kind::Box : Formula::Kind::Diamond;
    for (std::size_t i = 0; i < n; ++i)
      if (frames_[i].kind != k) return false;
    return true;
  }

  // Builds the context of `f` whose hole follows `path` (0 = left/body,
  // 1 = right). The path must end at an atom.
  static Context at(const Formula& f, const std::vector<int>& path) {
    Context c;
    const Formula* cur = &f;
    for (int step : path) {
      if (cur->isModal()) {
        if (step != 0) throw PreconditionError("context path: modal node has a single child");
        c.frames_.push_back(Frame{cur->kind(), Side::Left, std::nullopt});
        cur = &cur->body();
      } else if (cur->isBinary()) {
        if (step != 0 && step != 1) throw PreconditionError("context path: bad step");
        Side s = step == 0 ? Side::Left : Side::Right;
        c.frames_.push_back(Frame{cur->kind(), s, step == 0 ? cur->right() : cur->left()});
        cur = step == 0 ? &cur->left() : &cur->right();
      } else {
        throw PreconditionError("context path descends below an atom");
      }
    }
    if (!cur->isAtom()) throw PreconditionError("context path does not end at an atom");
    return c;
  }

  friend bool operator==(const Context& a, const Context& b) { return a.frames_ == b.frames_; }

 private:
  std::vector<Frame> frames_;
};

inline std::string printContext(const Context& c) {
  // Render with a placeholder atom, then splice the hole marker in.
  std::string out;
  std::string tail;
  for (const auto& fr : c.frames()) {
    switch (fr.kind) {
      case Formula::Kind::Box:
        out += "[]";
        break;
      case Formula::Kind::Diamond:
        out += "<>";
        break;
      case Formula::Kind::Par:
      case Formula::Kind::Tensor: {
        const char* op = fr.kind == Formula::Kind::Par ? " % " : " * ";
        out += '(';
        if (fr.side == Context::Side::Right) {
          printFormula(*fr.sibling, out);
          out += op;
          tail = ")" + tail;
        } else {
          tail = std::string(op) + printFormula(*fr.sibling) + ")" + tail;
        }
        break;
      }
      case Formula::Kind::Atom:
        break;
    }
  }
  return out + "[.]" + tail;
}

// Parses a context literal such as "<><>([.] % a)".
inline Context parseContext(std::string_view text) {
  TextCursor in(text);
  detail::HoleRecord hole;
  std::vector<int> path;
  Formula f = detail::parseFormulaAt(in, &hole, path);
  if (!in.atEnd()) in.fail("trailing input after context");
  if (!hole.seen) throw SyntaxError("context has no hole", 0);
  return Context::at(f, hole.path);
}

struct ContextEntry {
  Context context;
  Polarity polarity;
  std::vector<int> path;
};

// One entry per atom occurrence of f, left to right.
inline std::vector<ContextEntry> contextsFor(const Formula& f) {
  std::vector<ContextEntry> out;
  std::vector<int> path;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.isAtom()) {
      out.push_back(ContextEntry{Context::at(f, path), g.polarity(), path});
      return;
    }
    path.push_back(0);
    walk(g.isModal() ? g.body() : g.left());
    path.pop_back();
    if (g.isBinary()) {
      path.push_back(1);
      walk(g.right());
      path.pop_back();
    }
  };
  walk(f);
  return out;
}

// ---------------------------------------------------------------------------
// Stacks over {box, diamond}; the back of the vector is the top.

class Stack {
 public:
  Stack() = default;
  explicit Stack(std::vector<Modality> symbols) : symbols_(std::move(symbols)) {}

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  const std::vector<Modality>& symbols() const { return symbols_; }

  void push(Modality m, std::size_t n = 1) { symbols_.insert(symbols_.end(), n, m); }
  // The common symbol of the n topmost entries, if they agree.
  std::optional<Modality> uniformTop(std::size_t n) const {
    if (n == 0 || symbols_.size() < n) return std::nullopt;
    Modality m = symbols_.back();
    for (std::size_t i = symbols_.size() - n; i < symbols_.size(); ++i)
      if (symbols_[i] != m) return std::nullopt;
    return m;
  }
  void pop(std::size_t n = 1) {
    if (symbols_.size() < n) throw PreconditionError("stack underflow");
    symbols_.resize(symbols_.size() - n);
  }

  std::string str() const {
    std::string s;
    for (auto m : symbols_) s += symbol(m);
    return s.empty() ? "e" : s;
  }

  friend bool operator==(const Stack&, const Stack&) = default;

 private:
  std::vector<Modality> symbols_;
};

}  // namespace qmll
