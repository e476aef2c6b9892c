#include "dtsat/formula.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dtsat {

std::vector<int> members(StateSet s) {
  std::vector<int> out;
  while (s) {
    int q = std::countr_zero(s);
    out.push_back(q);
    s &= s - 1;
  }
  return out;
}

struct Formula::Node {
  Kind kind = Kind::False;
  int state = 0;
  int dir = 0;
  Update update = Update::Keep;
  Formula a, b;
  bool hole = false;
};

Formula::Formula() : node_(nullptr) {}

Formula Formula::top() {
  static const auto n = [] {
    auto p = std::make_shared<Node>();
    p->kind = Kind::True;
    return std::shared_ptr<const Node>(p);
  }();
  return Formula(n);
}

Formula Formula::bottom() { return Formula(); }

Formula Formula::hole() {
  static const auto n = [] {
    auto p = std::make_shared<Node>();
    p->kind = Kind::Hole;
    p->hole = true;
    return std::shared_ptr<const Node>(p);
  }();
  return Formula(n);
}

Formula Formula::atom(int state, int dir, Update update) {
  if (state < 0 || state >= kMaxStates) throw ValidationError("atom state out of range");
  if (dir != 0 && dir != 1) throw ValidationError("atom direction must be 0 or 1");
  auto p = std::make_shared<Node>();
  p->kind = Kind::Atom;
  p->state = state;
  p->dir = dir;
  p->update = update;
  return Formula(std::shared_ptr<const Node>(p));
}

Formula Formula::conj(const Formula& a, const Formula& b) {
  if (a.is_false() || b.is_false()) return bottom();
  if (a.is_true()) return b;
  if (b.is_true()) return a;
  auto p = std::make_shared<Node>();
  p->kind = Kind::And;
  p->a = a;
  p->b = b;
  p->hole = a.has_hole() || b.has_hole();
  return Formula(std::shared_ptr<const Node>(p));
}

Formula Formula::disj(const Formula& a, const Formula& b) {
  if (a.is_true() || b.is_true()) return top();
  if (a.is_false()) return b;
  if (b.is_false()) return a;
  auto p = std::make_shared<Node>();
  p->kind = Kind::Or;
  p->a = a;
  p->b = b;
  p->hole = a.has_hole() || b.has_hole();
  return Formula(std::shared_ptr<const Node>(p));
}

Formula Formula::conj(const std::vector<Formula>& fs) {
  Formula r = top();
  for (const auto& f : fs) r = conj(r, f);
  return r;
}

Formula Formula::disj(const std::vector<Formula>& fs) {
  Formula r = bottom();
  for (const auto& f : fs) r = disj(r, f);
  return r;
}

Formula::Kind Formula::kind() const { return node_ ? node_->kind : Kind::False; }
int Formula::state() const { return node_->state; }
int Formula::dir() const { return node_->dir; }
Update Formula::update() const { return node_->update; }
const Formula& Formula::lhs() const { return node_->a; }
const Formula& Formula::rhs() const { return node_->b; }
bool Formula::has_hole() const { return node_ && node_->hole; }

Formula Formula::dual() const {
  switch (kind()) {
    case Kind::True: return bottom();
    case Kind::False: return top();
    case Kind::Atom:
    case Kind::Hole: return *this;
    case Kind::And: {
      auto p = std::make_shared<Node>(*node_);
      p->kind = Kind::Or;
      p->a = lhs().dual();
      p->b = rhs().dual();
      return Formula(std::shared_ptr<const Node>(p));
    }
    case Kind::Or: {
      auto p = std::make_shared<Node>(*node_);
      p->kind = Kind::And;
      p->a = lhs().dual();
      p->b = rhs().dual();
      return Formula(std::shared_ptr<const Node>(p));
    }
  }
  return *this;
}

Formula Formula::map_states(const std::function<int(int)>& f) const {
  switch (kind()) {
    case Kind::Atom: return atom(f(state()), dir(), update());
    case Kind::And: return conj(lhs().map_states(f), rhs().map_states(f));
    case Kind::Or: return disj(lhs().map_states(f), rhs().map_states(f));
    default: return *this;
  }
}

Formula Formula::replace_hole(const Formula& by) const {
  if (!has_hole()) return *this;
  switch (kind()) {
    case Kind::Hole: return by;
    case Kind::And: return conj(lhs().replace_hole(by), rhs().replace_hole(by));
    case Kind::Or: return disj(lhs().replace_hole(by), rhs().replace_hole(by));
    default: return *this;
  }
}

void Formula::for_each_atom(const std::function<void(int, int, Update)>& f) const {
  switch (kind()) {
    case Kind::Atom: f(state(), dir(), update()); break;
    case Kind::And:
    case Kind::Or:
      lhs().for_each_atom(f);
      rhs().for_each_atom(f);
      break;
    default: break;
  }
}

std::string Formula::to_sexpr(const std::vector<std::string>& names) const {
  switch (kind()) {
    case Kind::True: return "true";
    case Kind::False: return "false";
    case Kind::Hole: return "hole";
    case Kind::Atom:
      return "(atom " + names.at(static_cast<std::size_t>(state())) + " " + std::to_string(dir()) +
             (update() == Update::Store ? " store)" : " keep)");
    case Kind::And: return "(and " + lhs().to_sexpr(names) + " " + rhs().to_sexpr(names) + ")";
    case Kind::Or: return "(or " + lhs().to_sexpr(names) + " " + rhs().to_sexpr(names) + ")";
  }
  return "false";
}

namespace {

class SexprParser {
 public:
  SexprParser(const std::string& s, const std::vector<std::string>& names) : s_(s), names_(names) {}

  Formula parse() {
    Formula f = formula();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw ValidationError("formula: " + what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string token() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    if (start == pos_) fail("expected a token");
    return s_.substr(start, pos_ - start);
  }
  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  Formula formula() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      std::string head = token();
      Formula r;
      if (head == "and" || head == "or") {
        Formula a = formula();
        Formula b = formula();
        r = head == "and" ? Formula::conj(a, b) : Formula::disj(a, b);
      } else if (head == "atom") {
        std::string q = token();
        auto it = std::find(names_.begin(), names_.end(), q);
        if (it == names_.end()) fail("unknown state '" + q + "'");
        std::string d = token();
        if (d != "0" && d != "1") fail("direction must be 0 or 1");
        std::string u = token();
        if (u != "store" && u != "keep") fail("update must be store or keep");
        r = Formula::atom(static_cast<int>(it - names_.begin()), d == "1" ? 1 : 0,
                          u == "store" ? Update::Store : Update::Keep);
      } else {
        fail("unknown head '" + head + "'");
      }
      expect(')');
      return r;
    }
    std::string t = token();
    if (t == "true") return Formula::top();
    if (t == "false") return Formula::bottom();
    if (t == "hole") return Formula::hole();
    fail("unexpected token '" + t + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula Formula::parse_sexpr(const std::string& text, const std::vector<std::string>& names) {
  return SexprParser(text, names).parse();
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (kind() != o.kind()) return false;
  switch (kind()) {
    case Kind::True:
    case Kind::False:
    case Kind::Hole: return true;
    case Kind::Atom: return state() == o.state() && dir() == o.dir() && update() == o.update();
    default: return lhs() == o.lhs() && rhs() == o.rhs();
  }
}

std::size_t QuadrupleHash::operator()(const Quadruple& q) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (auto s : q.sets) h = (h ^ std::hash<std::uint64_t>{}(s)) * 0x100000001b3ULL;
  return h;
}

bool satisfies(const Quadruple& r, const Formula& f, std::optional<bool> hole) {
  switch (f.kind()) {
    case Formula::Kind::True: return true;
    case Formula::Kind::False: return false;
    case Formula::Kind::Hole:
      if (!hole) throw ValidationError("hole without an interpretation");
      return *hole;
    case Formula::Kind::Atom: return contains(r.get(f.dir(), f.update()), f.state());
    case Formula::Kind::And: return satisfies(r, f.lhs(), hole) && satisfies(r, f.rhs(), hole);
    case Formula::Kind::Or: return satisfies(r, f.lhs(), hole) || satisfies(r, f.rhs(), hole);
  }
  return false;
}

namespace {

void minimize(std::vector<Quadruple>& v) {
  std::sort(v.begin(), v.end(), [](const Quadruple& a, const Quadruple& b) {
    int sa = 0, sb = 0;
    for (auto s : a.sets) sa += set_size(s);
    for (auto s : b.sets) sb += set_size(s);
    return sa != sb ? sa < sb : a < b;
  });
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<Quadruple> out;
  for (const auto& q : v) {
    bool dominated = std::any_of(out.begin(), out.end(), [&](const Quadruple& o) { return o.leq(q); });
    if (!dominated) out.push_back(q);
  }
  v = std::move(out);
}

std::vector<Quadruple> models(const Formula& f, std::optional<bool> hole) {
  switch (f.kind()) {
    case Formula::Kind::True: return {Quadruple{}};
    case Formula::Kind::False: return {};
    case Formula::Kind::Hole:
      if (!hole) throw ValidationError("minimal_models: formula contains a hole");
      return *hole ? std::vector<Quadruple>{Quadruple{}} : std::vector<Quadruple>{};
    case Formula::Kind::Atom: {
      Quadruple q;
      q.at(f.dir(), f.update()) = singleton(f.state());
      return {q};
    }
    case Formula::Kind::Or: {
      auto a = models(f.lhs(), hole);
      auto b = models(f.rhs(), hole);
      a.insert(a.end(), b.begin(), b.end());
      minimize(a);
      return a;
    }
    case Formula::Kind::And: {
      auto a = models(f.lhs(), hole);
      if (a.empty()) return {};
      auto b = models(f.rhs(), hole);
      std::vector<Quadruple> out;
      out.reserve(a.size() * b.size());
      for (const auto& x : a)
        for (const auto& y : b) out.push_back(x.join(y));
      minimize(out);
      return out;
    }
  }
  return {};
}

}  // namespace

std::vector<Quadruple> minimal_models(const Formula& f, std::optional<bool> hole) {
  return models(f, hole);
}

}  // namespace dtsat
