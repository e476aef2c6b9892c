#include <algorithm>
#include <cctype>

#include "dtsat/xpath.hpp"

namespace dtsat {

namespace {

QueryPtr make_query(Query::Kind k, QueryPtr a = nullptr, QueryPtr b = nullptr, QualifierPtr u = nullptr) {
  auto q = std::make_shared<Query>();
  q->kind = k;
  q->lhs = std::move(a);
  q->rhs = std::move(b);
  q->qual = std::move(u);
  return q;
}

}  // namespace

QueryPtr Query::self() { return make_query(Kind::Self); }
QueryPtr Query::child() { return make_query(Kind::Child); }
QueryPtr Query::next_sibling() { return make_query(Kind::NextSib); }
QueryPtr Query::child_star() { return make_query(Kind::ChildStar); }
QueryPtr Query::next_sibling_star() { return make_query(Kind::NextSibStar); }
QueryPtr Query::concat(QueryPtr a, QueryPtr b) { return make_query(Kind::Concat, std::move(a), std::move(b)); }
QueryPtr Query::union_(QueryPtr a, QueryPtr b) { return make_query(Kind::Union, std::move(a), std::move(b)); }
QueryPtr Query::filter(QueryPtr p, QualifierPtr u) {
  return make_query(Kind::Filter, std::move(p), nullptr, std::move(u));
}

QualifierPtr Qualifier::negate(QualifierPtr u) {
  auto r = std::make_shared<Qualifier>();
  r->kind = Kind::Not;
  r->lhs = std::move(u);
  return r;
}

QualifierPtr Qualifier::conj(QualifierPtr a, QualifierPtr b) {
  auto r = std::make_shared<Qualifier>();
  r->kind = Kind::And;
  r->lhs = std::move(a);
  r->rhs = std::move(b);
  return r;
}

QualifierPtr Qualifier::exists(QueryPtr p) {
  auto r = std::make_shared<Qualifier>();
  r->kind = Kind::Exists;
  r->query = std::move(p);
  return r;
}

QualifierPtr Qualifier::type_test(std::string a) {
  auto r = std::make_shared<Qualifier>();
  r->kind = Kind::Type;
  r->type = std::move(a);
  return r;
}

QualifierPtr Qualifier::attr_cmp(std::string attr1, Relation rel, Head head, QueryPtr tail, std::string attr2) {
  auto r = std::make_shared<Qualifier>();
  r->kind = Kind::AttrCmp;
  r->attr1 = std::move(attr1);
  r->relation = rel;
  r->head = head;
  r->query = head == Head::Self ? nullptr : (tail ? std::move(tail) : Query::self());
  r->attr2 = std::move(attr2);
  return r;
}

// ---------------------------------------------------------------- printing

namespace {

// 0 union, 1 concat, 2 postfix
std::string print(const Query& q, int ctx) {
  using K = Query::Kind;
  auto wrap = [&](int prec, std::string s) { return prec < ctx ? "(" + s + ")" : s; };
  switch (q.kind) {
    case K::Self: return "e";
    case K::Child: return "c";
    case K::NextSib: return "rs";
    case K::ChildStar: return "c*";
    case K::NextSibStar: return "rs*";
    case K::Concat: return wrap(1, print(*q.lhs, 1) + "/" + print(*q.rhs, 2));
    case K::Union: return wrap(0, print(*q.lhs, 0) + " | " + print(*q.rhs, 1));
    case K::Filter: return print(*q.lhs, 2) + "[" + to_string(*q.qual) + "]";
  }
  return "";
}

// 0 and, 1 unary
std::string print(const Qualifier& u, int ctx) {
  using K = Qualifier::Kind;
  switch (u.kind) {
    case K::Not: return "!" + print(*u.lhs, 1);
    case K::And: {
      std::string s = print(*u.lhs, 0) + " & " + print(*u.rhs, 1);
      return ctx > 0 ? "(" + s + ")" : s;
    }
    case K::Exists: {
      std::string s = print(*u.query, 1) + "?";
      return ctx > 0 ? "(" + s + ")" : s;
    }
    case K::Type: return u.type;
    case K::AttrCmp: {
      std::string rhs;
      switch (u.head) {
        case Qualifier::Head::Self: rhs = "e"; break;
        case Qualifier::Head::Child: rhs = "c"; break;
        case Qualifier::Head::NextSib: rhs = "rs"; break;
      }
      if (u.head != Qualifier::Head::Self && u.query->kind != Query::Kind::Self)
        rhs = "(" + rhs + "/" + print(*u.query, 1) + ")";
      std::string s = "@" + u.attr1 + (u.relation == Qualifier::Relation::Eq ? " = " : " != ") + rhs + "/@" + u.attr2;
      return ctx > 0 ? "(" + s + ")" : s;
    }
  }
  return "";
}

}  // namespace

std::string to_string(const Query& q) { return print(q, 0); }
std::string to_string(const Qualifier& u) { return print(u, 0); }

// ---------------------------------------------------------------- parsing

ParseError::ParseError(const std::string& what, std::size_t position)
    : ValidationError(what + " at position " + std::to_string(position)), position_(position) {}

namespace {

struct Token {
  enum class Kind { Ident, Sym, End } kind = Kind::End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      if (j < s.size() && s[j] == '*') ++j;
      t.kind = Token::Kind::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (s.compare(i, 2, "!=") == 0 || s.compare(i, 2, "::") == 0) {
      t.kind = Token::Kind::Sym;
      t.text = s.substr(i, 2);
      i += 2;
    } else if (std::string("/|[]()?!&@=").find(c) != std::string::npos) {
      t.kind = Token::Kind::Sym;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = s.size();
  out.push_back(end);
  return out;
}

bool is_axis(const std::string& w) {
  return w == "e" || w == "c" || w == "rs" || w == "c*" || w == "cs*" || w == "rs*";
}

bool is_backward_axis(const std::string& w) {
  static const std::vector<std::string> kBackward = {"p",        "p*",       "ls",        "ls*",
                                                     "parent",   "ancestor", "ancestor-or-self",
                                                     "preceding", "preceding-sibling"};
  return std::find(kBackward.begin(), kBackward.end(), w) != kBackward.end();
}

class Parser {
 public:
  Parser(const std::string& text, const XmlSignature& sig) : toks_(tokenize(text)), sig_(sig) {}

  QueryPtr whole_query() {
    auto q = query();
    expect_end();
    return q;
  }
  QualifierPtr whole_qualifier() {
    auto u = qualifier();
    expect_end();
    return u;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_sym(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Sym && peek(k).text == s;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, peek().pos); }
  void expect(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }
  void expect_end() const {
    if (peek().kind != Token::Kind::End) fail("unexpected '" + peek().text + "'");
  }

  void check_forward(const Token& t) const {
    if (t.kind != Token::Kind::Ident) return;
    bool axis_syntax = pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == Token::Kind::Sym && toks_[pos_ + 1].text == "::";
    if (is_backward_axis(t.text) || axis_syntax)
      throw ForwardnessError("axis '" + t.text + (axis_syntax ? "::" : "") + "' at position " +
                             std::to_string(t.pos) + " is not forward");
  }

  QueryPtr query() {
    QueryPtr q = concat();
    while (at_sym("|")) {
      ++pos_;
      q = Query::union_(q, concat());
    }
    return q;
  }

  QueryPtr concat() {
    QueryPtr q = postfix();
    while (at_sym("/") && !at_sym("@", 1)) {
      ++pos_;
      q = Query::concat(q, postfix());
    }
    return q;
  }

  QueryPtr postfix() {
    QueryPtr q = primary();
    while (at_sym("[")) {
      ++pos_;
      QualifierPtr u = qualifier();
      expect("]");
      q = Query::filter(q, u);
    }
    return q;
  }

  QueryPtr primary() {
    const Token& t = peek();
    if (at_sym("(")) {
      ++pos_;
      QueryPtr q = query();
      expect(")");
      return q;
    }
    check_forward(t);
    if (t.kind != Token::Kind::Ident || !is_axis(t.text)) fail("expected an axis (e, c, rs, c*, rs*)");
    ++pos_;
    if (t.text == "e") return Query::self();
    if (t.text == "c") return Query::child();
    if (t.text == "rs") return Query::next_sibling();
    if (t.text == "rs*") return Query::next_sibling_star();
    return Query::child_star();
  }

  QualifierPtr qualifier() {
    QualifierPtr u = unary();
    while (at_sym("&")) {
      ++pos_;
      u = Qualifier::conj(u, unary());
    }
    return u;
  }

  QualifierPtr unary() {
    if (at_sym("!")) {
      ++pos_;
      return Qualifier::negate(unary());
    }
    return atom();
  }

  std::string attribute() {
    expect("@");
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) fail("expected an attribute name");
    sig_.attribute_letter(t.text);
    ++pos_;
    return t.text;
  }

  QualifierPtr comparison(std::string attr1) {
    Qualifier::Relation rel;
    if (at_sym("="))
      rel = Qualifier::Relation::Eq;
    else if (at_sym("!="))
      rel = Qualifier::Relation::Neq;
    else
      fail("expected '=' or '!='");
    ++pos_;
    if (at_sym("@")) return Qualifier::attr_cmp(attr1, rel, Qualifier::Head::Self, nullptr, attribute());
    std::size_t start = peek().pos;
    QueryPtr path = concat();
    if (!at_sym("/")) fail("expected '/@attribute'");
    ++pos_;
    std::string attr2 = attribute();

    std::vector<QueryPtr> steps;
    auto flatten = [&](auto&& self, const QueryPtr& q) -> void {
      if (q->kind == Query::Kind::Concat) {
        self(self, q->lhs);
        self(self, q->rhs);
      } else {
        steps.push_back(q);
      }
    };
    flatten(flatten, path);
    while (steps.size() > 1 && steps.front()->kind == Query::Kind::Self) steps.erase(steps.begin());
    const auto head = steps.front()->kind;
    if (steps.size() == 1 && head == Query::Kind::Self)
      return Qualifier::attr_cmp(attr1, rel, Qualifier::Head::Self, nullptr, attr2);
    if (head != Query::Kind::Child && head != Query::Kind::NextSib)
      throw ForwardnessError("comparison path at position " + std::to_string(start) +
                             " must be e, c/..., or rs/...");
    QueryPtr tail = Query::self();
    for (std::size_t i = 1; i < steps.size(); ++i) tail = i == 1 ? steps[i] : Query::concat(tail, steps[i]);
    return Qualifier::attr_cmp(attr1, rel, head == Query::Kind::Child ? Qualifier::Head::Child : Qualifier::Head::NextSib,
                               tail, attr2);
  }

  QualifierPtr atom() {
    const Token& t = peek();
    if (at_sym("@")) return comparison(attribute());
    if (t.kind == Token::Kind::Ident && !is_axis(t.text)) {
      check_forward(t);
      sig_.type_letter(t.text);
      ++pos_;
      return Qualifier::type_test(t.text);
    }
    if (t.kind == Token::Kind::Ident) return after_query(query(), t.pos);
    if (at_sym("(")) {
      const std::size_t save = pos_;
      try {
        QueryPtr q = query();
        return after_query(q, t.pos);
      } catch (const ForwardnessError&) {
        throw;
      } catch (const ValidationError&) {
        pos_ = save;
      }
      ++pos_;
      QualifierPtr u = qualifier();
      expect(")");
      return u;
    }
    fail("expected a qualifier");
  }

  QualifierPtr after_query(const QueryPtr& q, std::size_t start) {
    if (at_sym("?")) {
      ++pos_;
      return Qualifier::exists(q);
    }
    if (at_sym("/") && at_sym("@", 1)) {
      if (q->kind != Query::Kind::Self)
        throw ForwardnessError("left side of the comparison at position " + std::to_string(start) + " must be e");
      ++pos_;
      return comparison(attribute());
    }
    fail("expected '?' after a query");
  }

  std::vector<Token> toks_;
  const XmlSignature& sig_;
  std::size_t pos_ = 0;
};

}  // namespace

QueryPtr parse_query(const std::string& text, const XmlSignature& sig) { return Parser(text, sig).whole_query(); }

QualifierPtr parse_qualifier(const std::string& text, const XmlSignature& sig) {
  return Parser(text, sig).whole_qualifier();
}

// ---------------------------------------------------------------- classification

std::string to_string(Fragment f) {
  switch (f) {
    case Fragment::Safety: return "safety";
    case Fragment::CoSafety: return "co-safety";
    case Fragment::Both: return "both";
    case Fragment::Neither: return "neither";
  }
  return "";
}

namespace {

struct Parities {
  bool odd = false;
  bool even = false;
};

void scan(const Query& q, bool negated, Parities& p);

void scan(const Qualifier& u, bool negated, Parities& p) {
  switch (u.kind) {
    case Qualifier::Kind::Not: scan(*u.lhs, !negated, p); break;
    case Qualifier::Kind::And:
      scan(*u.lhs, negated, p);
      scan(*u.rhs, negated, p);
      break;
    case Qualifier::Kind::Exists: scan(*u.query, negated, p); break;
    case Qualifier::Kind::Type: break;
    case Qualifier::Kind::AttrCmp:
      if (u.head == Qualifier::Head::Child) (negated ? p.odd : p.even) = true;
      if (u.query) scan(*u.query, negated, p);
      break;
  }
}

void scan(const Query& q, bool negated, Parities& p) {
  switch (q.kind) {
    case Query::Kind::Child:
    case Query::Kind::ChildStar:
    case Query::Kind::NextSibStar: (negated ? p.odd : p.even) = true; break;
    case Query::Kind::Concat:
    case Query::Kind::Union:
      scan(*q.lhs, negated, p);
      scan(*q.rhs, negated, p);
      break;
    case Query::Kind::Filter:
      scan(*q.lhs, negated, p);
      scan(*q.qual, negated, p);
      break;
    default: break;
  }
}

Fragment from(Parities p) {
  if (!p.odd && !p.even) return Fragment::Both;
  if (!p.even) return Fragment::Safety;
  if (!p.odd) return Fragment::CoSafety;
  return Fragment::Neither;
}

}  // namespace

Fragment classify(const Query& q) {
  Parities p;
  scan(q, false, p);
  return from(p);
}

Fragment classify(const Qualifier& u) {
  Parities p;
  scan(u, false, p);
  return from(p);
}

}  // namespace dtsat
