#include <map>

#include "dtsat/xpath.hpp"

namespace dtsat {

namespace {

struct Element {
  int node = -1;
  Letter type = -1;
  std::map<Letter, Datum> atts;
  std::vector<int> children;
  int next = -1;
};

class Index {
 public:
  Index(const DataTree& t, const XmlSignature& sig) : t_(t), sig_(sig) {
    std::string why;
    if (!is_xml_tree(t, sig, &why)) throw ValidationError("not an XML tree: " + why);
    slot(0);
  }

  const std::vector<Element>& elements() const { return elems_; }
  int size() const { return static_cast<int>(elems_.size()); }

 private:
  // Encodes the siblings starting at `s`; returns the element ids.
  std::vector<int> slot(int s) {
    std::vector<int> ids;
    while (!t_.node(s).is_leaf()) {
      const int id = static_cast<int>(elems_.size());
      elems_.emplace_back();
      elems_[static_cast<std::size_t>(id)].node = s;
      elems_[static_cast<std::size_t>(id)].type = t_.node(s).letter;
      if (!ids.empty()) elems_[static_cast<std::size_t>(ids.back())].next = id;
      ids.push_back(id);
      int cur = s;
      while (true) {
        int left = t_.node(cur).child[0];
        const auto& ln = t_.node(left);
        if (ln.is_leaf() || !sig_.is_attribute(ln.letter)) break;
        elems_[static_cast<std::size_t>(id)].atts[ln.letter] = ln.datum;
        cur = left;
      }
      auto kids = slot(t_.node(cur).child[0]);
      elems_[static_cast<std::size_t>(id)].children = std::move(kids);
      s = t_.node(cur).child[1];
    }
    return ids;
  }

  const DataTree& t_;
  const XmlSignature& sig_;
  std::vector<Element> elems_;
};

using Rel = std::vector<std::vector<char>>;
using Set = std::vector<char>;

class Evaluator {
 public:
  Evaluator(const DataTree& t, const XmlSignature& sig) : sig_(sig), idx_(t, sig), n_(idx_.size()) {}

  const Index& index() const { return idx_; }

  Rel query(const Query& q) {
    using K = Query::Kind;
    Rel r = empty();
    const auto& es = idx_.elements();
    switch (q.kind) {
      case K::Self:
        for (int i = 0; i < n_; ++i) r[i][i] = 1;
        break;
      case K::Child:
        for (int i = 0; i < n_; ++i)
          for (int c : es[static_cast<std::size_t>(i)].children) r[i][c] = 1;
        break;
      case K::NextSib:
        for (int i = 0; i < n_; ++i)
          if (es[static_cast<std::size_t>(i)].next >= 0) r[i][es[static_cast<std::size_t>(i)].next] = 1;
        break;
      case K::ChildStar: return star(query(*Query::child()));
      case K::NextSibStar: return star(query(*Query::next_sibling()));
      case K::Concat: return compose(query(*q.lhs), query(*q.rhs));
      case K::Union: {
        r = query(*q.lhs);
        Rel b = query(*q.rhs);
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) r[i][j] |= b[i][j];
        break;
      }
      case K::Filter: {
        r = query(*q.lhs);
        Set s = qual(*q.qual);
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) r[i][j] &= s[j];
        break;
      }
    }
    return r;
  }

  Set qual(const Qualifier& u) {
    using K = Qualifier::Kind;
    Set s(static_cast<std::size_t>(n_), 0);
    const auto& es = idx_.elements();
    switch (u.kind) {
      case K::Not:
        s = qual(*u.lhs);
        for (auto& b : s) b = !b;
        break;
      case K::And: {
        s = qual(*u.lhs);
        Set b = qual(*u.rhs);
        for (int i = 0; i < n_; ++i) s[i] &= b[i];
        break;
      }
      case K::Exists: {
        Rel r = query(*u.query);
        for (int i = 0; i < n_; ++i)
          for (int j = 0; j < n_; ++j) s[i] |= r[i][j];
        break;
      }
      case K::Type: {
        Letter a = sig_.type_letter(u.type);
        for (int i = 0; i < n_; ++i) s[i] = es[static_cast<std::size_t>(i)].type == a;
        break;
      }
      case K::AttrCmp: {
        const Letter a1 = sig_.attribute_letter(u.attr1);
        const Letter a2 = sig_.attribute_letter(u.attr2);
        Rel path;
        switch (u.head) {
          case Qualifier::Head::Self: path = query(*Query::self()); break;
          case Qualifier::Head::Child: path = query(*Query::concat(Query::child(), u.query)); break;
          case Qualifier::Head::NextSib: path = query(*Query::concat(Query::next_sibling(), u.query)); break;
        }
        for (int i = 0; i < n_; ++i) {
          const auto& e = es[static_cast<std::size_t>(i)];
          auto v1 = e.atts.find(a1);
          if (v1 == e.atts.end()) continue;
          for (int j = 0; j < n_ && !s[i]; ++j) {
            if (!path[i][j]) continue;
            const auto& f = es[static_cast<std::size_t>(j)];
            auto v2 = f.atts.find(a2);
            if (v2 == f.atts.end()) continue;
            s[i] = (v1->second == v2->second) == (u.relation == Qualifier::Relation::Eq);
          }
        }
        break;
      }
    }
    return s;
  }

 private:
  Rel empty() const { return Rel(static_cast<std::size_t>(n_), std::vector<char>(static_cast<std::size_t>(n_), 0)); }

  Rel compose(const Rel& a, const Rel& b) const {
    Rel r = empty();
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k)
        if (a[i][k])
          for (int j = 0; j < n_; ++j) r[i][j] |= b[k][j];
    return r;
  }

  Rel star(Rel r) const {
    for (int i = 0; i < n_; ++i) r[i][i] = 1;
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i)
        if (r[i][k])
          for (int j = 0; j < n_; ++j) r[i][j] |= r[k][j];
    return r;
  }

  const XmlSignature& sig_;
  Index idx_;
  int n_;
};

}  // namespace

std::vector<int> element_nodes(const DataTree& t, const XmlSignature& sig) {
  Index idx(t, sig);
  std::vector<int> out;
  for (const auto& e : idx.elements()) out.push_back(e.node);
  return out;
}

NodePairs eval(const DataTree& t, const XmlSignature& sig, const Query& q) {
  Evaluator ev(t, sig);
  Rel r = ev.query(q);
  const auto& es = ev.index().elements();
  NodePairs out;
  for (std::size_t i = 0; i < es.size(); ++i)
    for (std::size_t j = 0; j < es.size(); ++j)
      if (r[i][j]) out.emplace(es[i].node, es[j].node);
  return out;
}

std::set<int> eval_qual(const DataTree& t, const XmlSignature& sig, const Qualifier& u) {
  Evaluator ev(t, sig);
  Set s = ev.qual(u);
  const auto& es = ev.index().elements();
  std::set<int> out;
  for (std::size_t i = 0; i < es.size(); ++i)
    if (s[i]) out.insert(es[i].node);
  return out;
}

bool satisfies(const DataTree& t, const XmlSignature& sig, const Query& q) {
  return eval_qual(t, sig, *Qualifier::exists(std::make_shared<Query>(q))).count(0) > 0;
}

}  // namespace dtsat
