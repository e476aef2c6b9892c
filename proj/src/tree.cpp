#include "dtsat/tree.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace dtsat {

Letter letter_index(const Alphabet& alphabet, const std::string& name) {
  auto it = std::find(alphabet.begin(), alphabet.end(), name);
  if (it == alphabet.end()) throw ValidationError("unknown letter '" + name + "'");
  return static_cast<Letter>(it - alphabet.begin());
}

DataTree::DataTree(Alphabet alphabet) : alphabet_(std::move(alphabet)) { nodes_.emplace_back(); }

int DataTree::add_leaf() {
  nodes_.emplace_back();
  return size() - 1;
}

void DataTree::expand(int n, Letter letter, Datum datum) {
  int l = add_leaf();
  int r = add_leaf();
  Node& nd = node(n);
  nd.letter = letter;
  nd.datum = datum;
  nd.child[0] = l;
  nd.child[1] = r;
  nd.truncated = false;
}

int DataTree::nonleaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return !n.is_leaf(); }));
}

std::vector<int> DataTree::nonleaf_nodes() const {
  std::vector<int> out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (node(n).is_leaf()) continue;
    out.push_back(n);
    stack.push_back(node(n).child[1]);
    stack.push_back(node(n).child[0]);
  }
  return out;
}

std::vector<std::string> DataTree::paths() const {
  std::vector<std::string> out(nodes_.size());
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (node(n).is_leaf()) continue;
    for (int d = 0; d < 2; ++d) {
      out[static_cast<std::size_t>(node(n).child[d])] = out[static_cast<std::size_t>(n)] + char('0' + d);
      stack.push_back(node(n).child[d]);
    }
  }
  return out;
}

int DataTree::depth() const {
  int best = 0;
  for (const auto& p : paths()) best = std::max(best, static_cast<int>(p.size()));
  return best;
}

DataTree DataTree::erase_data() const {
  DataTree t = *this;
  for (auto& n : t.nodes_) n.datum = 0;
  return t;
}

bool DataTree::operator==(const DataTree& other) const {
  if (alphabet_ != other.alphabet_) return false;
  std::function<bool(int, int)> eq = [&](int a, int b) {
    const Node& x = node(a);
    const Node& y = other.node(b);
    if (x.is_leaf() != y.is_leaf()) return false;
    if (x.is_leaf()) return true;
    if (x.letter != y.letter || x.datum != y.datum) return false;
    return eq(x.child[0], y.child[0]) && eq(x.child[1], y.child[1]);
  };
  return eq(0, 0);
}

DataTree validate_tree(const Alphabet& alphabet, const std::vector<RawNode>& raw) {
  std::map<std::string, const RawNode*> by_path;
  for (const auto& r : raw) {
    if (r.path.find_first_not_of("01") != std::string::npos)
      throw ValidationError("path '" + r.path + "' is not a bit-string");
    if (!by_path.emplace(r.path, &r).second) throw ValidationError("duplicate node '" + r.path + "'");
  }
  if (!by_path.count("")) throw ValidationError("missing root node");
  if (by_path.size() <= 1) throw ValidationError("a tree needs more than one node");
  for (const auto& [path, r] : by_path) {
    if (!path.empty() && !by_path.count(path.substr(0, path.size() - 1)))
      throw ValidationError("node set is not prefix-closed at '" + path + "'");
    bool c0 = by_path.count(path + "0") > 0;
    bool c1 = by_path.count(path + "1") > 0;
    std::string shown = path.empty() ? "ε" : path;
    if (c0 != c1) throw ValidationError("node " + shown + " has exactly one child");
    bool nonleaf = c0;
    if (nonleaf && (!r->letter || !r->datum))
      throw ValidationError("nonleaf node " + shown + " lacks a letter or datum");
    if (!nonleaf && (r->letter || r->datum))
      throw ValidationError("leaf node " + shown + " carries a label");
    if (r->letter) letter_index(alphabet, *r->letter);
  }
  DataTree t(alphabet);
  std::function<void(int, const std::string&)> build = [&](int n, const std::string& path) {
    const RawNode* r = by_path.at(path);
    if (!by_path.count(path + "0")) {
      t.node(n).truncated = r->truncated;
      return;
    }
    t.expand(n, letter_index(alphabet, *r->letter), *r->datum);
    int l = t.node(n).child[0];
    int rr = t.node(n).child[1];
    build(l, path + "0");
    build(rr, path + "1");
  };
  build(0, "");
  return t;
}

std::vector<RawNode> to_raw(const DataTree& t) {
  std::vector<RawNode> out;
  auto paths = t.paths();
  std::vector<int> order;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    order.push_back(n);
    if (!t.node(n).is_leaf()) {
      stack.push_back(t.node(n).child[1]);
      stack.push_back(t.node(n).child[0]);
    }
  }
  for (int n : order) {
    RawNode r;
    r.path = paths[static_cast<std::size_t>(n)];
    const auto& nd = t.node(n);
    if (!nd.is_leaf()) {
      r.letter = t.alphabet()[static_cast<std::size_t>(nd.letter)];
      r.datum = nd.datum;
    }
    r.truncated = nd.truncated;
    out.push_back(std::move(r));
  }
  return out;
}

DataTree l_prefix(const DataTree& t, int l) {
  if (l < 1) throw ValidationError("l_prefix needs l >= 1");
  DataTree out(t.alphabet());
  std::function<void(int, int, int)> copy = [&](int src, int dst, int len) {
    const auto& s = t.node(src);
    if (s.is_leaf()) {
      out.node(dst).truncated = s.truncated;
      return;
    }
    if (len == l) {
      out.node(dst).truncated = true;
      return;
    }
    out.expand(dst, s.letter, s.datum);
    int c0 = out.node(dst).child[0];
    int c1 = out.node(dst).child[1];
    copy(s.child[0], c0, len + 1);
    copy(s.child[1], c1, len + 1);
  };
  copy(0, 0, 0);
  return out;
}

Distance distance(const DataTree& a, const DataTree& b) {
  if (a.alphabet() != b.alphabet()) throw ValidationError("distance: alphabets differ");
  // The l-prefixes first differ at l = 1 + (shortest path length where the
  // trees disagree on a label), or at l = path length where one has a node
  // the other lacks.
  int best = -1;
  std::function<void(int, int, int)> walk = [&](int x, int y, int len) {
    if (best >= 0 && len + 1 >= best) return;
    const auto& nx = a.node(x);
    const auto& ny = b.node(y);
    if (nx.is_leaf() && ny.is_leaf()) return;
    if (nx.is_leaf() != ny.is_leaf()) {
      // children at length len+1 exist on one side only
      best = best < 0 ? len + 1 : std::min(best, len + 1);
      return;
    }
    if (nx.letter != ny.letter || nx.datum != ny.datum) {
      // labels at length len are kept by prefixes of length > len
      best = best < 0 ? len + 1 : std::min(best, len + 1);
      return;
    }
    walk(nx.child[0], ny.child[0], len + 1);
    walk(nx.child[1], ny.child[1], len + 1);
  };
  walk(0, 0, 0);
  return Distance{best < 0 ? 0 : best};
}

Alphabet XmlSignature::alphabet() const {
  Alphabet out = types;
  out.insert(out.end(), attributes.begin(), attributes.end());
  return out;
}

Letter XmlSignature::attribute_letter(const std::string& name) const {
  auto it = std::find(attributes.begin(), attributes.end(), name);
  if (it == attributes.end()) throw ValidationError("unknown attribute name '" + name + "'");
  return static_cast<Letter>(types.size()) + static_cast<Letter>(it - attributes.begin());
}

Letter XmlSignature::type_letter(const std::string& name) const {
  auto it = std::find(types.begin(), types.end(), name);
  if (it == types.end()) throw ValidationError("unknown element type '" + name + "'");
  return static_cast<Letter>(it - types.begin());
}

namespace {

// Encodes siblings[i..] at leaf `slot`.
void encode_siblings(DataTree& t, const std::vector<DocNode>& siblings, std::size_t i, int slot,
                     const XmlSignature& sig, Datum& fresh) {
  if (i == siblings.size()) return;
  const DocNode& n = siblings[i];
  Letter type = sig.type_letter(n.type);
  t.expand(slot, type, fresh++);
  int last = slot;
  // attributes in signature order
  std::vector<std::pair<Letter, Datum>> atts;
  for (const auto& [name, d] : n.atts) atts.emplace_back(sig.attribute_letter(name), d);
  std::sort(atts.begin(), atts.end());
  for (const auto& [letter, d] : atts) {
    int next = t.node(last).child[0];
    t.expand(next, letter, d);
    last = next;
  }
  encode_siblings(t, n.children, 0, t.node(last).child[0], sig, fresh);
  encode_siblings(t, siblings, i + 1, t.node(last).child[1], sig, fresh);
}

}  // namespace

DataTree encode_xml(const Document& doc, const XmlSignature& sig) {
  if (doc.empty()) throw ValidationError("encode_xml: empty document");
  DataTree t(sig.alphabet());
  // Element nodes get data disjoint from attribute data; they are never compared.
  Datum fresh = 1;
  std::function<void(const DocNode&)> scan = [&](const DocNode& n) {
    for (const auto& [_, d] : n.atts) fresh = std::max(fresh, d + 1);
    for (const auto& c : n.children) scan(c);
  };
  for (const auto& r : doc) scan(r);
  encode_siblings(t, doc, 0, 0, sig, fresh);
  return t;
}

namespace {

// Walks the chain starting at Σ-node n; returns the last chain node, or -1 on violation.
int chain_end(const DataTree& t, int n, const XmlSignature& sig, std::string* why) {
  std::set<Letter> seen;
  int cur = n;
  while (true) {
    int left = t.node(cur).child[0];
    const auto& ln = t.node(left);
    if (ln.is_leaf() || !sig.is_attribute(ln.letter)) return cur;
    int right = t.node(cur).child[1];
    if (!t.node(right).is_leaf()) {
      if (why) *why = "attribute chain node has a nonleaf right child";
      return -1;
    }
    if (!seen.insert(ln.letter).second) {
      if (why) *why = "repeated attribute name in one chain";
      return -1;
    }
    cur = left;
  }
}

bool check_slot(const DataTree& t, int slot, const XmlSignature& sig, std::string* why) {
  const auto& nd = t.node(slot);
  if (nd.is_leaf()) return true;
  if (!sig.is_type(nd.letter)) {
    if (why) *why = "attribute letter where an element was expected";
    return false;
  }
  int last = chain_end(t, slot, sig, why);
  if (last < 0) return false;
  return check_slot(t, t.node(last).child[0], sig, why) &&
         check_slot(t, t.node(last).child[1], sig, why);
}

void decode_slot(const DataTree& t, int slot, const XmlSignature& sig, std::vector<DocNode>& out) {
  while (!t.node(slot).is_leaf()) {
    DocNode d;
    d.type = sig.types[static_cast<std::size_t>(t.node(slot).letter)];
    int cur = slot;
    while (true) {
      int left = t.node(cur).child[0];
      const auto& ln = t.node(left);
      if (ln.is_leaf() || !sig.is_attribute(ln.letter)) break;
      d.atts[sig.attributes[static_cast<std::size_t>(ln.letter) - sig.types.size()]] = ln.datum;
      cur = left;
    }
    decode_slot(t, t.node(cur).child[0], sig, d.children);
    out.push_back(std::move(d));
    slot = t.node(cur).child[1];
  }
}

}  // namespace

bool is_xml_tree(const DataTree& t, const XmlSignature& sig, std::string* why) {
  if (t.alphabet() != sig.alphabet()) {
    if (why) *why = "alphabet differs from the signature";
    return false;
  }
  if (t.node(0).is_leaf()) {
    if (why) *why = "root is a leaf";
    return false;
  }
  return check_slot(t, 0, sig, why);
}

Document decode_xml(const DataTree& t, const XmlSignature& sig) {
  std::string why;
  if (!is_xml_tree(t, sig, &why)) throw ValidationError("not an XML tree: " + why);
  Document doc;
  decode_slot(t, 0, sig, doc);
  return doc;
}

}  // namespace dtsat
