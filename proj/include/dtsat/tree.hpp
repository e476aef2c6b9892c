#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtsat/common.hpp"

namespace dtsat {

/// Binary data tree. Node 0 is the root; every node is either a leaf or has
/// exactly two children. Letters and data live on nonleaf nodes only.
/// A tree without data (an ITCA input) uses datum 0 everywhere.
class DataTree {
 public:
  struct Node {
    Letter letter = -1;  // -1 on leaves
    Datum datum = 0;
    int child[2] = {-1, -1};
    bool truncated = false;  // leaf produced by cutting a deeper node
    bool is_leaf() const { return child[0] < 0; }
  };

  DataTree() = default;
  explicit DataTree(Alphabet alphabet);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return 0; }

  /// Appends a leaf and returns its index.
  int add_leaf();
  /// Turns leaf `n` into a nonleaf node with fresh leaf children.
  void expand(int n, Letter letter, Datum datum);

  int nonleaf_count() const;
  std::vector<int> nonleaf_nodes() const;  // preorder
  /// Bit-string path of every node, indexed by node.
  std::vector<std::string> paths() const;
  int depth() const;  // max path length

  /// Same shape and letters, all data 0.
  DataTree erase_data() const;

  bool operator==(const DataTree& other) const;

 private:
  Alphabet alphabet_;
  std::vector<Node> nodes_;
};

/// Per-node description used by validate_tree: path -> optional (letter, datum).
struct RawNode {
  std::string path;
  std::optional<std::string> letter;
  std::optional<Datum> datum;
  bool truncated = false;
};

/// Checks the structural invariants and builds the tree. Throws ValidationError
/// naming the first violation.
DataTree validate_tree(const Alphabet& alphabet, const std::vector<RawNode>& raw);
std::vector<RawNode> to_raw(const DataTree& t);

/// Restriction to nodes of length <= l; cut nodes become truncated leaves.
DataTree l_prefix(const DataTree& t, int l);

/// Rational distance 1/l (0 when equal), returned as the denominator l
/// (0 meaning the trees are equal).
struct Distance {
  int denominator = 0;
  double value() const { return denominator == 0 ? 0.0 : 1.0 / denominator; }
  bool operator==(const Distance&) const = default;
};
Distance distance(const DataTree& a, const DataTree& b);

/// Unranked document node.
struct DocNode {
  std::string type;
  std::map<std::string, Datum> atts;
  std::vector<DocNode> children;
  bool operator==(const DocNode&) const = default;
};

/// A forest of documents; roots are siblings.
using Document = std::vector<DocNode>;

/// Element types and attribute names, disjoint.
struct XmlSignature {
  std::vector<std::string> types;
  std::vector<std::string> attributes;
  Alphabet alphabet() const;  // types then attributes
  bool is_type(Letter l) const { return l >= 0 && l < static_cast<int>(types.size()); }
  bool is_attribute(Letter l) const {
    return l >= static_cast<int>(types.size()) &&
           l < static_cast<int>(types.size() + attributes.size());
  }
  Letter attribute_letter(const std::string& name) const;
  Letter type_letter(const std::string& name) const;
};

/// First-child/next-sibling encoding with attribute chains.
DataTree encode_xml(const Document& doc, const XmlSignature& sig);
/// Inverse of encode_xml. Throws ValidationError if `t` violates the chain invariant.
Document decode_xml(const DataTree& t, const XmlSignature& sig);
/// Chain invariant check (used by tests and decoding).
bool is_xml_tree(const DataTree& t, const XmlSignature& sig, std::string* why = nullptr);

}  // namespace dtsat
