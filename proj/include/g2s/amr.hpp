#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace g2s {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AmrNode {
  std::string id;       // variable name, or a generated id for constants
  std::string concept_name;  // "describe-01", "person", "Ryan", "-"
  bool constant = false;
};

struct AmrEdge {
  int source = 0;
  int target = 0;
  std::string label;  // without the leading ':'
};

// Edge (i, j, l) in node-index space.
struct EdgeTriple {
  int source = 0;
  int target = 0;
  std::string label;

  friend bool operator==(const EdgeTriple&, const EdgeTriple&) = default;
};

// Rooted, labeled, directed graph. Nodes are kept in declaration order and
// edges in declaration order; both orders are load-bearing (traversal,
// neighbor truncation).
class AmrGraph {
 public:
  AmrGraph() = default;

  int add_node(std::string id, std::string concept_name, bool constant = false);
  void add_edge(int source, int target, std::string label);
  void set_root(int index) { root_ = index; }

  const std::vector<AmrNode>& nodes() const { return nodes_; }
  const std::vector<AmrEdge>& edges() const { return edges_; }
  int root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // -1 when absent.
  int find(std::string_view id) const;

  // Throws GraphError when an invariant does not hold.
  void validate() const;

 private:
  std::vector<AmrNode> nodes_;
  std::vector<AmrEdge> edges_;
  std::map<std::string, int, std::less<>> index_;
  int root_ = 0;
};

struct LinearizedAmr {
  std::vector<std::string> tokens;
  // Position of each node's concept token on its first (expanding) visit.
  std::vector<int> node_positions;
  // True for concept tokens, false for relations and parentheses.
  std::vector<bool> is_concept;
  // Node index behind each token, -1 for relations and parentheses.
  std::vector<int> token_nodes;

  std::string str() const;
};

AmrGraph parse_penman(std::string_view text);

// "describe-01" -> "describe"; constants are only lowercased.
std::string surface_form(const AmrNode& node);

LinearizedAmr linearize(const AmrGraph& g);

std::vector<EdgeTriple> edge_list(const AmrGraph& g);

// Longest undirected shortest path. Throws GraphError when disconnected.
int graph_diameter(const AmrGraph& g);

// Minimum index distance between any occurrence of a and any of b.
int token_distance(const LinearizedAmr& lin, std::string_view a, std::string_view b);

// Cumulative fraction of graphs with diameter <= d, keyed by observed d.
std::map<int, double> diameter_histogram(const std::vector<AmrGraph>& corpus);

}  // namespace g2s
