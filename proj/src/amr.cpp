#include "g2s/amr.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>

namespace g2s {

int AmrGraph::add_node(std::string id, std::string concept_name, bool constant) {
  if (index_.count(id))
    throw GraphError("duplicate node id '" + id + "'");
  const int idx = static_cast<int>(nodes_.size());
  index_.emplace(id, idx);
  nodes_.push_back({std::move(id), std::move(concept_name), constant});
  return idx;
}

void AmrGraph::add_edge(int source, int target, std::string label) {
  const int n = static_cast<int>(nodes_.size());
  if (source < 0 || source >= n || target < 0 || target >= n)
    throw GraphError("edge endpoint out of range");
  if (source == target)
    throw GraphError("self-loop on node '" + nodes_[source].id + "'");
  edges_.push_back({source, target, std::move(label)});
}

int AmrGraph::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

void AmrGraph::validate() const {
  if (nodes_.empty()) throw GraphError("graph has no nodes");
  if (root_ < 0 || root_ >= static_cast<int>(nodes_.size()))
    throw GraphError("root out of range");
  // graph_diameter checks connectivity.
  (void)graph_diameter(*this);
}

namespace {

enum class Tok { open, close, slash, role, quoted, symbol, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    skip_space();
    const std::size_t start = i_;
    if (i_ >= s_.size()) return {Tok::end, "", start};
    const char c = s_[i_];
    if (c == '(') { ++i_; return {Tok::open, "(", start}; }
    if (c == ')') { ++i_; return {Tok::close, ")", start}; }
    if (c == '/') { ++i_; return {Tok::slash, "/", start}; }
    if (c == '"') {
      ++i_;
      std::string out;
      while (i_ < s_.size() && s_[i_] != '"') {
        if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
        out.push_back(s_[i_++]);
      }
      if (i_ >= s_.size()) throw ParseError("unterminated string literal", start);
      ++i_;
      return {Tok::quoted, std::move(out), start};
    }
    const bool role = c == ':';
    if (role) ++i_;
    const std::size_t body = i_;
    while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) &&
           s_[i_] != '(' && s_[i_] != ')')
      ++i_;
    std::string text(s_.substr(body, i_ - body));
    if (role) {
      if (text.empty()) throw ParseError("empty relation label", start);
      return {Tok::role, std::move(text), start};
    }
    return {Tok::symbol, std::move(text), start};
  }

  Token peek() {
    const std::size_t save = i_;
    Token t = next();
    i_ = save;
    return t;
  }

 private:
  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

bool looks_like_variable(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

struct PendingRef {
  int source;
  std::string label;
  std::string name;
  std::size_t pos;
  std::size_t edge_slot;
};

class PenmanParser {
 public:
  explicit PenmanParser(std::string_view text) : lex_(text) {}

  AmrGraph parse() {
    Token first = lex_.peek();
    if (first.kind != Tok::open) throw ParseError("expected '('", first.pos);
    const int root = parse_node();
    Token rest = lex_.next();
    if (rest.kind == Tok::close) throw ParseError("unbalanced ')'", rest.pos);
    if (rest.kind != Tok::end) throw ParseError("trailing content after graph", rest.pos);

    // Edges are added only once every reference is resolved so that edge
    // order stays the textual order.
    AmrGraph g;
    for (const auto& n : nodes_) g.add_node(n.id, n.concept_name, n.constant);
    g.set_root(root);
    for (auto& e : edges_) {
      if (e.target < 0) {
        const PendingRef& ref = pending_[static_cast<std::size_t>(-e.target - 1)];
        const int t = g.find(ref.name);
        if (t < 0) throw ParseError("undeclared variable '" + ref.name + "'", ref.pos);
        e.target = t;
      }
      if (e.source == e.target)
        throw ParseError("self-loop on variable '" + nodes_[e.source].id + "'", e.pos);
      g.add_edge(e.source, e.target, e.label);
    }
    return g;
  }

 private:
  struct RawEdge {
    int source;
    int target;  // negative: -(pending index + 1)
    std::string label;
    std::size_t pos;
  };

  int declare(std::string id, std::string concept_name, bool constant, std::size_t pos) {
    if (!constant) {
      if (declared_.count(id))
        throw ParseError("duplicate variable '" + id + "'", pos);
      declared_.emplace(id, static_cast<int>(nodes_.size()));
    }
    nodes_.push_back({std::move(id), std::move(concept_name), constant});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int new_constant(std::string literal, std::size_t pos) {
    std::string id = "_c" + std::to_string(constants_++);
    return declare(std::move(id), std::move(literal), true, pos);
  }

  int parse_node() {
    Token open = lex_.next();
    if (open.kind != Tok::open) throw ParseError("expected '('", open.pos);
    Token var = lex_.next();
    if (var.kind != Tok::symbol || var.text.empty())
      throw ParseError("expected variable", var.pos);
    Token slash = lex_.next();
    if (slash.kind != Tok::slash) throw ParseError("expected '/' after variable", slash.pos);
    Token concept_name = lex_.next();
    if (concept_name.kind != Tok::symbol && concept_name.kind != Tok::quoted)
      throw ParseError("expected concept", concept_name.pos);
    const int self = declare(var.text, concept_name.text, false, var.pos);

    for (;;) {
      Token t = lex_.next();
      if (t.kind == Tok::close) break;
      if (t.kind == Tok::end) throw ParseError("unbalanced '('", open.pos);
      if (t.kind != Tok::role) throw ParseError("expected relation or ')'", t.pos);
      Token target = lex_.peek();
      switch (target.kind) {
        case Tok::open: {
          // Reserve the slot first so edges stay in textual order.
          const std::size_t slot = edges_.size();
          edges_.push_back({self, 0, t.text, t.pos});
          const int child = parse_node();
          edges_[slot].target = child;
          break;
        }
        case Tok::quoted: {
          lex_.next();
          const int c = new_constant(target.text, target.pos);
          edges_.push_back({self, c, t.text, t.pos});
          break;
        }
        case Tok::symbol: {
          lex_.next();
          if (auto it = declared_.find(target.text); it != declared_.end()) {
            edges_.push_back({self, it->second, t.text, t.pos});
          } else if (looks_like_variable(target.text)) {
            pending_.push_back({self, t.text, target.text, target.pos, edges_.size()});
            edges_.push_back({self, -static_cast<int>(pending_.size()), t.text, t.pos});
          } else {
            const int c = new_constant(target.text, target.pos);
            edges_.push_back({self, c, t.text, t.pos});
          }
          break;
        }
        default:
          throw ParseError("expected relation target", target.pos);
      }
    }
    return self;
  }

  Lexer lex_;
  std::vector<AmrNode> nodes_;
  std::vector<RawEdge> edges_;
  std::vector<PendingRef> pending_;
  std::map<std::string, int, std::less<>> declared_;
  int constants_ = 0;
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::vector<int>> undirected_adjacency(const AmrGraph& g) {
  std::vector<std::vector<int>> adj(g.node_count());
  for (const auto& e : g.edges()) {
    adj[e.source].push_back(e.target);
    adj[e.target].push_back(e.source);
  }
  return adj;
}

}  // namespace

AmrGraph parse_penman(std::string_view text) {
  return PenmanParser(text).parse();
}

std::string surface_form(const AmrNode& node) {
  if (node.constant) return lowercase(node.concept_name);
  std::string_view c = node.concept_name;
  // Strip a trailing sense tag "-NN".
  const auto dash = c.rfind('-');
  if (dash != std::string_view::npos && dash > 0 && dash + 1 < c.size() &&
      std::all_of(c.begin() + dash + 1, c.end(),
                  [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }))
    c = c.substr(0, dash);
  return lowercase(c);
}

std::string LinearizedAmr::str() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

LinearizedAmr linearize(const AmrGraph& g) {
  LinearizedAmr lin;
  const std::size_t n = g.node_count();
  if (n == 0) return lin;
  lin.node_positions.assign(n, -1);

  std::vector<std::vector<int>> out_edges(n);
  for (std::size_t k = 0; k < g.edges().size(); ++k)
    out_edges[g.edges()[k].source].push_back(static_cast<int>(k));

  std::vector<bool> visited(n, false);
  auto push = [&](std::string tok, bool concept_name, int node) {
    lin.tokens.push_back(std::move(tok));
    lin.is_concept.push_back(concept_name);
    lin.token_nodes.push_back(node);
  };

  std::function<void(int, bool)> visit = [&](int v, bool wrap) {
    visited[v] = true;
    const auto& kids = out_edges[v];
    const bool paren = wrap && !kids.empty();
    if (paren) push("(", false, -1);
    lin.node_positions[v] = static_cast<int>(lin.tokens.size());
    push(surface_form(g.nodes()[v]), true, v);
    for (int k : kids) {
      const auto& e = g.edges()[k];
      push(":" + lowercase(e.label), false, -1);
      if (visited[e.target])
        push(surface_form(g.nodes()[e.target]), true, e.target);
      else
        visit(e.target, true);
    }
    if (paren) push(")", false, -1);
  };
  visit(g.root(), false);
  return lin;
}

std::vector<EdgeTriple> edge_list(const AmrGraph& g) {
  std::vector<EdgeTriple> out;
  out.reserve(g.edge_count());
  for (const auto& e : g.edges()) out.push_back({e.source, e.target, e.label});
  return out;
}

int graph_diameter(const AmrGraph& g) {
  const int n = static_cast<int>(g.node_count());
  if (n == 0) throw GraphError("graph has no nodes");
  const auto adj = undirected_adjacency(g);
  int diameter = 0;
  std::vector<int> dist(n);
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    int reached = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (dist[w] >= 0) continue;
        dist[w] = dist[v] + 1;
        diameter = std::max(diameter, dist[w]);
        ++reached;
        q.push(w);
      }
    }
    if (reached != n) throw GraphError("graph is disconnected");
  }
  return diameter;
}

int token_distance(const LinearizedAmr& lin, std::string_view a, std::string_view b) {
  std::vector<int> pa, pb;
  for (std::size_t i = 0; i < lin.tokens.size(); ++i) {
    if (lin.tokens[i] == a) pa.push_back(static_cast<int>(i));
    if (lin.tokens[i] == b) pb.push_back(static_cast<int>(i));
  }
  if (pa.empty()) throw std::invalid_argument("token '" + std::string(a) + "' not in linearization");
  if (pb.empty()) throw std::invalid_argument("token '" + std::string(b) + "' not in linearization");
  int best = std::numeric_limits<int>::max();
  for (int i : pa)
    for (int j : pb) best = std::min(best, std::abs(i - j));
  return best;
}

std::map<int, double> diameter_histogram(const std::vector<AmrGraph>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("diameter_histogram: empty corpus");
  std::map<int, std::size_t> counts;
  for (const auto& g : corpus) ++counts[graph_diameter(g)];
  std::map<int, double> cumulative;
  std::size_t running = 0;
  for (const auto& [d, c] : counts) {
    running += c;
    cumulative[d] = static_cast<double>(running) / static_cast<double>(corpus.size());
  }
  cumulative.rbegin()->second = 1.0;
  return cumulative;
}

}  // namespace g2s
