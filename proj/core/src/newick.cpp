#include "lgt/newick.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace lgt {

namespace {

// Grammar:
//   tree       -> subtree ';'
//   subtree    -> '(' branch (',' branch)* ')' | label
//   branch     -> subtree ':' length
// Labels are unquoted, free of "(),:;" and whitespace. Extinct leaves carry
// the reserved suffix "!x".

struct RawNode {
  int parent = -1;
  std::vector<int> child;
  double length = 0.0;
  bool has_length = false;
  std::string label;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  // Returns nodes with the root at index 0.
  std::vector<RawNode> run() {
    skip_ws();
    root_ = node(-1);
    parse_subtree(root_);
    if (nodes_[root_].has_length)
      throw parse_error("newick: root must not carry a branch length");
    skip_ws();
    expect(';');
    skip_ws();
    if (pos_ != s_.size()) throw parse_error("newick: trailing characters");
    return std::move(nodes_);
  }

 private:
  int node(int parent) {
    nodes_.push_back({});
    nodes_.back().parent = parent;
    return static_cast<int>(nodes_.size()) - 1;
  }

  void parse_subtree(int id) {
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      for (;;) {
        int c = node(id);
        nodes_[id].child.push_back(c);
        parse_subtree(c);
        skip_ws();
        expect(':');
        nodes_[c].length = parse_number();
        nodes_[c].has_length = true;
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
      skip_ws();
      std::string label = parse_label();
      if (!label.empty())
        throw parse_error("newick: internal node labels are not supported");
    } else {
      std::string label = parse_label();
      if (label.empty()) throw parse_error("newick: empty leaf label");
      nodes_[id].label = label;
    }
    // Optional root length is consumed by the caller via ':'; a top-level
    // ":len" after the outermost group is detected here.
    if (nodes_[id].parent == -1) {
      skip_ws();
      if (peek() == ':') {
        ++pos_;
        nodes_[id].length = parse_number();
        nodes_[id].has_length = true;
      }
    }
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void expect(char c) {
    if (peek() != c)
      throw parse_error(std::string("newick: expected '") + c + "' at offset " +
                        std::to_string(pos_));
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  double parse_number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '.' || s_[pos_] == '-' || s_[pos_] == '+' ||
            s_[pos_] == 'e' || s_[pos_] == 'E'))
      ++pos_;
    if (start == pos_) throw parse_error("newick: expected branch length");
    try {
      return std::stod(s_.substr(start, pos_ - start));
    } catch (const std::exception&) {
      throw parse_error("newick: bad branch length");
    }
  }

  std::string parse_label() {
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int root_ = -1;
  std::vector<RawNode> nodes_;
};

bool strip_extinct_suffix(std::string& label) {
  if (label.size() > 2 && label.compare(label.size() - 2, 2, "!x") == 0) {
    label.resize(label.size() - 2);
    return true;
  }
  return false;
}

std::string format_length(double x) {
  std::ostringstream o;
  o.precision(17);
  o << x;
  return o.str();
}

}  // namespace

SpeciesPhylogeny parse_newick(const std::string& text, double lambda) {
  auto raw = Parser(text).run();
  std::vector<SpeciesPhylogeny::Vertex> v(raw.size());
  std::vector<std::string> names{""};
  std::map<std::string, Taxon> taxon_of;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    v[i].parent = raw[i].parent;
    if (raw[i].child.size() > 2)
      throw parse_error("newick: multifurcating species trees are not supported");
    for (std::size_t k = 0; k < raw[i].child.size(); ++k)
      v[i].child[k] = raw[i].child[k];
    if (raw[i].parent >= 0) {
      if (!raw[i].has_length)
        throw parse_error("newick: branch length required on every edge");
      if (!(raw[i].length > 0.0))
        throw parse_error("newick: branch lengths must be positive");
      v[i].tau = raw[i].length;
      v[i].lambda = lambda;
    }
    if (raw[i].child.empty()) {
      std::string label = raw[i].label;
      bool extinct = strip_extinct_suffix(label);
      if (label.empty()) throw parse_error("newick: empty leaf label");
      if (taxon_of.count(label))
        throw parse_error("newick: duplicate leaf label '" + label + "'");
      Taxon t = static_cast<Taxon>(names.size());
      names.push_back(label);
      taxon_of[label] = t;
      v[i].taxon = t;
      v[i].extant = !extinct;
    }
  }
  SpeciesPhylogeny tree(std::move(v), 0, std::move(names));
  tree.require_binary();
  return tree;
}

std::string emit_newick(const SpeciesPhylogeny& t) {
  std::string out;
  auto emit = [&](auto&& self, int v) -> void {
    if (t.is_leaf(v)) {
      out += t.name(t.taxon(v));
      if (!t.extant(v)) out += "!x";
    } else {
      out += '(';
      bool first = true;
      for (int c : t.children(v)) {
        if (c < 0) continue;
        if (!first) out += ',';
        first = false;
        self(self, c);
        out += ':';
        out += format_length(t.tau(c));
      }
      out += ')';
    }
  };
  emit(emit, t.root());
  out += ';';
  return out;
}

UnrootedTree parse_newick_unrooted(const std::string& text,
                                   const std::vector<std::string>& names) {
  std::map<std::string, Taxon> taxon_of;
  for (std::size_t i = 1; i < names.size(); ++i)
    taxon_of[names[i]] = static_cast<Taxon>(i);
  auto raw = Parser(text).run();
  std::vector<UnrootedTree::Node> v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    v[i].parent = raw[i].parent;
    v[i].child.assign(raw[i].child.begin(), raw[i].child.end());
    if (raw[i].parent >= 0) {
      if (!raw[i].has_length)
        throw parse_error("newick: branch length required on every edge");
      if (!(raw[i].length > 0.0))
        throw parse_error("newick: branch lengths must be positive");
      v[i].length = raw[i].length;
    }
    if (raw[i].child.empty()) {
      std::string label = raw[i].label;
      strip_extinct_suffix(label);
      auto it = taxon_of.find(label);
      if (it == taxon_of.end())
        throw parse_error("newick: unknown taxon '" + label + "'");
      v[i].taxon = it->second;
    }
  }
  return UnrootedTree(std::move(v), 0);
}

std::string emit_newick(const UnrootedTree& t,
                        const std::vector<std::string>& names,
                        bool with_lengths) {
  std::string out;
  auto emit = [&](auto&& self, int v) -> void {
    if (t.is_leaf(v)) {
      out += names.at(t.node(v).taxon);
    } else {
      out += '(';
      const auto& ch = t.node(v).child;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (i) out += ',';
        self(self, ch[i]);
        if (with_lengths) {
          out += ':';
          out += format_length(t.node(ch[i]).length);
        }
      }
      out += ')';
    }
  };
  auto emit_branch = [&](int c) {
    emit(emit, c);
    if (with_lengths) {
      out += ':';
      out += format_length(t.node(c).length);
    }
  };
  int r = t.stored_root();
  if (t.node(r).taxon != 0 && !t.node(r).child.empty()) {
    // Leaf-rooted storage (suppressed trees): re-group around the single
    // child so every emitted branch carries a length. The two-leaf case
    // splits the single edge evenly.
    int c = t.node(r).child[0];
    out += '(';
    if (t.node(c).child.empty()) {
      if (with_lengths) {
        std::string half = format_length(t.node(c).length / 2.0);
        out += names.at(t.node(r).taxon) + ":" + half + "," +
               names.at(t.node(c).taxon) + ":" + half;
      } else {
        out += names.at(t.node(r).taxon) + "," + names.at(t.node(c).taxon);
      }
    } else {
      for (int cc : t.node(c).child) {
        emit_branch(cc);
        out += ',';
      }
      out += names.at(t.node(r).taxon);
      if (with_lengths) {
        out += ':';
        out += format_length(t.node(c).length);
      }
    }
    out += ')';
  } else {
    emit(emit, r);
  }
  out += ';';
  return out;
}

std::vector<UnrootedTree> parse_newick_list(
    const std::string& text, const std::vector<std::string>& names) {
  std::vector<UnrootedTree> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    out.push_back(parse_newick_unrooted(line, names));
  }
  return out;
}

std::string lambda_csv(const SpeciesPhylogeny& t) {
  std::ostringstream out;
  out.precision(17);
  out << "edge_child_vertex,lambda\n";
  for (int e : t.edges()) out << e << "," << t.lambda(e) << "\n";
  return out.str();
}

SpeciesPhylogeny apply_lambda_csv(const SpeciesPhylogeny& t,
                                  const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("edge_child_vertex", 0) != 0)
    throw parse_error("lambda csv: missing header");
  std::vector<SpeciesPhylogeny::Vertex> v;
  v.reserve(t.n_vertices());
  for (int i = 0; i < t.n_vertices(); ++i) {
    SpeciesPhylogeny::Vertex x;
    x.parent = t.parent(i);
    x.child = t.children(i);
    x.tau = t.tau(i);
    x.lambda = t.lambda(i);
    x.taxon = t.taxon(i);
    x.extant = t.extant(i);
    v.push_back(x);
  }
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b))
      throw parse_error("lambda csv: malformed row");
    int edge = std::stoi(a);
    double lam = std::stod(b);
    if (edge < 0 || edge >= t.n_vertices() || edge == t.root())
      throw parse_error("lambda csv: bad edge id " + a);
    if (lam < 0.0) throw parse_error("lambda csv: negative rate");
    v[edge].lambda = lam;
    ++rows;
  }
  if (rows != t.n_vertices() - 1)
    throw parse_error("lambda csv: row count does not match edge count");
  return SpeciesPhylogeny(std::move(v), t.root(), t.name_table());
}

}  // namespace lgt
