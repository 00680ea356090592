#include "ingest/hypernymy.hpp"

#include <fstream>
#include <sstream>

#include "error.hpp"
#include "ingest/text.hpp"

namespace orthoprobe::ingest {

HypernymyForest HypernymyForest::parse(std::string_view text) {
  HypernymyForest forest;
  std::vector<std::pair<std::size_t, std::string>> pending;  // (line, parent id)
  std::size_t line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty())
      throw ParseError("hypernymy forest line " + std::to_string(line_no) +
                       ": expected node_id<TAB>parent_id");
    std::string id(cols[0]);
    if (forest.index_.count(id))
      throw ParseError("hypernymy forest line " + std::to_string(line_no) + ": duplicate node '" +
                       id + "'");
    forest.index_.emplace(id, forest.ids_.size());
    forest.ids_.push_back(std::move(id));
    pending.emplace_back(line_no, std::string(cols[1]));
  }

  const std::size_t n = forest.ids_.size();
  forest.parent_.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [line, parent] = pending[i];
    if (parent == "-") continue;
    auto it = forest.index_.find(parent);
    if (it == forest.index_.end())
      throw StructuralError("hypernymy forest line " + std::to_string(line) + ": parent '" + parent +
                            "' of node '" + forest.ids_[i] + "' is not listed");
    forest.parent_[i] = static_cast<std::ptrdiff_t>(it->second);
  }

  constexpr int kUnvisited = -1;
  constexpr int kOnPath = -2;
  forest.depth_.assign(n, kUnvisited);
  forest.root_.assign(n, 0);
  std::vector<std::size_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    std::ptrdiff_t node = static_cast<std::ptrdiff_t>(start);
    path.clear();
    while (node >= 0 && forest.depth_[node] == kUnvisited) {
      forest.depth_[node] = kOnPath;
      path.push_back(static_cast<std::size_t>(node));
      node = forest.parent_[node];
    }
    if (node >= 0 && forest.depth_[node] == kOnPath)
      throw StructuralError("hypernymy forest has a cycle through node '" + forest.ids_[node] + "'");
    int d = node < 0 ? -1 : forest.depth_[node];
    std::size_t root = node < 0 ? path.back() : forest.root_[node];
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      forest.depth_[*it] = ++d;
      forest.root_[*it] = root;
    }
  }
  return forest;
}

HypernymyForest HypernymyForest::load(const std::string& path) {
  return parse(read_text_file(path));
}

bool HypernymyForest::contains(std::string_view node) const {
  return index_.count(std::string(node)) > 0;
}

std::size_t HypernymyForest::index_of(std::string_view node) const {
  auto it = index_.find(std::string(node));
  if (it == index_.end())
    throw AnnotationError("lexical node '" + std::string(node) + "' is not in the hypernymy forest");
  return it->second;
}

int HypernymyForest::depth(std::string_view node) const { return depth_[index_of(node)]; }

bool HypernymyForest::same_tree(std::string_view a, std::string_view b) const {
  return root_[index_of(a)] == root_[index_of(b)];
}

std::optional<int> HypernymyForest::distance(std::string_view a, std::string_view b) const {
  auto x = static_cast<std::ptrdiff_t>(index_of(a));
  auto y = static_cast<std::ptrdiff_t>(index_of(b));
  if (root_[x] != root_[y]) return std::nullopt;
  int steps = 0;
  while (x != y) {
    if (depth_[x] >= depth_[y]) {
      x = parent_[x];
    } else {
      y = parent_[y];
    }
    ++steps;
  }
  return steps;
}

}  // namespace orthoprobe::ingest
