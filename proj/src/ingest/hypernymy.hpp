#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace orthoprobe::ingest {

/// Is-a taxonomy over lexical nodes, possibly made of several disjoint trees.
///
/// Text form: one `node_id<TAB>parent_id` per line, `-` as parent marks a
/// root. Blank lines and lines starting with `#` are ignored.
class HypernymyForest {
 public:
  static HypernymyForest parse(std::string_view text);
  static HypernymyForest load(const std::string& path);

  std::size_t size() const { return parent_.size(); }
  bool contains(std::string_view node) const;

  /// Depth below the root of the node's tree (root = 0). Throws
  /// AnnotationError for unknown ids.
  int depth(std::string_view node) const;

  /// Tree distance, or nullopt when the nodes live in different trees.
  std::optional<int> distance(std::string_view a, std::string_view b) const;

  bool same_tree(std::string_view a, std::string_view b) const;

 private:
  std::size_t index_of(std::string_view node) const;

  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> ids_;
  std::vector<std::ptrdiff_t> parent_;  // -1 for roots
  std::vector<int> depth_;
  std::vector<std::size_t> root_;
};

}  // namespace orthoprobe::ingest
