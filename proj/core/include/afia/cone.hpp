#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "afia/netlist.hpp"

namespace afia {

/// Transitive fan-in of one primary output.
struct Cone {
  std::size_t output_index = 0;
  NetId output = 0;
  /// Sorted ascending.
  std::vector<std::uint32_t> gates;
  std::vector<NetId> inputs;
  std::vector<std::size_t> keys;
};

struct ConeSet {
  std::vector<Cone> cones;
  std::size_t num_keys = 0;
};

/// Breadth-first search from every output over reversed fan-in edges.
ConeSet extract_cones(const Circuit& c);

/// Key-by-cone incidence with a solved flag per key. Solving a key clears its
/// row, so counts only ever see unknown keys.
class AssociationMatrix {
 public:
  AssociationMatrix(std::size_t num_keys, std::size_t num_cones);

  std::size_t num_keys() const noexcept { return keys_; }
  std::size_t num_cones() const noexcept { return cones_; }

  bool at(std::size_t key, std::size_t cone) const { return cells_.at(key * cones_ + cone) != 0; }
  void set(std::size_t key, std::size_t cone, bool value) { cells_.at(key * cones_ + cone) = value ? 1 : 0; }
  std::vector<bool> row(std::size_t key) const;

  bool solved(std::size_t key) const { return solved_.at(key) != 0; }
  void mark_solved(std::size_t key);

  std::size_t unknown_count(std::size_t cone) const;
  std::size_t unsolved_count() const;

  struct Selection {
    std::size_t cone = 0;
    std::vector<std::size_t> unknown_keys;
  };

  /// Cone with the fewest unknown keys among those with at least one; ties go
  /// to the lowest cone index. Nullopt when no cone holds an unknown key.
  std::optional<Selection> cone_with_min_unknown_keys() const;

  /// Unsolved keys that lie in no cone at all.
  std::vector<std::size_t> orphan_keys() const;

 private:
  std::size_t keys_;
  std::size_t cones_;
  std::vector<std::uint8_t> cells_;
  std::vector<std::uint8_t> solved_;
};

AssociationMatrix build_assoc_matrix(const ConeSet& cones, std::size_t num_keys);
inline AssociationMatrix build_assoc_matrix(const ConeSet& cones) { return build_assoc_matrix(cones, cones.num_keys); }

}  // namespace afia
