#include "afia/cone.hpp"

#include <algorithm>
#include <stdexcept>

namespace afia {

ConeSet extract_cones(const Circuit& c) {
  ConeSet set;
  set.num_keys = c.num_keys();
  std::vector<std::uint32_t> stamp(c.num_nets(), 0);
  std::vector<NetId> queue;

  for (std::size_t j = 0; j < c.num_outputs(); ++j) {
    const auto mark = static_cast<std::uint32_t>(j + 1);
    Cone cone;
    cone.output_index = j;
    cone.output = c.outputs()[j];
    queue.assign(1, cone.output);
    stamp[cone.output] = mark;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NetId n = queue[head];
      switch (c.role(n)) {
        case NetRole::Input: cone.inputs.push_back(n); break;
        case NetRole::Key: cone.keys.push_back(*c.key_index(n)); break;
        case NetRole::Gate: {
          const auto gi = *c.driver(n);
          cone.gates.push_back(static_cast<std::uint32_t>(gi));
          for (NetId f : c.gates()[gi].fanins) {
            if (stamp[f] == mark) continue;
            stamp[f] = mark;
            queue.push_back(f);
          }
          break;
        }
      }
    }
    std::sort(cone.gates.begin(), cone.gates.end());
    std::sort(cone.inputs.begin(), cone.inputs.end());
    std::sort(cone.keys.begin(), cone.keys.end());
    set.cones.push_back(std::move(cone));
  }
  return set;
}

AssociationMatrix::AssociationMatrix(std::size_t num_keys, std::size_t num_cones)
    : keys_(num_keys), cones_(num_cones), cells_(num_keys * num_cones, 0), solved_(num_keys, 0) {}

std::vector<bool> AssociationMatrix::row(std::size_t key) const {
  std::vector<bool> r(cones_);
  for (std::size_t j = 0; j < cones_; ++j) r[j] = at(key, j);
  return r;
}

void AssociationMatrix::mark_solved(std::size_t key) {
  solved_.at(key) = 1;
  std::fill_n(cells_.begin() + static_cast<std::ptrdiff_t>(key * cones_), cones_, 0);
}

std::size_t AssociationMatrix::unknown_count(std::size_t cone) const {
  if (cone >= cones_) throw std::out_of_range("cone index out of range");
  std::size_t n = 0;
  for (std::size_t i = 0; i < keys_; ++i) n += !solved_[i] && cells_[i * cones_ + cone];
  return n;
}

std::size_t AssociationMatrix::unsolved_count() const {
  return static_cast<std::size_t>(std::count(solved_.begin(), solved_.end(), 0));
}

std::optional<AssociationMatrix::Selection> AssociationMatrix::cone_with_min_unknown_keys() const {
  std::optional<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t j = 0; j < cones_; ++j) {
    const std::size_t n = unknown_count(j);
    if (n == 0) continue;
    if (!best || n < best_count) {
      best = j;
      best_count = n;
    }
  }
  if (!best) return std::nullopt;
  Selection s{*best, {}};
  for (std::size_t i = 0; i < keys_; ++i)
    if (!solved_[i] && at(i, *best)) s.unknown_keys.push_back(i);
  return s;
}

std::vector<std::size_t> AssociationMatrix::orphan_keys() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < keys_; ++i) {
    if (solved_[i]) continue;
    bool any = false;
    for (std::size_t j = 0; j < cones_ && !any; ++j) any = at(i, j);
    if (!any) out.push_back(i);
  }
  return out;
}

AssociationMatrix build_assoc_matrix(const ConeSet& cones, std::size_t num_keys) {
  AssociationMatrix a(num_keys, cones.cones.size());
  for (std::size_t j = 0; j < cones.cones.size(); ++j) {
    for (std::size_t k : cones.cones[j].keys) {
      if (k >= num_keys) throw std::out_of_range("cone references key " + std::to_string(k));
      a.set(k, j, true);
    }
  }
  return a;
}

}  // namespace afia
