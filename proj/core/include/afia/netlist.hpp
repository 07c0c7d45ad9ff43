#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "afia/logic.hpp"

namespace afia {

using NetId = std::uint32_t;

enum class NetRole : std::uint8_t { Input, Key, Gate };

struct Gate {
  NetId out = 0;
  GateKind kind = GateKind::Buf;
  std::vector<NetId> fanins;
};

/// Rejection reasons for netlists. Each has its own kind so callers can react
/// to the category rather than the message.
enum class NetlistErrorKind { Syntax, UndeclaredNet, Cycle, Duplicate, Arity, Unsupported };

std::string_view error_kind_name(NetlistErrorKind kind) noexcept;

class NetlistError : public std::runtime_error {
 public:
  NetlistError(NetlistErrorKind kind, std::string message, int line = 0, int column = 0);

  NetlistErrorKind kind() const noexcept { return kind_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  NetlistErrorKind kind_;
  int line_;
  int column_;
};

/// Immutable combinational netlist.
///
/// Net ids are canonical: primary inputs first, then key inputs, then one net
/// per gate in declaration order. Gate i therefore drives net
/// `first_gate_net() + i`.
class Circuit {
 public:
  Circuit() = default;

  const std::string& name() const noexcept { return name_; }
  std::span<const NetId> inputs() const noexcept { return inputs_; }
  std::span<const NetId> key_inputs() const noexcept { return keys_; }
  std::span<const NetId> outputs() const noexcept { return outputs_; }
  std::span<const Gate> gates() const noexcept { return gates_; }

  std::size_t num_inputs() const noexcept { return inputs_.size(); }
  std::size_t num_keys() const noexcept { return keys_.size(); }
  std::size_t num_outputs() const noexcept { return outputs_.size(); }
  std::size_t num_gates() const noexcept { return gates_.size(); }
  std::size_t num_nets() const noexcept { return names_.size(); }

  NetId first_gate_net() const noexcept { return static_cast<NetId>(inputs_.size() + keys_.size()); }
  NetRole role(NetId net) const noexcept;
  /// Gate index driving `net`, or nullopt for inputs and keys.
  std::optional<std::size_t> driver(NetId net) const noexcept;
  /// Key index of `net`, or nullopt if it is not a key input.
  std::optional<std::size_t> key_index(NetId net) const noexcept;

  const std::string& net_name(NetId net) const { return names_.at(net); }
  std::optional<NetId> find_net(std::string_view name) const;

  /// Gate indices reading `net`.
  std::span<const std::uint32_t> fanouts(NetId net) const noexcept { return fanouts_[net]; }

  /// Gate indices in topological order, stable by declaration order.
  std::span<const std::uint32_t> topo() const noexcept { return topo_; }

 private:
  friend class CircuitBuilder;

  std::string name_;
  std::vector<NetId> inputs_;
  std::vector<NetId> keys_;
  std::vector<NetId> outputs_;
  std::vector<Gate> gates_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, NetId> index_;
  std::vector<std::vector<std::uint32_t>> fanouts_;
  std::vector<std::uint32_t> topo_;
};

/// Source position attached to a declaration for diagnostics.
struct SourcePos {
  int line = 0;
  int column = 0;
};

/// Collects declarations by name and validates them into a Circuit.
///
/// Gates may reference nets declared later; resolution happens in build().
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string name = "circuit");

  void add_input(std::string_view net, SourcePos pos = {});
  void add_key_input(std::string_view net, SourcePos pos = {});
  void add_output(std::string_view net, SourcePos pos = {});
  void add_gate(std::string_view out, GateKind kind, std::vector<std::string> fanins,
                SourcePos pos = {});

  bool has_net(std::string_view net) const;
  /// Returns `base` if unused, otherwise `base_1`, `base_2`, ...
  std::string unique_name(std::string_view base) const;

  /// Throws NetlistError on undeclared nets, duplicates, bad arity or cycles.
  Circuit build() const;

 private:
  struct PendingGate {
    std::string out;
    GateKind kind;
    std::vector<std::string> fanins;
    SourcePos pos;
  };
  struct Named {
    std::string name;
    SourcePos pos;
  };

  void claim(std::string_view net, SourcePos pos);

  std::string name_;
  std::vector<Named> inputs_;
  std::vector<Named> keys_;
  std::vector<Named> outputs_;
  std::vector<PendingGate> gates_;
  std::unordered_map<std::string, SourcePos> defined_;
};

/// Parses the `.bench` dialect: INPUT(x), KEYINPUT(k), OUTPUT(y),
/// `net = KIND(a, b, ...)` and `#` comments. Inputs whose name starts with
/// `keyinput` (any case) are treated as key inputs.
Circuit parse_bench(std::string_view text, std::string name = "circuit");
Circuit read_bench_file(const std::filesystem::path& path);

std::string write_bench(const Circuit& c);
void write_bench_file(const Circuit& c, const std::filesystem::path& path);

/// Topologically ordered copy of the gate list.
std::vector<Gate> topo_order(const Circuit& c);

/// Structural equality by net names: same inputs, keys, outputs and gates in
/// the same order. Net ids may differ.
bool isomorphic(const Circuit& a, const Circuit& b);

/// Copies every declaration of `c` into a builder so it can be edited.
CircuitBuilder to_builder(const Circuit& c);

}  // namespace afia
