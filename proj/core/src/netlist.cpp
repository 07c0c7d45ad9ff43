#include "afia/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>

namespace afia {

namespace {

std::string upper(std::string_view s) {
  std::string r(s);
  for (auto& ch : r) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return r;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
      return false;
  }
  return true;
}

std::optional<GateKind> kind_from_name(std::string_view name) {
  const std::string u = upper(name);
  if (u == "AND") return GateKind::And;
  if (u == "NAND") return GateKind::Nand;
  if (u == "OR") return GateKind::Or;
  if (u == "NOR") return GateKind::Nor;
  if (u == "XOR") return GateKind::Xor;
  if (u == "XNOR") return GateKind::Xnor;
  if (u == "NOT" || u == "INV") return GateKind::Not;
  if (u == "BUF" || u == "BUFF") return GateKind::Buf;
  if (u == "MUX" || u == "MUX2") return GateKind::Mux2;
  return std::nullopt;
}

bool is_sequential_or_lut(std::string_view name) {
  const std::string u = upper(name);
  return u == "DFF" || u == "DFFR" || u == "LATCH" || u == "LUT";
}

void check_arity(GateKind kind, std::size_t n, std::string_view out, SourcePos pos) {
  bool ok = true;
  switch (kind) {
    case GateKind::Not:
    case GateKind::Buf: ok = n == 1; break;
    case GateKind::Mux2: ok = n == 3; break;
    default: ok = n >= 2; break;
  }
  if (!ok) {
    throw NetlistError(NetlistErrorKind::Arity,
                       std::string(gate_kind_name(kind)) + " gate '" + std::string(out) + "' has " +
                           std::to_string(n) + " fanins",
                       pos.line, pos.column);
  }
}

bool is_name_char(char c) {
  return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != ',' && c != '=' &&
         c != '#';
}

// Line-level tokenizer for the bench dialect.
class LineLexer {
 public:
  LineLexer(std::string_view line, int line_no) : s_(line), line_(line_no) {}

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool done() {
    skip_ws();
    return i_ >= s_.size();
  }
  SourcePos pos() const { return {line_, static_cast<int>(i_) + 1}; }

  std::string_view name() {
    skip_ws();
    const std::size_t start = i_;
    while (i_ < s_.size() && is_name_char(s_[i_])) ++i_;
    if (start == i_) fail("expected a name");
    return s_.substr(start, i_ - start);
  }

  bool peek(char c) {
    skip_ws();
    return i_ < s_.size() && s_[i_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    const auto p = pos();
    throw NetlistError(NetlistErrorKind::Syntax, what, p.line, p.column);
  }

 private:
  std::string_view s_;
  int line_;
  std::size_t i_ = 0;
};

}  // namespace

std::string_view error_kind_name(NetlistErrorKind kind) noexcept {
  switch (kind) {
    case NetlistErrorKind::Syntax: return "syntax";
    case NetlistErrorKind::UndeclaredNet: return "undeclared-net";
    case NetlistErrorKind::Cycle: return "cycle";
    case NetlistErrorKind::Duplicate: return "duplicate";
    case NetlistErrorKind::Arity: return "arity";
    case NetlistErrorKind::Unsupported: return "unsupported";
  }
  return "?";
}

static std::string located(const std::string& message, int line, int column) {
  if (line <= 0) return message;
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

NetlistError::NetlistError(NetlistErrorKind kind, std::string message, int line, int column)
    : std::runtime_error(located(message, line, column)), kind_(kind), line_(line), column_(column) {}

// --- Circuit -----------------------------------------------------------------

NetRole Circuit::role(NetId net) const noexcept {
  if (net < inputs_.size()) return NetRole::Input;
  if (net < first_gate_net()) return NetRole::Key;
  return NetRole::Gate;
}

std::optional<std::size_t> Circuit::driver(NetId net) const noexcept {
  if (net < first_gate_net() || net >= names_.size()) return std::nullopt;
  return net - first_gate_net();
}

std::optional<std::size_t> Circuit::key_index(NetId net) const noexcept {
  if (net < inputs_.size() || net >= first_gate_net()) return std::nullopt;
  return net - inputs_.size();
}

std::optional<NetId> Circuit::find_net(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// --- CircuitBuilder ----------------------------------------------------------

CircuitBuilder::CircuitBuilder(std::string name) : name_(std::move(name)) {}

void CircuitBuilder::claim(std::string_view net, SourcePos pos) {
  auto [it, inserted] = defined_.emplace(std::string(net), pos);
  if (!inserted) {
    std::string msg = "net '" + std::string(net) + "' defined more than once";
    if (it->second.line > 0) msg += " (first at line " + std::to_string(it->second.line) + ")";
    throw NetlistError(NetlistErrorKind::Duplicate, msg, pos.line, pos.column);
  }
}

void CircuitBuilder::add_input(std::string_view net, SourcePos pos) {
  claim(net, pos);
  inputs_.push_back({std::string(net), pos});
}

void CircuitBuilder::add_key_input(std::string_view net, SourcePos pos) {
  claim(net, pos);
  keys_.push_back({std::string(net), pos});
}

void CircuitBuilder::add_output(std::string_view net, SourcePos pos) {
  for (const auto& o : outputs_) {
    if (o.name == net) {
      throw NetlistError(NetlistErrorKind::Duplicate, "output '" + std::string(net) + "' declared more than once",
                         pos.line, pos.column);
    }
  }
  outputs_.push_back({std::string(net), pos});
}

void CircuitBuilder::add_gate(std::string_view out, GateKind kind, std::vector<std::string> fanins, SourcePos pos) {
  check_arity(kind, fanins.size(), out, pos);
  claim(out, pos);
  gates_.push_back({std::string(out), kind, std::move(fanins), pos});
}

bool CircuitBuilder::has_net(std::string_view net) const { return defined_.count(std::string(net)) != 0; }

std::string CircuitBuilder::unique_name(std::string_view base) const {
  if (!has_net(base)) return std::string(base);
  for (int i = 1;; ++i) {
    std::string candidate = std::string(base) + "_" + std::to_string(i);
    if (!has_net(candidate)) return candidate;
  }
}

Circuit CircuitBuilder::build() const {
  Circuit c;
  c.name_ = name_;
  const std::size_t n_nets = inputs_.size() + keys_.size() + gates_.size();
  c.names_.reserve(n_nets);
  auto intern = [&](const std::string& net) {
    const auto id = static_cast<NetId>(c.names_.size());
    c.names_.push_back(net);
    c.index_.emplace(net, id);
    return id;
  };
  for (const auto& in : inputs_) c.inputs_.push_back(intern(in.name));
  for (const auto& k : keys_) c.keys_.push_back(intern(k.name));
  for (const auto& g : gates_) intern(g.out);

  auto resolve = [&](const std::string& net, SourcePos pos) {
    auto it = c.index_.find(net);
    if (it == c.index_.end()) {
      throw NetlistError(NetlistErrorKind::UndeclaredNet, "net '" + net + "' is never defined", pos.line,
                         pos.column);
    }
    return it->second;
  };

  c.gates_.reserve(gates_.size());
  for (std::size_t i = 0; i < gates_.size(); ++i) {
    const auto& pg = gates_[i];
    Gate g;
    g.out = static_cast<NetId>(c.first_gate_net() + i);
    g.kind = pg.kind;
    g.fanins.reserve(pg.fanins.size());
    for (const auto& f : pg.fanins) g.fanins.push_back(resolve(f, pg.pos));
    c.gates_.push_back(std::move(g));
  }
  for (const auto& o : outputs_) c.outputs_.push_back(resolve(o.name, o.pos));

  c.fanouts_.assign(n_nets, {});
  std::vector<std::uint32_t> indegree(c.gates_.size(), 0);
  for (std::uint32_t gi = 0; gi < c.gates_.size(); ++gi) {
    auto fanins = c.gates_[gi].fanins;
    std::sort(fanins.begin(), fanins.end());
    fanins.erase(std::unique(fanins.begin(), fanins.end()), fanins.end());
    for (NetId f : fanins) {
      c.fanouts_[f].push_back(gi);
      if (f >= c.first_gate_net()) ++indegree[gi];
    }
  }

  // Kahn's algorithm; the min-heap keeps ready gates in declaration order.
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::uint32_t gi = 0; gi < indegree.size(); ++gi)
    if (indegree[gi] == 0) ready.push(gi);
  c.topo_.reserve(c.gates_.size());
  while (!ready.empty()) {
    const auto gi = ready.top();
    ready.pop();
    c.topo_.push_back(gi);
    for (auto succ : c.fanouts_[c.gates_[gi].out])
      if (--indegree[succ] == 0) ready.push(succ);
  }
  if (c.topo_.size() != c.gates_.size()) {
    for (std::size_t gi = 0; gi < indegree.size(); ++gi) {
      if (indegree[gi] != 0) {
        const auto& pg = gates_[gi];
        throw NetlistError(NetlistErrorKind::Cycle, "combinational cycle through net '" + pg.out + "'",
                           pg.pos.line, pg.pos.column);
      }
    }
  }
  return c;
}

CircuitBuilder to_builder(const Circuit& c) {
  CircuitBuilder b(c.name());
  for (NetId n : c.inputs()) b.add_input(c.net_name(n));
  for (NetId n : c.key_inputs()) b.add_key_input(c.net_name(n));
  for (const auto& g : c.gates()) {
    std::vector<std::string> fanins;
    fanins.reserve(g.fanins.size());
    for (NetId f : g.fanins) fanins.push_back(c.net_name(f));
    b.add_gate(c.net_name(g.out), g.kind, std::move(fanins));
  }
  for (NetId n : c.outputs()) b.add_output(c.net_name(n));
  return b;
}

// --- bench I/O ---------------------------------------------------------------

Circuit parse_bench(std::string_view text, std::string name) {
  CircuitBuilder b(std::move(name));
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineLexer lex(line, line_no);
    if (lex.done()) {
      if (end == text.size()) break;
      continue;
    }
    const SourcePos head_pos = lex.pos();
    const std::string_view head = lex.name();
    if (lex.peek('(')) {
      const std::string decl = upper(head);
      lex.expect('(');
      const SourcePos net_pos = lex.pos();
      const std::string_view net = lex.name();
      lex.expect(')');
      if (!lex.done()) lex.fail("unexpected trailing text");
      if (decl == "INPUT") {
        if (starts_with_ci(net, "keyinput"))
          b.add_key_input(net, net_pos);
        else
          b.add_input(net, net_pos);
      } else if (decl == "KEYINPUT") {
        b.add_key_input(net, net_pos);
      } else if (decl == "OUTPUT") {
        b.add_output(net, net_pos);
      } else {
        throw NetlistError(NetlistErrorKind::Syntax, "unknown declaration '" + std::string(head) + "'",
                           head_pos.line, head_pos.column);
      }
    } else {
      lex.expect('=');
      const SourcePos kind_pos = lex.pos();
      const std::string_view kind_name = lex.name();
      const auto kind = kind_from_name(kind_name);
      if (!kind) {
        if (is_sequential_or_lut(kind_name)) {
          throw NetlistError(NetlistErrorKind::Unsupported,
                             "element '" + std::string(kind_name) + "' is not combinational logic", kind_pos.line,
                             kind_pos.column);
        }
        throw NetlistError(NetlistErrorKind::Syntax, "unknown gate kind '" + std::string(kind_name) + "'",
                           kind_pos.line, kind_pos.column);
      }
      lex.expect('(');
      std::vector<std::string> fanins;
      if (!lex.peek(')')) {
        fanins.emplace_back(lex.name());
        while (lex.peek(',')) {
          lex.expect(',');
          fanins.emplace_back(lex.name());
        }
      }
      lex.expect(')');
      if (!lex.done()) lex.fail("unexpected trailing text");
      b.add_gate(head, *kind, std::move(fanins), head_pos);
    }
    if (end == text.size()) break;
  }
  return b.build();
}

Circuit read_bench_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_bench(ss.str(), path.stem().string());
}

std::string write_bench(const Circuit& c) {
  std::ostringstream os;
  os << "# " << c.name() << "\n";
  os << "# " << c.num_inputs() << " inputs, " << c.num_keys() << " key inputs, " << c.num_outputs()
     << " outputs, " << c.num_gates() << " gates\n";
  for (NetId n : c.inputs()) os << "INPUT(" << c.net_name(n) << ")\n";
  for (NetId n : c.key_inputs()) os << "KEYINPUT(" << c.net_name(n) << ")\n";
  for (NetId n : c.outputs()) os << "OUTPUT(" << c.net_name(n) << ")\n";
  for (const auto& g : c.gates()) {
    os << c.net_name(g.out) << " = " << gate_kind_name(g.kind) << "(";
    for (std::size_t i = 0; i < g.fanins.size(); ++i) {
      if (i) os << ", ";
      os << c.net_name(g.fanins[i]);
    }
    os << ")\n";
  }
  return os.str();
}

void write_bench_file(const Circuit& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << write_bench(c);
}

std::vector<Gate> topo_order(const Circuit& c) {
  std::vector<Gate> order;
  order.reserve(c.num_gates());
  for (auto gi : c.topo()) order.push_back(c.gates()[gi]);
  return order;
}

bool isomorphic(const Circuit& a, const Circuit& b) {
  auto same_names = [&](std::span<const NetId> x, std::span<const NetId> y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (a.net_name(x[i]) != b.net_name(y[i])) return false;
    return true;
  };
  if (!same_names(a.inputs(), b.inputs()) || !same_names(a.key_inputs(), b.key_inputs()) ||
      !same_names(a.outputs(), b.outputs()) || a.num_gates() != b.num_gates())
    return false;
  for (std::size_t i = 0; i < a.num_gates(); ++i) {
    const Gate& ga = a.gates()[i];
    const Gate& gb = b.gates()[i];
    if (ga.kind != gb.kind || a.net_name(ga.out) != b.net_name(gb.out) || ga.fanins.size() != gb.fanins.size())
      return false;
    for (std::size_t j = 0; j < ga.fanins.size(); ++j)
      if (a.net_name(ga.fanins[j]) != b.net_name(gb.fanins[j])) return false;
  }
  return true;
}

}  // namespace afia
