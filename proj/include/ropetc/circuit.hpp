#pragma once

// Gate-level threshold circuits: a topologically ordered DAG of INPUT, NOT,
// AND, OR, MAJORITY and THRESHOLD(k) gates with designated outputs.
// MAJORITY fires iff strictly more than half of its inputs are 1;
// THRESHOLD(k) fires iff at least k are 1. Depth counts non-INPUT gates on
// the longest input-to-output path; size is the total gate count.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ropetc/errors.hpp"

namespace ropetc {

enum class GateKind : std::uint8_t { input, not_gate, and_gate, or_gate, majority, threshold };

struct Gate {
  GateKind kind = GateKind::input;
  std::uint32_t k = 0; // THRESHOLD parameter
  std::vector<std::uint32_t> inputs;
};

struct Circuit {
  std::vector<Gate> gates; // topological order: gate i reads ids < i
  std::size_t input_width = 0;
  std::vector<std::uint32_t> outputs;

  void validate() const
  {
    std::size_t seen_inputs = 0;
    for (std::size_t i = 0; i < gates.size(); ++i) {
      const Gate& g = gates[i];
      if (g.kind == GateKind::input) {
        ++seen_inputs;
        if (!g.inputs.empty())
          throw domain_error(errc::invalid_value, "INPUT gate with fan-in");
        continue;
      }
      if (g.inputs.empty())
        throw domain_error(errc::invalid_value, "gate with empty fan-in");
      if (g.kind == GateKind::not_gate && g.inputs.size() != 1)
        throw domain_error(errc::invalid_value, "NOT gate must have fan-in 1");
      for (std::uint32_t in : g.inputs)
        if (in >= i)
          throw domain_error(errc::invalid_value,
                             "gate " + std::to_string(i) +
                                 " reads a non-earlier node (not a DAG order)");
    }
    if (seen_inputs != input_width)
      throw domain_error(errc::width_mismatch,
                         "input_width does not match the INPUT gate count");
    for (std::uint32_t o : outputs)
      if (o >= gates.size())
        throw domain_error(errc::invalid_value, "output id out of range");
  }
};

inline std::vector<std::uint8_t> simulate(const Circuit& c,
                                          const std::vector<std::uint8_t>& bits)
{
  if (bits.size() != c.input_width)
    throw domain_error(errc::width_mismatch,
                       "expected " + std::to_string(c.input_width) +
                           " input bits, got " + std::to_string(bits.size()));
  std::vector<std::uint8_t> val(c.gates.size(), 0);
  std::size_t next_input = 0;
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::input:
        val[i] = bits[next_input++] ? 1 : 0;
        break;
      case GateKind::not_gate:
        val[i] = val[g.inputs[0]] ? 0 : 1;
        break;
      case GateKind::and_gate: {
        std::uint8_t v = 1;
        for (std::uint32_t in : g.inputs) v &= val[in];
        val[i] = v;
        break;
      }
      case GateKind::or_gate: {
        std::uint8_t v = 0;
        for (std::uint32_t in : g.inputs) v |= val[in];
        val[i] = v;
        break;
      }
      case GateKind::majority: {
        std::size_t ones = 0;
        for (std::uint32_t in : g.inputs) ones += val[in];
        val[i] = 2 * ones > g.inputs.size() ? 1 : 0;
        break;
      }
      case GateKind::threshold: {
        std::size_t ones = 0;
        for (std::uint32_t in : g.inputs) ones += val[in];
        val[i] = ones >= g.k ? 1 : 0;
        break;
      }
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(c.outputs.size());
  for (std::uint32_t o : c.outputs) out.push_back(val[o]);
  return out;
}

struct CircuitMeasure {
  std::size_t depth = 0;
  std::size_t size = 0;
};

inline CircuitMeasure measure(const Circuit& c)
{
  std::vector<std::size_t> depth(c.gates.size(), 0);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::input) continue;
    std::size_t d = 0;
    for (std::uint32_t in : g.inputs) d = std::max(d, depth[in]);
    depth[i] = d + 1;
  }
  CircuitMeasure m;
  m.size = c.gates.size();
  for (std::uint32_t o : c.outputs) m.depth = std::max(m.depth, depth[o]);
  return m;
}

inline std::string gate_kind_str(const Gate& g)
{
  switch (g.kind) {
    case GateKind::input: return "INPUT";
    case GateKind::not_gate: return "NOT";
    case GateKind::and_gate: return "AND";
    case GateKind::or_gate: return "OR";
    case GateKind::majority: return "MAJORITY";
    case GateKind::threshold: return "THRESHOLD(" + std::to_string(g.k) + ")";
  }
  return "?";
}

// One gate per line: "id kind fanin_ids..."; header "inputs=N outputs=a,b,...".
inline std::string circuit_str(const Circuit& c)
{
  std::ostringstream out;
  out << "inputs=" << c.input_width << " outputs=";
  for (std::size_t i = 0; i < c.outputs.size(); ++i) {
    if (i) out << ',';
    out << c.outputs[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    out << i << ' ' << gate_kind_str(c.gates[i]);
    for (std::uint32_t in : c.gates[i].inputs) out << ' ' << in;
    out << '\n';
  }
  return out.str();
}

inline Circuit parse_circuit(std::istream& in)
{
  Circuit c;
  std::string line;
  if (!std::getline(in, line))
    throw domain_error(errc::format_error, "empty circuit file");
  {
    std::istringstream head(line);
    std::string inputs_tok, outputs_tok;
    head >> inputs_tok >> outputs_tok;
    if (inputs_tok.rfind("inputs=", 0) != 0 || outputs_tok.rfind("outputs=", 0) != 0)
      throw domain_error(errc::format_error, "bad circuit header: " + line);
    c.input_width = std::stoull(inputs_tok.substr(7));
    std::string rest = outputs_tok.substr(8);
    std::size_t pos = 0;
    while (pos < rest.size()) {
      std::size_t comma = rest.find(',', pos);
      if (comma == std::string::npos) comma = rest.size();
      c.outputs.push_back(
          static_cast<std::uint32_t>(std::stoul(rest.substr(pos, comma - pos))));
      pos = comma + 1;
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t id;
    std::string kind;
    if (!(ls >> id >> kind))
      throw domain_error(errc::format_error, "bad gate line: " + line);
    if (id != c.gates.size())
      throw domain_error(errc::format_error, "non-sequential gate id: " + line);
    Gate g;
    if (kind == "INPUT") g.kind = GateKind::input;
    else if (kind == "NOT") g.kind = GateKind::not_gate;
    else if (kind == "AND") g.kind = GateKind::and_gate;
    else if (kind == "OR") g.kind = GateKind::or_gate;
    else if (kind == "MAJORITY") g.kind = GateKind::majority;
    else if (kind.rfind("THRESHOLD(", 0) == 0 && kind.back() == ')') {
      g.kind = GateKind::threshold;
      g.k = static_cast<std::uint32_t>(
          std::stoul(kind.substr(10, kind.size() - 11)));
    } else {
      throw domain_error(errc::format_error, "unknown gate kind: " + kind);
    }
    std::uint32_t in_id;
    while (ls >> in_id) g.inputs.push_back(in_id);
    c.gates.push_back(std::move(g));
  }
  c.validate();
  return c;
}

inline Circuit parse_circuit(const std::string& text)
{
  std::istringstream in(text);
  return parse_circuit(in);
}

} // namespace ropetc
