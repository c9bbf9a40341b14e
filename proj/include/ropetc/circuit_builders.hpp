#pragma once

// Constant-depth threshold-circuit constructions for unsigned addition,
// comparison and iterated addition. Circuits are built as strict layered
// pipelines: every gate reads only the previous layer (single-input AND
// buffers lift signals across layers), so the measured depth is the layer
// count, identical for every width in a builder's supported range.

#include <map>
#include <vector>

#include "ropetc/circuit.hpp"

namespace ropetc {

namespace detail {

class LayeredBuilder {
public:
  std::uint32_t input()
  {
    circuit_.gates.push_back({GateKind::input, 0, {}});
    ++circuit_.input_width;
    layer_.push_back(0);
    return id(circuit_.gates.size() - 1);
  }

  // Places a gate at `layer`, buffering every operand up to layer-1 first.
  std::uint32_t at(int layer, GateKind kind, std::vector<std::uint32_t> ins,
                   std::uint32_t k = 0)
  {
    for (std::uint32_t& in : ins) in = lift(in, layer - 1);
    circuit_.gates.push_back({kind, k, std::move(ins)});
    layer_.push_back(layer);
    return id(circuit_.gates.size() - 1);
  }

  // Buffer chain raising a node to exactly `to_layer`.
  std::uint32_t lift(std::uint32_t node, int to_layer)
  {
    int from = layer_[node];
    if (from > to_layer)
      throw domain_error(errc::invalid_value, "cannot lift a node downward");
    std::uint32_t cur = node;
    for (int l = from + 1; l <= to_layer; ++l) {
      auto key = std::make_pair(cur, l);
      auto it = lifted_.find(key);
      if (it != lifted_.end()) {
        cur = it->second;
        continue;
      }
      circuit_.gates.push_back({GateKind::and_gate, 0, {cur}});
      layer_.push_back(l);
      std::uint32_t buf = id(circuit_.gates.size() - 1);
      lifted_.emplace(key, buf);
      cur = buf;
    }
    return cur;
  }

  Circuit finish(const std::vector<std::uint32_t>& outputs, int out_layer)
  {
    for (std::uint32_t o : outputs)
      circuit_.outputs.push_back(lift(o, out_layer));
    circuit_.validate();
    return std::move(circuit_);
  }

private:
  static std::uint32_t id(std::size_t i) { return static_cast<std::uint32_t>(i); }

  Circuit circuit_;
  std::vector<int> layer_;
  std::map<std::pair<std::uint32_t, int>, std::uint32_t> lifted_;
};

// Carry-lookahead addition of two bit vectors (LSB first, equal width) as a
// six-layer block starting at `base + 1`; returns the w+1 sum bits at
// base + 6. Operand bits must live at layer `base`.
inline std::vector<std::uint32_t> cla_add(LayeredBuilder& b,
                                          const std::vector<std::uint32_t>& a,
                                          const std::vector<std::uint32_t>& bb,
                                          int base)
{
  const std::size_t w = a.size();
  const int l1 = base + 1, l2 = base + 2, l3 = base + 3, l4 = base + 4,
            l5 = base + 5, l6 = base + 6;
  std::vector<std::uint32_t> gen(w), prop(w), na(w), nb(w);
  for (std::size_t i = 0; i < w; ++i) {
    gen[i] = b.at(l1, GateKind::and_gate, {a[i], bb[i]});
    prop[i] = b.at(l1, GateKind::or_gate, {a[i], bb[i]});
    na[i] = b.at(l1, GateKind::not_gate, {a[i]});
    nb[i] = b.at(l1, GateKind::not_gate, {bb[i]});
  }
  // carry into position i: OR over j<i of (g_j AND p_{j+1} ... p_{i-1})
  std::vector<std::uint32_t> carry(w + 1, 0);
  std::vector<std::uint32_t> ncarry(w + 1, 0);
  for (std::size_t i = 1; i <= w; ++i) {
    std::vector<std::uint32_t> chains;
    for (std::size_t j = 0; j < i; ++j) {
      std::vector<std::uint32_t> term{gen[j]};
      for (std::size_t t = j + 1; t < i; ++t) term.push_back(prop[t]);
      chains.push_back(b.at(l2, GateKind::and_gate, std::move(term)));
    }
    carry[i] = b.at(l3, GateKind::or_gate, std::move(chains));
    if (i < w) ncarry[i] = b.at(l4, GateKind::not_gate, {carry[i]});
  }
  std::vector<std::uint32_t> sum(w + 1);
  for (std::size_t i = 0; i < w; ++i) {
    // parity minterms; position 0 has no carry-in
    std::vector<std::uint32_t> minterms;
    if (i == 0) {
      minterms.push_back(b.at(l5, GateKind::and_gate, {a[0], nb[0]}));
      minterms.push_back(b.at(l5, GateKind::and_gate, {na[0], bb[0]}));
    } else {
      minterms.push_back(b.at(l5, GateKind::and_gate, {a[i], nb[i], ncarry[i]}));
      minterms.push_back(b.at(l5, GateKind::and_gate, {na[i], bb[i], ncarry[i]}));
      minterms.push_back(b.at(l5, GateKind::and_gate, {na[i], nb[i], carry[i]}));
      minterms.push_back(b.at(l5, GateKind::and_gate, {a[i], bb[i], carry[i]}));
    }
    sum[i] = b.at(l6, GateKind::or_gate, std::move(minterms));
  }
  sum[w] = b.lift(carry[w], l6);
  return sum;
}

} // namespace detail

// 2w inputs (a LSB-first, then b LSB-first), w+1 outputs; depth 6 for all w.
inline Circuit build_adder(std::size_t w)
{
  if (w < 1)
    throw domain_error(errc::invalid_value, "adder width must be positive");
  detail::LayeredBuilder b;
  std::vector<std::uint32_t> a(w), bb(w);
  for (std::size_t i = 0; i < w; ++i) a[i] = b.input();
  for (std::size_t i = 0; i < w; ++i) bb[i] = b.input();
  std::vector<std::uint32_t> sum = detail::cla_add(b, a, bb, 0);
  return b.finish(sum, 6);
}

// 2w inputs, one output: [a <= b] unsigned; depth 5 for all w.
inline Circuit build_comparator(std::size_t w)
{
  if (w < 1)
    throw domain_error(errc::invalid_value, "comparator width must be positive");
  detail::LayeredBuilder b;
  std::vector<std::uint32_t> a(w), bb(w);
  for (std::size_t i = 0; i < w; ++i) a[i] = b.input();
  for (std::size_t i = 0; i < w; ++i) bb[i] = b.input();

  std::vector<std::uint32_t> na(w), ab(w), nanb(w), ltlit(w), eq(w);
  for (std::size_t i = 0; i < w; ++i) {
    na[i] = b.at(1, GateKind::not_gate, {a[i]});
    std::uint32_t nb = b.at(1, GateKind::not_gate, {bb[i]});
    ab[i] = b.at(2, GateKind::and_gate, {a[i], bb[i]});
    nanb[i] = b.at(2, GateKind::and_gate, {na[i], nb});
    ltlit[i] = b.at(2, GateKind::and_gate, {na[i], bb[i]});
    eq[i] = b.at(3, GateKind::or_gate, {ab[i], nanb[i]});
  }
  // a < b iff at the highest differing position a is 0 and b is 1
  std::vector<std::uint32_t> cases;
  for (std::size_t i = 0; i < w; ++i) {
    std::vector<std::uint32_t> term{ltlit[i]};
    for (std::size_t t = i + 1; t < w; ++t) term.push_back(eq[t]);
    cases.push_back(b.at(4, GateKind::and_gate, std::move(term)));
  }
  std::vector<std::uint32_t> all_eq(eq);
  cases.push_back(b.at(4, GateKind::and_gate, std::move(all_eq)));
  std::uint32_t leq = b.at(5, GateKind::or_gate, std::move(cases));
  return b.finish({leq}, 5);
}

// n*w inputs (number-major, LSB first), w + ceil(log2 n) outputs; the sum of
// the n unsigned inputs. Three fixed population-count rounds (THRESHOLD
// banks) reduce any 2 <= n <= 127 summands to two, then one carry-lookahead
// add; depth 20 independent of n and w.
inline Circuit build_iterated_add(std::size_t n, std::size_t w)
{
  if (n < 2 || w < 1)
    throw domain_error(errc::invalid_value, "need n >= 2 numbers of width >= 1");
  if (n > 127)
    throw domain_error(errc::invalid_value,
                       "iterated adder supports up to 127 summands");
  std::size_t extra = 0;
  while ((std::size_t(1) << extra) < n) ++extra;
  const std::size_t width = w + extra; // the exact sum fits: n(2^w - 1) < 2^width

  detail::LayeredBuilder b;
  std::vector<std::vector<std::uint32_t>> nums(n);
  for (std::size_t i = 0; i < n; ++i) {
    nums[i].resize(w);
    for (std::size_t j = 0; j < w; ++j) nums[i][j] = b.input();
  }
  // shared constant 0 = AND(x, NOT x), available from layer 2
  std::uint32_t nx = b.at(1, GateKind::not_gate, {nums[0][0]});
  std::uint32_t zero = b.at(2, GateKind::and_gate, {nums[0][0], nx});
  for (auto& num : nums) num.resize(width, zero);

  int base = 2; // all current number bits are at layers <= base
  for (int round = 0; round < 3; ++round) {
    const std::size_t k = nums.size();
    std::size_t cbits = 1;
    while ((std::size_t(1) << cbits) < k + 1) ++cbits;
    std::vector<std::vector<std::uint32_t>> next(
        cbits, std::vector<std::uint32_t>(width, zero));
    for (std::size_t j = 0; j < width; ++j) {
      std::vector<std::uint32_t> col(k);
      for (std::size_t i = 0; i < k; ++i) col[i] = nums[i][j];
      // column population count via a THRESHOLD bank
      std::vector<std::uint32_t> th(k + 1);
      for (std::size_t v = 1; v <= k; ++v)
        th[v] = b.at(base + 1, GateKind::threshold, col,
                     static_cast<std::uint32_t>(v));
      std::vector<std::uint32_t> exact(k + 1);
      for (std::size_t v = 1; v <= k; ++v) {
        if (v < k) {
          std::uint32_t nth = b.at(base + 2, GateKind::not_gate, {th[v + 1]});
          exact[v] = b.at(base + 3, GateKind::and_gate, {th[v], nth});
        } else {
          exact[v] = b.lift(th[v], base + 3);
        }
      }
      for (std::size_t t = 0; t < cbits; ++t) {
        if (j + t >= width) break;
        std::vector<std::uint32_t> ones;
        for (std::size_t v = 1; v <= k; ++v)
          if (v & (std::size_t(1) << t)) ones.push_back(exact[v]);
        if (ones.empty()) continue;
        next[t][j + t] =
            b.at(base + 4, GateKind::or_gate, std::move(ones));
      }
    }
    nums = std::move(next);
    base += 4;
    zero = b.lift(zero, base);
  }
  if (nums.size() != 2)
    throw domain_error(errc::invalid_value, "reduction did not reach two summands");
  for (auto& num : nums)
    for (auto& bit : num) bit = b.lift(bit, base);
  std::vector<std::uint32_t> sum = detail::cla_add(b, nums[0], nums[1], base);
  sum.pop_back(); // the sum fits in `width` bits, the top carry is always 0
  return b.finish(sum, base + 6);
}

} // namespace ropetc
