// ropetc command line: transformer evaluation, depth reporting, gate-level
// circuit verification and the formula benchmark, all bit-reproducible for
// a fixed argv + input files.

#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ropetc/circuit_builders.hpp"
#include "ropetc/formula_gen.hpp"
#include "ropetc/model_io.hpp"
#include "ropetc/rope.hpp"

using nlohmann::json;
using namespace ropetc;

namespace {

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw domain_error(errc::io_error, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw domain_error(errc::io_error, "cannot write " + path);
  out << content;
}

// Deterministic placeholder input when depth-report gets no --input.
FpMatrix ramp_input(std::size_t n, std::size_t d, int p)
{
  FpMatrix x(n, d, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      long long num = static_cast<long long>((5 * i + 3 * j) % 17) - 8;
      if (num == 0) num = 1;
      x.at(i, j) = round_p(Rational(num, 8), p);
    }
  return x;
}

json expr_json(const DepthExpr& e)
{
  json j;
  for (int i = 0; i < depth_sym_count; ++i)
    j[ascii_name(static_cast<DepthSym>(i))] =
        e.coeff(static_cast<DepthSym>(i));
  j["const"] = e.constant_term();
  return j;
}

std::optional<FpNum> parse_epsilon(const std::string& text, int p)
{
  if (text.empty()) return std::nullopt;
  if (text.find('@') != std::string::npos) {
    FpNum v = FpNum::parse(text);
    if (v.precision() != p)
      throw domain_error(errc::precision_mismatch,
                         "--ln-epsilon precision differs from the model");
    return v;
  }
  return round_p(parse_rational(text), p);
}

// ------------------------------------------------------- eval-transformer

int run_eval_transformer(const std::string& model_path,
                         const std::string& input_path,
                         const std::string& out_path, int threads,
                         const std::string& epsilon)
{
  std::istringstream model_text(read_file(model_path));
  TransformerModel model = parse_model(model_text);
  FpMatrix x = FpMatrix::parse(read_file(input_path));
  auto eps = parse_epsilon(epsilon, model.config.p);
  FpMatrix y = transformer_forward(x, model, nullptr, eps, threads);
  write_file(out_path, y.str());
  return 0;
}

// ----------------------------------------------------------- depth-report

int run_depth_report(const std::string& model_path, const std::string& input_path,
                     const std::string& json_path, const std::string& numeric,
                     const std::string& epsilon)
{
  std::istringstream model_text(read_file(model_path));
  TransformerModel model = parse_model(model_text);
  const auto& cfg = model.config;
  FpMatrix x = input_path.empty() ? ramp_input(cfg.n, cfg.d, cfg.p)
                                  : FpMatrix::parse(read_file(input_path));
  auto eps = parse_epsilon(epsilon, cfg.p);

  std::map<DepthSym, std::int64_t> numeric_map;
  if (!numeric.empty()) {
    std::istringstream ns(numeric);
    std::string item;
    while (std::getline(ns, item, ',')) {
      std::size_t eq = item.find('=');
      if (eq == std::string::npos)
        throw domain_error(errc::format_error, "--numeric expects sym=value");
      std::string name = item.substr(0, eq);
      bool found = false;
      for (int i = 0; i < depth_sym_count; ++i)
        if (name == ascii_name(static_cast<DepthSym>(i))) {
          numeric_map[static_cast<DepthSym>(i)] = std::stoll(item.substr(eq + 1));
          found = true;
        }
      if (!found)
        throw domain_error(errc::format_error, "unknown depth symbol: " + name);
    }
  }

  json report;
  report["model"] = {{"n", cfg.n}, {"d", cfg.d}, {"m", model.layers.size()},
                     {"p", cfg.p}};
  std::cout << "depth report: n=" << cfg.n << " d=" << cfg.d << " m="
            << model.layers.size() << " p=" << cfg.p << "\n";

  auto report_block = [&](json& dst, const std::string& title,
                          const DepthExpr& traced, const DepthExpr& formula,
                          const std::string& formula_text) {
    const bool match = traced == formula;
    dst["traced"] = expr_json(traced);
    dst["formula"] = expr_json(formula);
    dst["formula_text"] = formula_text;
    dst["match"] = match;
    std::cout << "  " << title << "\n";
    std::cout << "    traced:  " << traced.str() << "\n";
    std::cout << "    formula: " << formula_text << " = " << formula.str()
              << "\n";
    std::cout << "    match:   " << (match ? "yes" : "NO") << "\n";
    if (!numeric_map.empty()) {
      dst["traced_numeric"] = traced.evaluate(numeric_map);
      std::cout << "    numeric: " << traced.evaluate(numeric_map) << "\n";
    }
  };

  // g0 block (abstract d_g; concrete formula when it is mlp/layernorm)
  FpMatrix y = x;
  json layers = json::array();
  {
    json g0;
    g0["kind"] = to_string(model.g0_kind);
    if (model.g0_kind == GKind::layernorm) {
      Tracer t;
      y = layer_norm(y, &t, eps);
      report_block(g0, "g0 (layernorm)", trace_depth(t.trace()),
                   layer_formula(LayerKind::layernorm),
                   layer_formula_text(LayerKind::layernorm));
    } else if (model.g0_kind == GKind::mlp) {
      Tracer t;
      y = mlp_layer(y, model.g0_mlp->first, model.g0_mlp->second, &t);
      report_block(g0, "g0 (mlp)", trace_depth(t.trace()),
                   layer_formula(LayerKind::mlp),
                   layer_formula_text(LayerKind::mlp));
    } else {
      std::cout << "  g0 (identity): counted as d_g\n";
    }
    report["g0"] = g0;
  }

  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerWeights& w = model.layers[i];
    json layer;
    layer["index"] = i + 1;
    Tracer t_attn;
    FpMatrix y_attn = attention_layer(y, w, cfg, &t_attn);
    json attn;
    report_block(attn, "layer " + std::to_string(i + 1) + " attention",
                 trace_depth(t_attn.trace()), layer_formula(LayerKind::attention),
                 layer_formula_text(LayerKind::attention));
    attn["size_ops"] = t_attn.trace().size();
    layer["attention"] = attn;
    y = y_attn;

    json g;
    g["kind"] = to_string(w.g_kind);
    if (w.g_kind == GKind::mlp) {
      Tracer t;
      y = mlp_layer(y, w.mlp_W, w.mlp_b, &t);
      report_block(g, "layer " + std::to_string(i + 1) + " g (mlp)",
                   trace_depth(t.trace()), layer_formula(LayerKind::mlp),
                   layer_formula_text(LayerKind::mlp));
    } else if (w.g_kind == GKind::layernorm) {
      Tracer t;
      y = layer_norm(y, &t, eps);
      report_block(g, "layer " + std::to_string(i + 1) + " g (layernorm)",
                   trace_depth(t.trace()), layer_formula(LayerKind::layernorm),
                   layer_formula_text(LayerKind::layernorm));
    } else {
      std::cout << "  layer " << i + 1 << " g (identity): counted as d_g\n";
    }
    layer["g"] = g;
    layers.push_back(layer);
  }
  report["layers"] = layers;

  // whole-transformer trace with g's abstracted to d_g
  Tracer t_total;
  transformer_forward(x, model, &t_total, eps);
  const int m = static_cast<int>(model.layers.size());
  json total;
  report_block(total, "transformer",
               trace_depth(t_total.trace()),
               layer_formula(LayerKind::transformer, m),
               layer_formula_text(LayerKind::transformer, m));
  const bool const_depth = assert_constant_depth(trace_depth(t_total.trace()), m);
  total["constant_depth"] = const_depth;
  total["size_ops"] = t_total.trace().size();
  report["transformer"] = total;
  std::cout << "  constant-depth witness (m=" << m << "): "
            << (const_depth ? "yes" : "NO") << "\n";
  std::cout << "  size counter: " << t_total.trace().size() << " ops\n";

  if (!json_path.empty()) write_file(json_path, report.dump(2) + "\n");

  bool all_match = const_depth;
  std::function<void(const json&)> scan = [&](const json& j) {
    if (j.is_object()) {
      if (j.contains("match") && !j["match"].get<bool>()) all_match = false;
      for (const auto& [k, v] : j.items()) scan(v);
    } else if (j.is_array()) {
      for (const auto& v : j) scan(v);
    }
  };
  scan(report);
  if (!all_match)
    throw domain_error(errc::invalid_value,
                       "a traced depth diverged from its formula");
  return 0;
}

// --------------------------------------------------------- circuit-verify

std::uint64_t bits_to_u64(const std::vector<std::uint8_t>& bits, std::size_t lo,
                          std::size_t count)
{
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < count; ++i)
    v |= static_cast<std::uint64_t>(bits[lo + i]) << i;
  return v;
}

int run_circuit_verify(const std::string& builder, std::size_t width,
                       std::size_t count, bool exhaustive, std::size_t samples,
                       std::uint64_t seed, const std::string& export_path)
{
  Circuit c;
  std::size_t numbers = 2;
  if (builder == "adder") {
    c = build_adder(width);
  } else if (builder == "comparator") {
    c = build_comparator(width);
  } else if (builder == "iterated-add") {
    numbers = count;
    c = build_iterated_add(count, width);
  } else {
    throw domain_error(errc::unknown_kind, "unknown builder: " + builder);
  }
  if (!export_path.empty()) write_file(export_path, circuit_str(c));

  auto expected = [&](const std::vector<std::uint8_t>& bits) {
    if (builder == "adder")
      return bits_to_u64(bits, 0, width) + bits_to_u64(bits, width, width);
    if (builder == "comparator")
      return static_cast<std::uint64_t>(bits_to_u64(bits, 0, width) <=
                                        bits_to_u64(bits, width, width));
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < numbers; ++i) sum += bits_to_u64(bits, i * width, width);
    return sum;
  };

  const std::size_t in_bits = c.input_width;
  std::size_t checked = 0, mismatches = 0;
  auto run_one = [&](std::vector<std::uint8_t>& bits) {
    auto out = simulate(c, bits);
    std::uint64_t got = bits_to_u64(out, 0, out.size());
    if (got != expected(bits)) ++mismatches;
    ++checked;
  };

  if (exhaustive) {
    if (in_bits > 22)
      throw domain_error(errc::invalid_value,
                         "input space too large for --exhaustive; use --samples");
    std::vector<std::uint8_t> bits(in_bits);
    for (std::uint64_t v = 0; v < (std::uint64_t(1) << in_bits); ++v) {
      for (std::size_t i = 0; i < in_bits; ++i) bits[i] = (v >> i) & 1;
      run_one(bits);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> bits(in_bits);
    for (std::size_t s = 0; s < samples; ++s) {
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng() % 2);
      run_one(bits);
    }
  }

  CircuitMeasure m = measure(c);
  std::cout << "builder: " << builder << "\n";
  std::cout << "inputs: " << c.input_width << "  outputs: " << c.outputs.size()
            << "\n";
  std::cout << "depth: " << m.depth << "  size: " << m.size << "\n";
  std::cout << "cases checked: " << checked << "  mismatches: " << mismatches
            << "\n";
  if (mismatches != 0)
    throw domain_error(errc::invalid_value, "circuit disagrees with the oracle");
  std::cout << "verdict: OK\n";
  return 0;
}

// ------------------------------------------------- formulas (gen / eval)

int run_gen_formulas(const std::string& kind_str, std::size_t count, int depth,
                     std::uint64_t seed, const std::string& out_path)
{
  FormulaKind kind = parse_formula_kind(kind_str);
  std::string out;
  for (std::size_t i = 0; i < count; ++i)
    out += generate_random(kind, depth, seed + i) + "\n";
  if (out_path.empty())
    std::cout << out;
  else
    write_file(out_path, out);
  return 0;
}

int run_eval_formula(const std::string& kind_str, const std::string& in_path,
                     const std::string& out_path)
{
  FormulaKind kind = parse_formula_kind(kind_str);
  std::istringstream in(read_file(in_path));
  std::string line, out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out += eval_formula_line(kind, line) + "\n";
    } catch (const domain_error& e) {
      throw domain_error(e.kind(), "line " + std::to_string(lineno) + ": " +
                                       e.what());
    }
  }
  if (out_path.empty())
    std::cout << out;
  else
    write_file(out_path, out);
  return 0;
}

// ---------------------------------------------------------------- selftest

int run_selftest(int p)
{
  std::size_t checks = 0;
  auto require = [&](bool ok, const std::string& what) {
    ++checks;
    if (!ok) throw domain_error(errc::invalid_value, "selftest failed: " + what);
  };

  // float identities over an exhaustive small window
  {
    std::vector<FpNum> values{FpNum::zero(4)};
    for (std::int64_t mm = 8; mm < 16; ++mm)
      for (std::int64_t e = -4; e < 4; ++e) {
        values.emplace_back(Int(mm), e, 4);
        values.emplace_back(Int(-mm), e, 4);
      }
    FpNum one4 = FpNum::one(4);
    for (const FpNum& a : values) {
      require(fp_add(a, FpNum::zero(4)) == a, "x + 0 = x");
      require(fp_mul(a, one4) == a, "x * 1 = x");
      if (!a.is_zero()) require(fp_div(a, a) == one4, "x / x = 1");
      require(fp_leq(a, a), "x <= x");
      for (const FpNum& b : values) {
        try {
          require(fp_add(a, b) == fp_add(b, a), "commutativity");
        } catch (const domain_error& e) {
          if (e.kind() != errc::exponent_overflow) throw;
        }
      }
    }
  }

  // transcendental spot checks
  {
    require(fp_exp(FpNum::zero(p)) == FpNum::one(p), "exp(0) = 1");
    require(fp_sqrt(round_p(Rational(4), p)) == round_p(Rational(2), p),
            "sqrt(4) = 2");
    FpNum x = round_p(Rational(7, 8), p);
    FpNum s = fp_sin(x), c = fp_cos(x);
    FpNum pyth = fp_add(fp_add(fp_mul(s, s), fp_mul(c, c)),
                        FpNum::one(p).negated());
    Rational mag = pyth.value();
    if (mag < 0) mag = -mag;
    require(mag <= Rational(1, Int(1) << static_cast<unsigned>(p - 3)),
            "sin^2 + cos^2 = 1");
  }

  // depth formulas on a tiny model
  {
    TransformerModel model;
    model.config = make_config(2, 2, 12);
    model.g0_kind = GKind::identity;
    LayerWeights w;
    w.W_Q = FpMatrix::identity(2, 12);
    w.W_K = FpMatrix::identity(2, 12);
    w.W_V = FpMatrix::identity(2, 12);
    w.mlp_W = FpMatrix::identity(2, 12);
    w.mlp_b = FpMatrix(2, 1, 12);
    w.g_kind = GKind::mlp;
    model.layers.push_back(w);
    FpMatrix x = ramp_input(2, 2, 12);
    Tracer t;
    transformer_forward(x, model, &t);
    require(trace_depth(t.trace()) == layer_formula(LayerKind::transformer, 1),
            "transformer depth formula");
  }

  // circuits against integer arithmetic
  {
    Circuit add3 = build_adder(3);
    Circuit cmp3 = build_comparator(3);
    for (std::uint64_t a = 0; a < 8; ++a)
      for (std::uint64_t b = 0; b < 8; ++b) {
        std::vector<std::uint8_t> bits(6);
        for (int i = 0; i < 3; ++i) bits[static_cast<std::size_t>(i)] = (a >> i) & 1;
        for (int i = 0; i < 3; ++i)
          bits[static_cast<std::size_t>(3 + i)] = (b >> i) & 1;
        require(bits_to_u64(simulate(add3, bits), 0, 4) == a + b, "adder");
        require(simulate(cmp3, bits)[0] == (a <= b ? 1 : 0), "comparator");
      }
  }

  // formula round trips and the postfix length rule
  {
    require(eval_bool(parse_bool_infix("((1&0)|(~0))")) == 1, "bool eval");
    bool rejected = false;
    try {
      parse_bool_postfix("10~&");
    } catch (const parse_error& e) {
      rejected = e.kind() == errc::length_condition_violated;
    }
    require(rejected, "postfix length condition");
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      BoolFormula f = generate_bool(6, seed);
      require(equal(parse_bool_infix(print_bool_infix(f)), f), "round trip");
    }
  }

  std::cout << "selftest: " << checks << " checks passed\n";
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"p-bit float transformer, depth accounting, threshold "
               "circuits and formula benchmarks"};
  app.require_subcommand(1);

  int precision = 16;
  int threads = 1;
  app.add_option("--precision", precision, "default precision p (>= 2)")
      ->envname("ROPETC_PRECISION");
  app.add_option("--threads", threads, "worker threads for matrix kernels")
      ->envname("ROPETC_THREADS");

  // eval-transformer
  auto* eval_tf = app.add_subcommand("eval-transformer",
                                     "run the transformer forward pass");
  std::string model_path, input_path, out_path, epsilon;
  eval_tf->add_option("--model", model_path, "model file")->required();
  eval_tf->add_option("--input", input_path, "input matrix file")->required();
  eval_tf->add_option("--out", out_path, "output matrix file")->required();
  eval_tf->add_option("--ln-epsilon", epsilon,
                      "layernorm epsilon (off-definition escape hatch)");

  // depth-report
  auto* report = app.add_subcommand("depth-report",
                                    "trace an evaluation and check the "
                                    "closed-form depth formulas");
  std::string rep_model, rep_input, rep_json, rep_numeric, rep_epsilon;
  report->add_option("--model", rep_model, "model file")->required();
  report->add_option("--input", rep_input, "input matrix file (optional)");
  report->add_option("--json", rep_json, "write the machine-readable report");
  report->add_option("--numeric", rep_numeric,
                     "substitution map, e.g. d_std=3,d_oplus=7");
  report->add_option("--ln-epsilon", rep_epsilon, "layernorm epsilon");

  // circuit-verify
  auto* verify = app.add_subcommand("circuit-verify",
                                    "build a threshold circuit and verify it");
  std::string builder;
  std::size_t width = 4, vcount = 3, samples = 10000;
  std::uint64_t vseed = 1;
  bool exhaustive = false;
  std::string export_path;
  verify->add_option("--builder", builder, "adder | comparator | iterated-add")
      ->required();
  verify->add_option("--width", width, "bit width w")->required();
  verify->add_option("--count", vcount, "summand count (iterated-add)");
  verify->add_flag("--exhaustive", exhaustive, "check every input");
  verify->add_option("--samples", samples, "random samples when not exhaustive");
  verify->add_option("--seed", vseed, "sample seed");
  verify->add_option("--export", export_path, "write the circuit text format");

  // gen-formulas
  auto* gen = app.add_subcommand("gen-formulas", "emit a formula corpus");
  std::string gkind = "bool-infix", gout;
  std::size_t gcount = 10;
  int gdepth = 8;
  std::uint64_t gseed = 1;
  gen->add_option("--kind", gkind,
                  "bool-infix | bool-postfix | arith-int | arith-bool | "
                  "arith-minplus")
      ->required();
  gen->add_option("--count", gcount, "formula count")->required();
  gen->add_option("--depth", gdepth, "depth limit");
  gen->add_option("--seed", gseed, "corpus seed")->required();
  gen->add_option("--out", gout, "output file (default stdout)");

  // eval-formula
  auto* evalf = app.add_subcommand("eval-formula", "evaluate a formula corpus");
  std::string ekind, ein, eout;
  evalf->add_option("--kind", ekind, "formula kind")->required();
  evalf->add_option("--in", ein, "input file, one formula per line")->required();
  evalf->add_option("--out", eout, "output file (default stdout)");

  // selftest
  app.add_subcommand("selftest", "run the embedded invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (precision < 2 || precision > 60)
      throw domain_error(errc::precision_mismatch,
                         "--precision must be in [2, 60]");
    if (threads < 1)
      throw domain_error(errc::invalid_value, "--threads must be >= 1");
    if (app.got_subcommand("eval-transformer"))
      return run_eval_transformer(model_path, input_path, out_path, threads,
                                  epsilon);
    if (app.got_subcommand("depth-report"))
      return run_depth_report(rep_model, rep_input, rep_json, rep_numeric,
                              rep_epsilon);
    if (app.got_subcommand("circuit-verify"))
      return run_circuit_verify(builder, width, vcount, exhaustive, samples,
                                vseed, export_path);
    if (app.got_subcommand("gen-formulas"))
      return run_gen_formulas(gkind, gcount, gdepth, gseed, gout);
    if (app.got_subcommand("eval-formula"))
      return run_eval_formula(ekind, ein, eout);
    if (app.got_subcommand("selftest")) return run_selftest(precision);
    throw domain_error(errc::unknown_kind, "no subcommand");
  } catch (const domain_error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
}
