#pragma once

// Transformer model file format: line/token oriented key-value text with
// embedded matrix blocks in the tensor format ("rows cols p" + entries).
//
//   ropetc-model 1
//   p 16
//   n 4
//   d 4
//   m 2
//   theta_base 10000          (or: thetas <d/2 FpNum tokens>)
//   g0 identity               (mlp additionally takes g0_mlp_W / g0_mlp_b)
//   layer
//   g mlp
//   W_Q <matrix>  W_K <matrix>  W_V <matrix>  mlp_W <matrix>  mlp_b <matrix>
//
// '#' starts a comment running to end of line.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ropetc/rope.hpp"

namespace ropetc {

// "123", "-7", "22/7" or decimal "0.125"
inline Rational parse_rational(const std::string& s)
{
  auto fail = [&] {
    throw domain_error(errc::format_error, "bad rational literal: " + s);
  };
  if (s.empty()) fail();
  std::size_t slash = s.find('/');
  std::size_t dot = s.find('.');
  try {
    if (slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) fail();
      return den > 0 ? Rational(num, den) : Rational(-num, -den);
    }
    if (dot != std::string::npos) {
      std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
      if (frac.empty()) fail();
      for (char c : frac)
        if (!std::isdigit(static_cast<unsigned char>(c))) fail();
      Int den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      bool neg = !whole.empty() && whole[0] == '-';
      Int w(whole.empty() || whole == "-" ? "0" : whole);
      Int scaled = abs(w) * den + Int(frac);
      return Rational(neg ? -scaled : scaled, den);
    }
    return Rational(Int(s));
  } catch (const std::exception&) {
    fail();
  }
  return Rational(0); // unreachable
}

namespace detail {

// token stream that drops '#' comments
class TokenStream {
public:
  explicit TokenStream(std::istream& in) : in_(in) {}

  bool next(std::string& tok)
  {
    while (in_ >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return true;
    }
    return false;
  }

  std::string require(const std::string& what)
  {
    std::string tok;
    if (!next(tok))
      throw domain_error(errc::format_error,
                         "model file ended while expecting " + what);
    return tok;
  }

  long long require_int(const std::string& what)
  {
    std::string tok = require(what);
    try {
      return std::stoll(tok);
    } catch (const std::exception&) {
      throw domain_error(errc::format_error,
                         "expected integer for " + what + ", got '" + tok + "'");
    }
  }

  FpMatrix require_matrix(const std::string& what, std::size_t rows,
                          std::size_t cols, int p)
  {
    std::string header = require(what + " rows");
    std::string c = require(what + " cols");
    std::string pp = require(what + " precision");
    std::ostringstream text;
    text << header << ' ' << c << ' ' << pp << '\n';
    long long want = 0;
    try {
      want = std::stoll(header) * std::stoll(c);
    } catch (const std::exception&) {
      throw domain_error(errc::format_error, what + ": bad matrix header");
    }
    for (long long i = 0; i < want; ++i) text << require(what + " entry") << ' ';
    FpMatrix m = FpMatrix::parse(text.str());
    if (m.rows() != rows || m.cols() != cols || m.precision() != p)
      throw domain_error(errc::format_error,
                         what + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " at p=" + std::to_string(p));
    return m;
  }

private:
  std::istream& in_;
};

inline GKind parse_gkind(const std::string& s)
{
  if (s == "identity") return GKind::identity;
  if (s == "mlp") return GKind::mlp;
  if (s == "layernorm") return GKind::layernorm;
  throw domain_error(errc::format_error, "unknown g kind: " + s);
}

} // namespace detail

inline TransformerModel parse_model(std::istream& in)
{
  detail::TokenStream ts(in);
  if (ts.require("magic") != "ropetc-model")
    throw domain_error(errc::format_error, "not a ropetc-model file");
  if (ts.require("version") != "1")
    throw domain_error(errc::format_error, "unsupported model version");

  TransformerModel model;
  long long n = -1, d = -1, m = -1, p = -1;
  bool have_thetas = false;
  std::string tok;
  // header keys until the first "layer" (or EOF for m = 0)
  for (;;) {
    if (!ts.next(tok)) {
      tok.clear();
      break;
    }
    if (tok == "layer") break;
    if (tok == "p") p = ts.require_int("p");
    else if (tok == "n") n = ts.require_int("n");
    else if (tok == "d") d = ts.require_int("d");
    else if (tok == "m") m = ts.require_int("m");
    else if (tok == "theta_base")
      model.config.theta_base = parse_rational(ts.require("theta_base"));
    else if (tok == "thetas") {
      if (d <= 0 || p <= 0)
        throw domain_error(errc::format_error, "thetas must follow d and p");
      model.config.thetas.clear();
      for (long long i = 0; i < d / 2; ++i) {
        FpNum t = FpNum::parse(ts.require("theta"));
        if (t.precision() != p)
          throw domain_error(errc::format_error, "theta precision mismatch");
        model.config.thetas.push_back(std::move(t));
      }
      have_thetas = true;
    } else if (tok == "g0") {
      model.g0_kind = detail::parse_gkind(ts.require("g0 kind"));
    } else if (tok == "g0_mlp_W") {
      if (d <= 0 || p <= 0)
        throw domain_error(errc::format_error, "g0_mlp_W must follow d and p");
      FpMatrix w = ts.require_matrix("g0_mlp_W", d, d, static_cast<int>(p));
      if (!model.g0_mlp) model.g0_mlp.emplace(w, FpMatrix(d, 1, static_cast<int>(p)));
      else model.g0_mlp->first = std::move(w);
    } else if (tok == "g0_mlp_b") {
      if (d <= 0 || p <= 0)
        throw domain_error(errc::format_error, "g0_mlp_b must follow d and p");
      FpMatrix b = ts.require_matrix("g0_mlp_b", d, 1, static_cast<int>(p));
      if (!model.g0_mlp) model.g0_mlp.emplace(FpMatrix(d, d, static_cast<int>(p)), b);
      else model.g0_mlp->second = std::move(b);
    } else {
      throw domain_error(errc::format_error, "unknown model key: " + tok);
    }
  }
  if (n <= 0 || d <= 0 || m < 0 || p < 2)
    throw domain_error(errc::format_error, "model header must set n, d, m, p");
  model.config.n = static_cast<std::size_t>(n);
  model.config.d = static_cast<std::size_t>(d);
  model.config.p = static_cast<int>(p);
  if (!have_thetas)
    model.config.thetas = default_thetas(model.config.d, model.config.theta_base,
                                         model.config.p);
  model.config.validate();
  if (model.g0_kind == GKind::mlp && !model.g0_mlp)
    throw domain_error(errc::format_error, "g0 mlp requires g0_mlp_W and g0_mlp_b");

  // layer blocks
  while (tok == "layer") {
    LayerWeights w;
    w.W_Q = FpMatrix(model.config.d, model.config.d, model.config.p);
    w.W_K = w.W_Q;
    w.W_V = w.W_Q;
    w.mlp_W = w.W_Q;
    w.mlp_b = FpMatrix(model.config.d, 1, model.config.p);
    bool have_q = false, have_k = false, have_v = false, have_mw = false,
         have_mb = false;
    for (;;) {
      if (!ts.next(tok)) {
        tok.clear();
        break;
      }
      if (tok == "layer") break;
      if (tok == "g") w.g_kind = detail::parse_gkind(ts.require("g kind"));
      else if (tok == "W_Q") {
        w.W_Q = ts.require_matrix("W_Q", model.config.d, model.config.d,
                                  model.config.p);
        have_q = true;
      } else if (tok == "W_K") {
        w.W_K = ts.require_matrix("W_K", model.config.d, model.config.d,
                                  model.config.p);
        have_k = true;
      } else if (tok == "W_V") {
        w.W_V = ts.require_matrix("W_V", model.config.d, model.config.d,
                                  model.config.p);
        have_v = true;
      } else if (tok == "mlp_W") {
        w.mlp_W = ts.require_matrix("mlp_W", model.config.d, model.config.d,
                                    model.config.p);
        have_mw = true;
      } else if (tok == "mlp_b") {
        w.mlp_b = ts.require_matrix("mlp_b", model.config.d, 1, model.config.p);
        have_mb = true;
      } else {
        throw domain_error(errc::format_error, "unknown layer key: " + tok);
      }
    }
    if (!have_q || !have_k || !have_v)
      throw domain_error(errc::format_error, "layer is missing W_Q/W_K/W_V");
    if (w.g_kind == GKind::mlp && (!have_mw || !have_mb))
      throw domain_error(errc::format_error, "mlp layer is missing mlp_W/mlp_b");
    model.layers.push_back(std::move(w));
  }
  if (static_cast<long long>(model.layers.size()) != m)
    throw domain_error(errc::format_error,
                       "m = " + std::to_string(m) + " but found " +
                           std::to_string(model.layers.size()) + " layer blocks");
  return model;
}

inline TransformerModel parse_model(const std::string& text)
{
  std::istringstream in(text);
  return parse_model(in);
}

inline std::string rational_str(const Rational& r)
{
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline void write_model(std::ostream& out, const TransformerModel& model)
{
  const auto& cfg = model.config;
  out << "ropetc-model 1\n";
  out << "p " << cfg.p << "\n";
  out << "n " << cfg.n << "\n";
  out << "d " << cfg.d << "\n";
  out << "m " << model.layers.size() << "\n";
  out << "thetas";
  for (const FpNum& t : cfg.thetas) out << ' ' << t.str();
  out << "\n";
  out << "g0 " << to_string(model.g0_kind) << "\n";
  if (model.g0_mlp) {
    out << "g0_mlp_W\n" << model.g0_mlp->first.str();
    out << "g0_mlp_b\n" << model.g0_mlp->second.str();
  }
  for (const LayerWeights& w : model.layers) {
    out << "layer\n";
    out << "g " << to_string(w.g_kind) << "\n";
    out << "W_Q\n" << w.W_Q.str();
    out << "W_K\n" << w.W_K.str();
    out << "W_V\n" << w.W_V.str();
    if (w.g_kind == GKind::mlp) {
      out << "mlp_W\n" << w.mlp_W.str();
      out << "mlp_b\n" << w.mlp_b.str();
    }
  }
}

inline std::string model_str(const TransformerModel& model)
{
  std::ostringstream out;
  write_model(out, model);
  return out.str();
}

} // namespace ropetc
