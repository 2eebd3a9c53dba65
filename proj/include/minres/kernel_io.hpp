#pragma once

// Coefficient files (JSON), polynomial target tables and CSV output.
//
// Kernel file:
//   { "schema": "minres-kernel/1", "n": 2, "r": 4, "sigma2": 0.5487...,
//     "convention": "K=1+sum 2^H(a) g_a T_a(x)T_a(y)", "provenance": "sdp",
//     "coeffs": [ {"alpha": [0,0], "g": 1.0}, {"alpha": [0,1], "g": ...}, ... ] }
// Only orbit representatives (entries ascending) are listed, in graded-lex
// order; readers expand every representative to its whole S_n orbit.
//
// Polynomial table (a target function f = sum_a c_a T_a):
//   { "schema": "minres-chebpoly/1", "n": 2, "coeffs": [ {"alpha": [1,0], "c": 0.5}, ... ] }

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "minres/chebyshev.hpp"
#include "minres/errors.hpp"
#include "minres/functions.hpp"
#include "minres/indexcomb.hpp"
#include "minres/kernels.hpp"

namespace minres::io {

inline constexpr const char* kKernelSchema = "minres-kernel/1";
inline constexpr const char* kPolySchema = "minres-chebpoly/1";
inline constexpr const char* kConvention = "K=1+sum 2^H(a) g_a T_a(x)T_a(y)";
inline constexpr double kInvarianceTolerance = 1e-7;

inline nlohmann::json kernel_to_json(const KernelCoefficients& k) {
  if (!k.is_permutation_invariant(kInvarianceTolerance))
    throw ParameterError("kernel file: only permutation-invariant kernels can be written (orbit representatives)");
  nlohmann::json coeffs = nlohmann::json::array();
  for (std::size_t p = 0; p < k.index().size(); ++p) {
    const auto& a = k.index()[p];
    if (!a.is_sorted()) continue;
    coeffs.push_back({{"alpha", a.entries()}, {"g", k.values()[p]}});
  }
  return {{"schema", kKernelSchema},
          {"n", k.n()},
          {"r", k.r()},
          {"sigma2", kernels::resolution(k)},
          {"convention", kConvention},
          {"provenance", to_string(k.provenance())},
          {"coeffs", std::move(coeffs)}};
}

inline KernelCoefficients kernel_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != kKernelSchema)
      throw ParameterError("kernel file: unsupported schema '" + j.at("schema").get<std::string>() + "'");
    const int n = j.at("n").get<int>();
    const int r = j.at("r").get<int>();
    if (n < 1 || r < 0) throw ParameterError("kernel file: invalid n or r");
    auto idx = kernels::shared_index(n, r);
    std::vector<double> g(idx->size(), 0.0);
    for (const auto& e : j.at("coeffs")) {
      auto alpha = e.at("alpha").get<std::vector<int>>();
      const double v = e.at("g").get<double>();
      if (alpha.size() != static_cast<std::size_t>(n)) throw ParameterError("kernel file: alpha has the wrong length");
      for_each_distinct_permutation(alpha, [&](const std::vector<int>& perm) {
        const auto pos = idx->find(perm);
        if (!pos) throw ParameterError("kernel file: alpha outside N^n_r");
        g[*pos] = v;
      });
    }
    const auto prov = j.contains("provenance") ? provenance_from_string(j.at("provenance").get<std::string>())
                                               : Provenance::Sdp;
    return {IndexedValues{idx, std::move(g)}, prov};
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("kernel file: malformed JSON content: ") + e.what());
  }
}

inline void write_kernel_file(const std::string& path, const KernelCoefficients& k) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open '" + path + "' for writing");
  os << kernel_to_json(k).dump(2) << '\n';
  if (!os) throw ParameterError("failed writing '" + path + "'");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline KernelCoefficients read_kernel_file(const std::string& path) { return kernel_from_json(read_json_file(path)); }

/// Target function given by Chebyshev coefficients.
inline TargetFunction polynomial_from_json(const nlohmann::json& j, const std::string& name) {
  try {
    if (j.at("schema").get<std::string>() != kPolySchema)
      throw ParameterError("polynomial table: unsupported schema");
    const int n = j.at("n").get<int>();
    if (n < 1) throw ParameterError("polynomial table: invalid n");
    std::vector<std::pair<std::vector<int>, double>> terms;
    int degree = 0;
    double abs_sum = 0.0;
    double lip = 0.0;
    for (const auto& e : j.at("coeffs")) {
      auto alpha = e.at("alpha").get<std::vector<int>>();
      if (alpha.size() != static_cast<std::size_t>(n)) throw ParameterError("polynomial table: alpha has the wrong length");
      int d = 0;
      double grad2 = 0.0;
      for (int a : alpha) {
        if (a < 0) throw ParameterError("polynomial table: negative exponent");
        d += a;
        grad2 += static_cast<double>(a) * a * a * a;  // |T_k'| <= k^2
      }
      const double c = e.at("c").get<double>();
      degree = std::max(degree, d);
      abs_sum += std::abs(c);
      lip += std::abs(c) * std::sqrt(grad2);
      terms.emplace_back(std::move(alpha), c);
    }
    TargetFunction t;
    t.name = name;
    t.n = n;
    t.lipschitz = lip;
    t.oscillation = 2.0 * abs_sum;
    t.f = [terms, degree](std::span<const double> x) {
      std::vector<std::vector<double>> tab;
      tab.reserve(x.size());
      for (double xi : x) tab.push_back(cheb::eval_all(degree, xi));
      double acc = 0.0;
      for (const auto& [alpha, c] : terms) {
        double term = c;
        for (std::size_t i = 0; i < alpha.size(); ++i) term *= tab[i][static_cast<std::size_t>(alpha[i])];
        acc += term;
      }
      return acc;
    };
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("polynomial table: malformed JSON content: ") + e.what());
  }
}

inline TargetFunction read_polynomial_file(const std::string& path) {
  return polynomial_from_json(read_json_file(path), "table:" + path);
}

/// Round-trippable decimal text for a double.
inline std::string full_precision(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

/// Minimal CSV writer: header row then records, comma separated.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) { row(header); }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os_ << (i ? "," : "") << fields[i];
    os_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << full_precision(values[i]);
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

}  // namespace minres::io
