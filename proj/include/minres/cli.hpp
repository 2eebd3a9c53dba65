#pragma once

// Command-line front end: sigma, approx, blocks and regress.
//
// Exit codes: 0 success, 1 solve or criterion failure, 2 usage error.
// Precedence of settings: flags, then the --config JSON sidecar, then
// defaults. MINRES_THREADS sets the default worker count for sweeps over r.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "minres/errors.hpp"
#include "minres/functions.hpp"
#include "minres/kernel_io.hpp"
#include "minres/kernels.hpp"
#include "minres/pipeline.hpp"
#include "minres/regression.hpp"
#include "minres/symmetry.hpp"

namespace minres::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct JobSpec {
  std::string command;
  int n = 2;
  std::string r = "4";  // "r" or "lo:hi"
  std::optional<int> r_prime;
  std::string symmetry = "on";
  int grid = 501;
  std::string func = "builtin:qsin";
  std::string kernel = "sdp";
  std::string kernel_file;
  std::string out;
  std::string format = "text";
  std::uint64_t seed = kDefaultBlockSeed;
  sdp::SolverConfig solver;
  bool verbose = false;
  int threads = 0;  // 0: MINRES_THREADS or 1
  bool stretch = false;
  std::vector<int> only;
};

/// Inclusive degree range from "r" or "lo:hi".
inline std::pair<int, int> parse_range(const std::string& s) {
  auto to_int = [&](const std::string& t) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw ParameterError("invalid degree '" + s + "' (expected r or lo:hi)");
    return v;
  };
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const int r = to_int(s);
    return {r, r};
  }
  const int lo = to_int(s.substr(0, colon));
  const int hi = to_int(s.substr(colon + 1));
  if (hi < lo) throw ParameterError("degree range '" + s + "' is empty");
  return {lo, hi};
}

inline int default_threads() {
  if (const char* env = std::getenv("MINRES_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("MINRES_THREADS must be a positive integer (got '") + env + "')");
  }
  return 1;
}

/// Runs job(i) for i in [0, count) on `threads` workers. Results are stored
/// by index; the first exception (lowest index) is rethrown after all
/// workers finish.
template <class R>
std::vector<R> run_pool(std::size_t count, int threads, const std::function<R(std::size_t)>& job) {
  std::vector<std::optional<R>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i].emplace(job(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto nt = static_cast<std::size_t>(std::max(1, threads));
  if (nt == 1 || count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(nt, count); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

inline std::string fixed6(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

inline void validate(const JobSpec& job) {
  if (job.n < 1) throw ParameterError("--n must be at least 1");
  const auto [lo, hi] = parse_range(job.r);
  if (lo < 1) throw ParameterError("--r must be at least 1");
  if (job.r_prime && *job.r_prime < hi) throw ParameterError("--rprime must satisfy r' >= r");
  if (job.grid < 2) throw ParameterError("--grid needs at least 2 points per axis");
  if (job.format != "text" && job.format != "json" && job.format != "csv")
    throw ParameterError("--format must be text, json or csv");
  symmetry_mode_from_string(job.symmetry);
  kernel_kind_from_string(job.kernel);
  if (job.threads < 0) throw ParameterError("--threads must be positive");
}

inline KernelSolveOptions solve_options(const JobSpec& job, std::ostream& log) {
  KernelSolveOptions o;
  o.symmetry = symmetry_mode_from_string(job.symmetry);
  o.r_gram = job.r_prime;
  o.seed = job.seed;
  o.solver = job.solver;
  o.solver.verbose = job.verbose;
  if (job.verbose) o.solver.log = &log;
  return o;
}

inline std::vector<int> degrees(const JobSpec& job) {
  const auto [lo, hi] = parse_range(job.r);
  std::vector<int> rs;
  for (int r = lo; r <= hi; ++r) rs.push_back(r);
  return rs;
}

/// Coefficient file path for degree r: `out` itself for a single degree,
/// otherwise `<stem>_r<r><ext>`.
inline std::string kernel_path(const std::string& out, int r, bool sweep) {
  if (!sweep) return out;
  const auto dot = out.find_last_of('.');
  const auto slash = out.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? out.substr(0, dot) : out;
  const std::string ext = has_ext ? out.substr(dot) : ".json";
  return stem + "_r" + std::to_string(r) + ext;
}

// ---------------------------------------------------------------------------
// sigma
// ---------------------------------------------------------------------------

inline int cmd_sigma(const JobSpec& job, std::ostream& out, std::ostream& err) {
  const auto rs = degrees(job);
  const bool sweep = rs.size() > 1;
  const auto opt = solve_options(job, err);
  const int threads = job.threads ? job.threads : default_threads();
  const auto sols =
      run_pool<KernelSolve>(rs.size(), threads, [&](std::size_t i) { return solve_kernel(job.n, rs[i], opt); });

  if (!job.out.empty())
    for (std::size_t i = 0; i < rs.size(); ++i) io::write_kernel_file(kernel_path(job.out, rs[i], sweep), sols[i].kernel);

  auto rp = [&](int r) { return job.r_prime.value_or(r); };
  if (job.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < rs.size(); ++i) {
      nlohmann::json j = {{"n", job.n}, {"r", rs[i]}, {"rprime", rp(rs[i])}, {"sigma2", sols[i].sigma2}};
      auto stats = [](const ModelStats& s) {
        return nlohmann::json{{"block_dims", s.block_dims},
                              {"constraints", s.constraints},
                              {"iterations", s.iterations},
                              {"objective", s.objective},
                              {"seconds", s.seconds}};
      };
      if (sols[i].full) j["full"] = stats(*sols[i].full);
      if (sols[i].reduced) j["reduced"] = stats(*sols[i].reduced);
      arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
  } else if (job.format == "csv") {
    io::CsvWriter csv(out, {"n", "r", "rprime", "sigma2"});
    for (std::size_t i = 0; i < rs.size(); ++i)
      csv.row(std::vector<std::string>{std::to_string(job.n), std::to_string(rs[i]), std::to_string(rp(rs[i])),
                                       io::full_precision(sols[i].sigma2)});
  } else {
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const auto& s = sols[i];
      out << "n=" << job.n << " r=" << rs[i];
      if (job.r_prime) out << " r'=" << rp(rs[i]);
      out << " sigma2=" << fixed6(s.sigma2);
      if (s.full && s.reduced)
        out << " (full " << fixed6(s.full->objective) << ", reduced " << fixed6(s.reduced->objective) << ", agree)";
      out << '\n';
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// approx
// ---------------------------------------------------------------------------

inline TargetFunction resolve_function(const std::string& job) {
  if (job.rfind("builtin:", 0) == 0) return builtin_function(job.substr(8));
  if (job.rfind("table:", 0) == 0) return io::read_polynomial_file(job.substr(6));
  return builtin_function(job);
}

struct ApproxResult {
  int r = 0;
  double error = 0.0;
  double sigma2 = 0.0;
  std::optional<KernelCoefficients> kernel;
};

inline void dump_grid(const std::string& path, const TargetFunction& f, const KernelCoefficients& k, int grid) {
  std::ofstream os(path);
  if (!os) throw ParameterError("cannot open '" + path + "' for writing");
  std::vector<std::string> header;
  for (int i = 1; i <= k.n(); ++i) header.push_back("x" + std::to_string(i));
  header.insert(header.end(), {"f", "approx"});
  io::CsvWriter csv(os, header);
  const auto c = cheb::cheb_coeffs([&](std::span<const double> x) { return f(x); }, k.index_ptr(),
                                   cheb::default_nodes(k.r()));
  const kernels::ApproxEvaluator eval(kernels::apply_kernel(k, c));
  kernels::for_each_grid_point(k.n(), grid, [&](std::span<const double> x) {
    std::vector<double> row(x.begin(), x.end());
    row.push_back(f(x));
    row.push_back(eval(x));
    csv.row(row);
  });
  if (!os) throw ParameterError("failed writing '" + path + "'");
}

inline int cmd_approx(const JobSpec& job, std::ostream& out, std::ostream& err) {
  const TargetFunction f = resolve_function(job.func);
  std::vector<ApproxResult> res;
  int n = job.n;
  if (!job.kernel_file.empty()) {
    auto k = io::read_kernel_file(job.kernel_file);
    n = k.n();
    ApproxResult a;
    a.r = k.r();
    a.sigma2 = kernels::resolution(k);
    a.error = approximation_error(f, k, job.grid);
    a.kernel = std::move(k);
    res.push_back(std::move(a));
  } else {
    const auto rs = degrees(job);
    const auto kind = kernel_kind_from_string(job.kernel);
    const auto opt = solve_options(job, err);
    const int threads = job.threads ? job.threads : default_threads();
    res = run_pool<ApproxResult>(rs.size(), threads, [&](std::size_t i) {
      auto k = make_kernel(kind, job.n, rs[i], opt);
      ApproxResult a;
      a.r = rs[i];
      a.sigma2 = kernels::resolution(k);
      a.error = approximation_error(f, k, job.grid);
      a.kernel = std::move(k);
      return a;
    });
  }
  if (!job.out.empty()) {
    const bool sweep = res.size() > 1;
    for (const auto& a : res) {
      std::string path = job.out;
      if (sweep) {
        path = kernel_path(job.out, a.r, true);
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") path.replace(path.size() - 5, 5, ".csv");
      }
      dump_grid(path, f, *a.kernel, job.grid);
    }
  }
  const std::string kname = job.kernel_file.empty() ? job.kernel : "file:" + job.kernel_file;
  if (job.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : res)
      arr.push_back({{"func", f.name},
                     {"kernel", kname},
                     {"n", n},
                     {"r", a.r},
                     {"grid", job.grid},
                     {"sigma2", a.sigma2},
                     {"error", a.error}});
    out << arr.dump(2) << '\n';
  } else if (job.format == "csv") {
    io::CsvWriter csv(out, {"r", "sigma2", "error"});
    for (const auto& a : res) csv.row(std::vector<double>{static_cast<double>(a.r), a.sigma2, a.error});
  } else {
    for (const auto& a : res)
      out << "func=" << f.name << " kernel=" << kname << " n=" << n << " r=" << a.r << " grid=" << job.grid
          << " error=" << fixed6(a.error) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// blocks
// ---------------------------------------------------------------------------

inline std::string block_row(const SymmetryBlocks& sb) {
  std::ostringstream os;
  os << sb.n << " | " << sb.r << " | " << sb.k() << " | ";
  for (std::size_t i = 0; i < sb.dims.size(); ++i) os << (i ? ", " : "") << sb.dims[i];
  os << " | " << sb.s();
  return os.str();
}

inline int cmd_blocks(const JobSpec& job, std::ostream& out, std::ostream&) {
  const auto rs = degrees(job);
  const int threads = job.threads ? job.threads : default_threads();
  const auto sbs = run_pool<SymmetryBlocks>(rs.size(), threads,
                                            [&](std::size_t i) { return compute_blocks(job.n, rs[i], job.seed); });
  if (job.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& sb : sbs)
      arr.push_back({{"n", sb.n}, {"r", sb.r}, {"k", sb.k()}, {"dims", sb.dims}, {"irreps", sb.irreps},
                     {"multiplicities", sb.multiplicities}, {"s", sb.s()}});
    out << arr.dump(2) << '\n';
  } else if (job.format == "csv") {
    io::CsvWriter csv(out, {"n", "r", "k", "dims", "s"});
    for (const auto& sb : sbs) {
      std::string dims;
      for (std::size_t i = 0; i < sb.dims.size(); ++i) dims += (i ? " " : "") + std::to_string(sb.dims[i]);
      csv.row(std::vector<std::string>{std::to_string(sb.n), std::to_string(sb.r), std::to_string(sb.k()), dims,
                                       std::to_string(sb.s())});
    }
  } else {
    out << "n | r | k(n,r) | k_1, ..., k_k | s(n,r)\n";
    for (const auto& sb : sbs) out << block_row(sb) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// regress
// ---------------------------------------------------------------------------

inline int cmd_regress(const JobSpec& job, std::ostream& out, std::ostream& err) {
  regress::Options opt;
  opt.stretch = job.stretch;
  opt.grid = job.grid;
  opt.only.insert(job.only.begin(), job.only.end());
  opt.solve.seed = job.seed;
  opt.solve.solver = job.solver;
  opt.progress = job.format == "json" ? &err : &out;
  const auto rep = regress::run(opt);
  const auto j = regress::to_json(rep);
  if (job.format == "json") out << j.dump(2) << '\n';
  if (!job.out.empty()) {
    std::ofstream os(job.out);
    if (!os) throw ParameterError("cannot open '" + job.out + "' for writing");
    os << j.dump(2) << '\n';
  }
  if (job.format != "json") out << (rep.passed() ? "PASS" : "FAIL") << " (" << fixed6(rep.seconds) << " s)\n";
  return rep.passed() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

namespace detail {

/// Fills settings from the JSON sidecar for every option not given as a flag.
inline void apply_config(const std::string& path, JobSpec& job, CLI::App& sub) {
  const auto j = io::read_json_file(path);
  if (!j.is_object()) throw ParameterError("config file must hold a JSON object");
  static const std::set<std::string> known = {"n",        "r",        "rprime",    "symmetry", "grid",
                                              "func",     "kernel",   "kernel-file", "out",     "format",
                                              "seed",     "tol-gap",  "tol-feas",  "max-iters", "threads",
                                              "verbose",  "stretch"};
  auto given = [&](const std::string& flag) {
    const CLI::Option* o = sub.get_option_no_throw(flag);
    return o == nullptr || o->count() > 0;  // absent: the key does not apply to this command
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (!known.count(key)) throw ParameterError("config file: unknown key '" + key + "'");
      if (given("--" + key)) continue;
      if (key == "n") job.n = v.get<int>();
      else if (key == "r") job.r = v.is_string() ? v.get<std::string>() : std::to_string(v.get<int>());
      else if (key == "rprime") job.r_prime = v.get<int>();
      else if (key == "symmetry") job.symmetry = v.get<std::string>();
      else if (key == "grid") job.grid = v.get<int>();
      else if (key == "func") job.func = v.get<std::string>();
      else if (key == "kernel") job.kernel = v.get<std::string>();
      else if (key == "kernel-file") job.kernel_file = v.get<std::string>();
      else if (key == "out") job.out = v.get<std::string>();
      else if (key == "format") job.format = v.get<std::string>();
      else if (key == "seed") job.seed = v.get<std::uint64_t>();
      else if (key == "tol-gap") job.solver.tol_gap = v.get<double>();
      else if (key == "tol-feas") job.solver.tol_feas = v.get<double>();
      else if (key == "max-iters") job.solver.max_iters = v.get<int>();
      else if (key == "threads") job.threads = v.get<int>();
      else if (key == "verbose") job.verbose = v.get<bool>();
      else if (key == "stretch") job.stretch = v.get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config file: ") + e.what());
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum-resolution polynomial kernels on [-1,1]^n"};
  app.require_subcommand(1);
  JobSpec job;
  std::string config;
  int r_prime = 0;
  bool fast = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--n", job.n, "dimension")->check(CLI::PositiveNumber);
    sub->add_option("--r", job.r, "degree r or range lo:hi");
    sub->add_option("--seed", job.seed, "seed of the randomized block computation");
    sub->add_option("--format", job.format, "text, json or csv")->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--out", job.out, "output path");
    sub->add_option("--threads", job.threads, "worker count for sweeps (default MINRES_THREADS or 1)");
    sub->add_option("--config", config, "JSON sidecar with default settings");
  };
  auto solver = [&](CLI::App* sub) {
    sub->add_option("--rprime", r_prime, "Gram degree r' >= r (decoupled degrees)");
    sub->add_option("--symmetry", job.symmetry, "on, off or both")->check(CLI::IsMember({"on", "off", "both"}));
    sub->add_option("--tol-gap", job.solver.tol_gap, "relative duality gap tolerance");
    sub->add_option("--tol-feas", job.solver.tol_feas, "feasibility tolerance");
    sub->add_option("--max-iters", job.solver.max_iters, "interior-point iteration limit");
    sub->add_flag("--verbose", job.verbose, "log solver iterations to stderr");
  };

  auto* sigma = app.add_subcommand("sigma", "optimal resolution sigma^2 (and coefficient file with --out)");
  common(sigma);
  solver(sigma);
  auto* approx = app.add_subcommand("approx", "uniform approximation error of a kernel on a grid");
  common(approx);
  solver(approx);
  approx->add_option("--func", job.func, "builtin:qsin, builtin:peaks, builtin:one or table:<path>");
  approx->add_option("--kernel", job.kernel, "sdp, product, fejer or dirichlet")
      ->check(CLI::IsMember({"sdp", "product", "fejer", "dirichlet"}));
  approx->add_option("--kernel-file", job.kernel_file, "use the kernel stored in a coefficient file");
  approx->add_option("--grid", job.grid, "grid points per axis");
  auto* blocks = app.add_subcommand("blocks", "block sizes of the symmetry-reduced SDP");
  common(blocks);
  auto* regress = app.add_subcommand("regress", "run the regression criteria");
  common(regress);
  regress->add_option("--grid", job.grid, "error grid points per axis");
  regress->add_option("--only", job.only, "criterion ids to run");
  regress->add_option("--tol-gap", job.solver.tol_gap, "relative duality gap tolerance");
  regress->add_option("--tol-feas", job.solver.tol_feas, "feasibility tolerance");
  regress->add_option("--max-iters", job.solver.max_iters, "interior-point iteration limit");
  auto* stretch = regress->add_flag("--stretch", job.stretch, "also run the stretch targets");
  regress->add_flag("--fast", fast, "skip the stretch targets (default)")->excludes(stretch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  job.command = sub->get_name();
  try {
    if (sub->get_option_no_throw("--rprime") && sub->get_option("--rprime")->count() > 0) job.r_prime = r_prime;
    if (!config.empty()) detail::apply_config(config, job, *sub);
    if (job.command == "regress" && fast) job.stretch = false;
    validate(job);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (job.command == "sigma") return cmd_sigma(job, out, err);
    if (job.command == "approx") return cmd_approx(job, out, err);
    if (job.command == "blocks") return cmd_blocks(job, out, err);
    return cmd_regress(job, out, err);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace minres::cli
