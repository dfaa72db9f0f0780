#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "stenfuse/emit.hpp"

namespace stenfuse::cli {

namespace {

Backend parse_backend(const std::string& s) {
  if (s == "reference") return Backend::Reference;
  if (s == "fused") return Backend::Fused;
  throw UsageError("unknown backend '" + s + "' (expected reference or fused)");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error("bad number '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw Error("bad integer '" + s + "'");
  return v;
}

}  // namespace

Patches smooth_rhs(const GridLayout& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> wave(1, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const int kx = wave(rng), ky = wave(rng);
  const double px = phase(rng), py = phase(rng);
  const double k = 2.0 * std::numbers::pi * layout.h();
  Patches rho = make_interior(layout);
  // Integer wavenumbers over the full period: the discrete mean is zero.
  fill_periodic(layout, rho, [&](const Point2& p) { return std::sin(kx * k * p[0] + px) * std::sin(ky * k * p[1] + py); });
  return rho;
}

// solve

int cmd_solve(const SolveOptions& opt, std::ostream& out) {
  if (opt.n < 1 || opt.nb < 1) throw UsageError("--n and --nb must be >= 1");
  if (opt.iters < 0) throw UsageError("--iters must be >= 0");
  if (opt.threads < 1) throw UsageError("--threads must be >= 1");
  const GridLayout layout(opt.n, opt.nb);
  auto cfg = ProblemConfig::standard(layout, opt.iters);
  cfg.threads = opt.threads;
  cfg.tol = opt.tol;
  const Patches phi0 = make_ghosted(layout);
  const Patches rho = smooth_rhs(layout, opt.seed);
  const Solution sol = opt.backend == Backend::Fused ? run_fused(cfg, phi0, rho) : run_reference(cfg, phi0, rho);
  const auto& r = sol.report.residuals;
  out << fmt::format("backend {}  n={} nb={} domain {}x{}  h={}\n", to_string(opt.backend), opt.n, opt.nb,
                     layout.extent(), layout.extent(), layout.h());
  out << fmt::format("iterations {}  wall {:.6f} s\n", r.size(), sol.report.wall_time);
  if (!r.empty()) out << fmt::format("residual first {:.6e}  last {:.6e}\n", r.front(), r.back());
  for (const auto& w : sol.report.warnings) out << "warning: " << w << '\n';
  return kOk;
}

// bench

const char* csv_header() { return "n,nb,iters,backend,seconds,final_residual,speedup"; }

std::vector<BenchRecord> run_bench(const BenchOptions& opt) {
  if (opt.sizes.empty()) throw UsageError("--sizes must list at least one box size");
  for (int n : opt.sizes)
    if (n < 1) throw UsageError("box sizes must be >= 1, got " + std::to_string(n));
  if (opt.nb < 1) throw UsageError("--nb must be >= 1");
  if (opt.iters < 1) throw UsageError("--iters must be >= 1");
  if (opt.repeats < 3) throw UsageError("--repeats must be >= 3, got " + std::to_string(opt.repeats));
  if (opt.threads < 1) throw UsageError("--threads must be >= 1");

  std::vector<BenchRecord> records;
  for (int n : opt.sizes) {
    const GridLayout layout(n, opt.nb);
    auto cfg = ProblemConfig::standard(layout, opt.iters);
    cfg.threads = opt.threads;
    const Patches phi0 = make_ghosted(layout);
    const Patches rho = smooth_rhs(layout, opt.seed);
    const auto program = build_fused_program(cfg);

    auto measure = [&](Backend b) {
      auto once = [&] { return b == Backend::Fused ? run_fused(cfg, program, phi0, rho) : run_reference(cfg, phi0, rho); };
      (void)once();  // warmup, discarded
      std::vector<double> times;
      double residual = 0.0;
      for (int r = 0; r < opt.repeats; ++r) {
        const Solution s = once();
        times.push_back(s.report.wall_time);
        residual = s.report.residuals.back();
      }
      std::sort(times.begin(), times.end());
      const std::size_t mid = times.size() / 2;
      const double median = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
      return BenchRecord{n, opt.nb, opt.iters, b, median, residual, std::nullopt};
    };

    std::optional<double> ref_time;
    for (Backend b : {Backend::Reference, Backend::Fused}) {
      if (opt.backend && *opt.backend != b) continue;
      BenchRecord rec = measure(b);
      if (b == Backend::Reference) ref_time = rec.seconds;
      if (b == Backend::Fused && ref_time) rec.speedup = *ref_time / rec.seconds;
      records.push_back(rec);
    }
  }
  return records;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << csv_header() << '\n';
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.n, r.nb, r.iters, to_string(r.backend), r.seconds, r.final_residual,
                       r.speedup ? fmt::format("{}", *r.speedup) : "");
  }
}

std::vector<BenchRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw Error("CSV header mismatch: '" + line + "'");
  std::vector<BenchRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw Error("CSV row has " + std::to_string(f.size()) + " fields: '" + line + "'");
    BenchRecord r;
    r.n = parse_int(f[0]);
    r.nb = parse_int(f[1]);
    r.iters = parse_int(f[2]);
    r.backend = parse_backend(f[3]);
    r.seconds = parse_double(f[4]);
    r.final_residual = parse_double(f[5]);
    if (!f[6].empty()) r.speedup = parse_double(f[6]);
    out.push_back(r);
  }
  return out;
}

// emit

std::string emit_source(const EmitOptions& opt) {
  if (opt.n < 1) throw UsageError("--n must be >= 1");
  if (opt.variant != "scalar" && opt.variant != "openmp") {
    throw UsageError("--emit must be scalar or openmp, got '" + opt.variant + "'");
  }
  if (opt.threads < 1) throw UsageError("--threads must be >= 1");
  const auto n = static_cast<std::size_t>(opt.n);
  // Coefficients are runtime parameters of the emitted function; these values
  // only seed the lowering.
  const auto p = sigma::fuse(sigma::lower(ol::build_poisson(n, n + 2, 0.25, 1.0, 1.0)));
  auto cfg = emit::EmitConfig::for_program(p, opt.threads);
  cfg.function_name = opt.function_name;
  return opt.variant == "scalar" ? emit::emit_c_scalar(p, cfg) : emit::emit_c_openmp(p, cfg);
}

int cmd_emit(const EmitOptions& opt, std::ostream& out) {
  const std::string src = emit_source(opt);
  if (opt.out.empty()) {
    out << src;
    return kOk;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f || !(f << src) || !f.flush()) throw UsageError("cannot write '" + opt.out + "'");
  out << opt.out << '\n';
  return kOk;
}

// command line

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"stenfuse: fused vs unfused Jacobi stencil pipeline"};
  app.require_subcommand(1);

  VerifyOptions vopt;
  auto* verify = app.add_subcommand("verify", "run the oracle checks and print a pass/fail table");
  verify->add_option("--max-n", vopt.max_n, "largest box edge exercised (>= 2)");
  verify->add_option("--seed", vopt.seed, "random seed");
  verify->add_flag("--inject-jacobi-sign-flip", vopt.flip_jacobi_sign, "fault injection: negate lambda in the fused pipeline");

  SolveOptions sopt;
  std::string solve_backend = "fused";
  auto* solve = app.add_subcommand("solve", "run one backend and report residuals");
  solve->add_option("--n", sopt.n, "interior box edge");
  solve->add_option("--nb", sopt.nb, "boxes per dimension");
  solve->add_option("--iters", sopt.iters, "Jacobi iterations");
  solve->add_option("--backend", solve_backend, "reference or fused");
  solve->add_option("--threads", sopt.threads, "worker threads over boxes");
  solve->add_option("--seed", sopt.seed, "seed for the right-hand side");
  solve->add_option("--tol", sopt.tol, "stop once the residual reaches this value");

  BenchOptions bopt;
  std::string bench_backend;
  std::string csv_path;
  auto* bench = app.add_subcommand("bench", "time both backends and write CSV");
  bench->add_option("--sizes", bopt.sizes, "box edges, comma separated")->delimiter(',');
  bench->add_option("--nb", bopt.nb, "boxes per dimension");
  bench->add_option("--iters", bopt.iters, "Jacobi iterations per run");
  bench->add_option("--repeats", bopt.repeats, "timed runs per cell (>= 3), after one warmup");
  bench->add_option("--backend", bench_backend, "only this backend (reference or fused)");
  bench->add_option("--threads", bopt.threads, "worker threads over boxes");
  bench->add_option("--seed", bopt.seed, "seed for the right-hand side");
  bench->add_option("--csv", csv_path, "write CSV here instead of stdout");

  EmitOptions eopt;
  auto* emitc = app.add_subcommand("emit", "write the fused kernel as C source");
  emitc->add_option("--n", eopt.n, "interior box edge");
  emitc->add_option("--emit", eopt.variant, "scalar or openmp");
  emitc->add_option("--threads", eopt.threads, "OpenMP thread count");
  emitc->add_option("--name", eopt.function_name, "C function name");
  emitc->add_option("--out", eopt.out, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*verify) return cmd_verify(vopt, out);
    if (*solve) {
      sopt.backend = parse_backend(solve_backend);
      return cmd_solve(sopt, out);
    }
    if (*bench) {
      if (!bench_backend.empty()) bopt.backend = parse_backend(bench_backend);
      const auto records = run_bench(bopt);
      if (csv_path.empty()) {
        write_csv(out, records);
      } else {
        std::ofstream f(csv_path);
        if (!f) throw UsageError("cannot write '" + csv_path + "'");
        write_csv(f, records);
        out << csv_path << '\n';
      }
      return kOk;
    }
    if (*emitc) return cmd_emit(eopt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
  return kUsage;
}

}  // namespace stenfuse::cli
