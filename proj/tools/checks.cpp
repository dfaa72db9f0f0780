// The verify table: every oracle property of the library, by name.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "commands.hpp"
#include "stenfuse/emit.hpp"

namespace stenfuse::cli {

namespace {

using Rng = std::mt19937_64;

struct Ctx {
  VerifyOptions opt;
  std::vector<int> sizes;  // box edges exercised, all <= max_n
};

double uni(Rng& r, double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(r); }
int uni_int(Rng& r, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(r); }

std::vector<double> rand_vec(Rng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uni(r);
  return v;
}

Box2 rand_box(Rng& r, int max_edge) {
  const Point2 lo(uni_int(r, -6, 6), uni_int(r, -6, 6));
  return Box2(lo, lo + Point2(uni_int(r, 0, max_edge - 1), uni_int(r, 0, max_edge - 1)));
}

Patches rand_ghosted(Rng& r, const GridLayout& l) {
  Patches p = make_ghosted(l);
  for (std::size_t k = 0; k < p.size(); ++k) l.interior(k).for_each([&](const Point2& q) { p[k](q) = uni(r); });
  exchange_ghosts(l, p);
  return p;
}

Patches rand_zero_mean(Rng& r, const GridLayout& l) {
  Patches p = make_interior(l);
  double sum = 0.0;
  std::size_t count = 0;
  for (auto& b : p) {
    for (auto& v : b.values()) sum += (v = uni(r));
    count += b.size();
  }
  for (auto& b : p)
    for (auto& v : b.values()) v -= sum / static_cast<double>(count);
  return p;
}

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

double max_rel(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, rel(a[i], b[i]));
  return d;
}

// Brute-force Laplacian matrix on an (n+2)^2 patch, row = interior point.
std::vector<double> laplace_rows(std::size_t n) {
  const std::size_t m = n + 2;
  std::vector<double> a(n * n * m * m, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const std::size_t row = y * n + x, c = (y + 1) * m + (x + 1);
      double* r = &a[row * m * m];
      r[c - m] += 1, r[c - 1] += 1, r[c] -= 4, r[c + 1] += 1, r[c + m] += 1;
    }
  }
  return a;
}

// Per-patch Jacobi step written out point by point.
std::vector<double> hand_step(std::size_t n, std::span<const double> x, double w, double lambda, double h) {
  const std::size_t m = n + 2;
  std::vector<double> y(n * n + 1, 0.0);
  for (std::size_t i = 0; i < n * n; ++i) {
    const std::size_t c = m * (i / n) + (i % n) + m + 1;
    const double lap = x[c - m] + x[c - 1] - 4.0 * x[c] + x[c + 1] + x[c + m];
    const double rho = x[m * m + i];
    y[i] = x[c] + w * lap - lambda * rho;
    y.back() = std::max(y.back(), std::fabs(lap / (h * h) - rho));
  }
  return y;
}

ProblemConfig faulted(ProblemConfig cfg, const Ctx& c) {
  if (c.opt.flip_jacobi_sign) cfg.lambda = -cfg.lambda;
  return cfg;
}

using Check = std::function<std::string(const Ctx&, Rng&)>;  // empty string = pass

std::string ordinal_roundtrip(const Ctx&, Rng& r) {
  for (int t = 0; t < 200; ++t) {
    const Box2 b = rand_box(r, 10);
    for (std::size_t k = 0; k < b.size(); ++k)
      if (b.ordinal(b.point_at(k)) != k) return "box " + b.str();
  }
  const Box2 ghosted(Point2(-1, -1), Point2(64, 64));
  if (ghosted.ordinal(Point2(0, 0)) != 67 || ghosted.ordinal(Point2(1, 0)) != 68 ||
      ghosted.ordinal(Point2(0, 1)) != 133) {
    return "66-wide ghosted ordinals";
  }
  return {};
}

std::string intersect_set(const Ctx&, Rng& r) {
  for (int t = 0; t < 200; ++t) {
    const Box2 a = rand_box(r, 8), b = rand_box(r, 8), c = rand_box(r, 8);
    if (!(a.intersect(b) == b.intersect(a)) || !(a.intersect(b).intersect(c) == a.intersect(b.intersect(c)))) {
      return a.str() + " " + b.str() + " " + c.str();
    }
    std::size_t both = 0;
    a.for_each([&](const Point2& p) { both += b.contains(p) ? 1 : 0; });
    if (both != a.intersect(b).size()) return "member count " + a.str() + " " + b.str();
  }
  return {};
}

std::string exchange_periodic(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    for (int nb : {1, 2, 3}) {
      const GridLayout l(n, nb);
      Patches p = make_ghosted(l);
      for (auto& b : p)
        for (auto& v : b.values()) v = uni(r);
      exchange_ghosts(l, p);
      const int big = l.extent();
      for (std::size_t k = 0; k < p.size(); ++k) {
        std::string err;
        p[k].box().for_each([&](const Point2& q) {
          const int x = ((q[0] % big) + big) % big, y = ((q[1] % big) + big) % big;
          const std::size_t owner = static_cast<std::size_t>(x / n + nb * (y / n));
          if (p[k](q) != p[owner](Point2(x, y))) err = fmt::format("n={} nb={} patch {} at {}", n, nb, k, to_string(q));
        });
        if (!err.empty()) return err;
      }
    }
  }
  return {};
}

std::string stencil_dense(const Ctx&, Rng& r) {
  for (int e = 1; e <= 8; ++e) {
    const std::size_t n = static_cast<std::size_t>(e);
    const auto a = laplace_rows(n);
    const auto x = rand_vec(r, (n + 2) * (n + 2));
    const auto y = stencil_apply(Stencil::laplacian(), BoxData2(Box2::cube(e).grow(1), x), Box2::cube(e));
    for (std::size_t i = 0; i < n * n; ++i) {
      double want = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) want += a[i * x.size() + j] * x[j];
      if (rel(y[i], want) > 1e-12) return fmt::format("edge {} point {}", e, i);
    }
  }
  return {};
}

std::string stencil_linearity(const Ctx&, Rng& r) {
  const Stencil s = Stencil::laplacian();
  for (int t = 0; t < 200; ++t) {
    const Box2 dest = rand_box(r, 8), src = dest.grow(1);
    const double a = uni(r, -3, 3), b = uni(r, -3, 3);
    const auto x = rand_vec(r, src.size()), y = rand_vec(r, src.size());
    std::vector<double> mix(src.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto lhs = stencil_apply(s, BoxData2(src, mix), dest);
    const auto sx = stencil_apply(s, BoxData2(src, x), dest), sy = stencil_apply(s, BoxData2(src, y), dest);
    for (std::size_t i = 0; i < dest.size(); ++i)
      if (std::fabs(lhs[i] - (a * sx[i] + b * sy[i])) > 1e-12 * 8 * (std::fabs(a) + std::fabs(b) + 1)) return dest.str();
  }
  return {};
}

std::string stencil_translation(const Ctx&, Rng& r) {
  const Stencil s = Stencil::laplacian();
  for (int t = 0; t < 200; ++t) {
    const Box2 dest = rand_box(r, 8), src = dest.grow(1);
    const Point2 by(uni_int(r, -40, 40), uni_int(r, -40, 40));
    const auto x = rand_vec(r, src.size());
    const auto a = stencil_apply(s, BoxData2(src, x), dest);
    const auto b = stencil_apply(s, BoxData2(src.shift(by), x), dest.shift(by));
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return "shift " + to_string(by);
  }
  return {};
}

std::string ol_eval_vs_dense(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    if (n > 8) continue;
    const auto un = static_cast<std::size_t>(n);
    for (const ol::Expr& e : {ol::build_laplace(un, un + 2, ol::laplacian_filter()), ol::build_interior(un, un + 2),
                              ol::build_jacobi(un, 0.25, 0.01)}) {
      const auto d = ol::to_dense(e);
      for (int t = 0; t < 10; ++t) {
        const auto x = rand_vec(r, d.cols);
        if (max_rel(ol::eval(e, x), d * x) > 1e-12) return fmt::format("{} at n={}", e.kind(), n);
      }
    }
  }
  return {};
}

std::string ol_shape_algebra(const Ctx& c, Rng&) {
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n), m = un + 2;
    if (!(ol::build_poisson(un, m, 0.25, 0.01, 0.1).shape() == ol::Shape{un * un + 1, m * m + un * un})) {
      return fmt::format("Poisson shape at n={}", n);
    }
  }
  try {
    (void)ol::compose(ol::identity(4), ol::identity(5)).shape();
    return "mismatched Compose accepted";
  } catch (const ShapeError&) {
  }
  return {};
}

std::string ol_laplace_dense(const Ctx&, Rng&) {
  for (std::size_t n : {1, 2, 4, 8}) {
    if (ol::to_dense(ol::build_laplace(n, n + 2, ol::laplacian_filter())).data != laplace_rows(n)) {
      return fmt::format("n={}", n);
    }
  }
  return {};
}

std::string chain(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n);
    for (int nb : {1, 2}) {
      const GridLayout l(n, nb);
      const auto cfg = ProblemConfig::standard(l, 1);
      const auto e = build_poisson_expr(faulted(cfg, c));
      const auto staged = sigma::lower(e);
      const auto fused = sigma::fuse(staged);
      for (int t = 0; t < 5; ++t) {
        const Patches phi = rand_ghosted(r, l);
        const Patches rho = rand_zero_mean(r, l);
        for (std::size_t k = 0; k < phi.size(); ++k) {
          std::vector<double> x(phi[k].values().begin(), phi[k].values().end());
          x.insert(x.end(), rho[k].values().begin(), rho[k].values().end());
          const auto want = hand_step(un, x, cfg.w, cfg.lambda, cfg.h());
          const auto a = ol::eval(e, x);
          const auto b = sigma::sigma_eval(staged, x);
          const auto f = sigma::fused_eval(fused, x);
          if (max_rel(a, want) > 1e-12) return fmt::format("ol_eval vs hand formula at n={} nb={}", n, nb);
          if (max_rel(b, a) > 1e-12 || b.back() != a.back()) return fmt::format("sigma_eval vs ol_eval at n={}", n);
          if (max_rel(f, a) > 1e-12 || f.back() != a.back()) return fmt::format("fused vs ol_eval at n={}", n);
        }
      }
    }
  }
  return {};
}

std::string fusion_legality(const Ctx& c, Rng&) {
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n);
    const auto p = sigma::lower(ol::build_poisson(un, un + 2, 0.25, 0.01, 0.1));
    (void)sigma::fuse(p);
    for (const auto& s : p.stages) {
      for (const auto& a : s.gather.entries) {
        if (a.buffer.kind != sigma::Buffer::Temp) continue;
        const auto& w = p.stages[static_cast<std::size_t>(a.buffer.stage)].scatter.entries[0];
        for (long j = 0; j < static_cast<long>(un * un); ++j)
          if (w.index(j) != a.index(j)) return fmt::format("accepted misaligned fusion at n={} j={}", n, j);
      }
    }
    if (n < 2) continue;
    auto bad = p;
    for (auto& a : bad.stages[1].gather.entries)
      if (a.buffer.kind == sigma::Buffer::Temp) a.index = {0, 0, 1, n, n};
    try {
      (void)sigma::fuse(bad);
      return fmt::format("permuted Jacobi gather accepted at n={}", n);
    } catch (const FusionError&) {
    }
  }
  return {};
}

std::string lowering_structure(const Ctx& c, Rng&) {
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n);
    const auto f = sigma::fuse(sigma::lower(ol::build_poisson(un, un + 2, 0.25, 0.01, 0.1)));
    sigma::check_structure(f);
    if (f.temps.size() != 3) return fmt::format("{} temporaries at n={}", f.temps.size(), n);
    if (f.trip != un * un) return fmt::format("trip {} at n={}", f.trip, n);
  }
  return {};
}

std::string backend_equivalence(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    for (int nb : {1, 2}) {
      const GridLayout l(n, nb);
      const auto cfg = ProblemConfig::standard(l, 10);
      const Patches phi0 = rand_ghosted(r, l);
      const Patches rho = rand_zero_mean(r, l);
      const auto a = run_reference(cfg, phi0, rho);
      const auto b = run_fused(cfg, build_fused_program(faulted(cfg, c)), phi0, rho);
      for (std::size_t k = 0; k < a.phi.size(); ++k)
        for (std::size_t i = 0; i < a.phi[k].size(); ++i)
          if (std::fabs(a.phi[k][i] - b.phi[k][i]) > 1e-12) return fmt::format("phi differs at n={} nb={}", n, nb);
      if (a.report.residuals != b.report.residuals) return fmt::format("residuals differ at n={} nb={}", n, nb);
    }
  }
  return {};
}

std::string constant_preservation(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    const GridLayout l(n, 2);
    const double v = uni(r, -10, 10);
    const auto cfg = ProblemConfig::standard(l, 5);
    for (const auto& sol : {run_reference(cfg, make_ghosted(l, v), make_interior(l)),
                            run_fused(cfg, make_ghosted(l, v), make_interior(l))}) {
      for (const auto& p : sol.phi)
        for (double x : p.values())
          if (x != v) return fmt::format("{} at n={}", to_string(sol.report.backend), n);
    }
  }
  return {};
}

std::string mean_preservation(const Ctx& c, Rng& r) {
  for (int n : c.sizes) {
    const GridLayout l(n, 2);
    const auto cfg = ProblemConfig::standard(l, 10);
    const Patches phi0 = rand_ghosted(r, l);
    const Patches rho = rand_zero_mean(r, l);
    auto mean = [&](const Patches& p) {
      double s = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) l.interior(k).for_each([&](const Point2& q) { s += p[k](q); });
      return s / static_cast<double>(l.extent() * l.extent());
    };
    const double m0 = mean(phi0);
    for (const auto& sol : {run_reference(cfg, phi0, rho), run_fused(cfg, phi0, rho)})
      if (std::fabs(mean(sol.phi) - m0) > 1e-10) return fmt::format("{} at n={}", to_string(sol.report.backend), n);
  }
  return {};
}

std::string residual_trend(const Ctx& c, Rng&) {
  for (int n : c.sizes) {
    const GridLayout l(n, 2);
    const auto sol = run_fused(ProblemConfig::standard(l, 100), make_ghosted(l), smooth_rhs(l, c.opt.seed));
    if (!(sol.report.residuals.back() < sol.report.residuals.front())) return fmt::format("no decrease at n={}", n);
  }
  return {};
}

double sinusoid_error(int n) {
  const GridLayout l(n, 2);
  const double k = 2.0 * std::numbers::pi * l.h();
  auto f = [&](const Point2& p) { return std::sin(k * p[0]) * std::sin(k * p[1]); };
  Patches phi = make_ghosted(l);
  Patches rho = make_interior(l);
  fill_periodic(l, phi, f);
  const double kk = 2.0 * std::numbers::pi;
  fill_periodic(l, rho, [&](const Point2& p) { return -2.0 * kk * kk * f(p); });
  return residual_maxnorm(l, Stencil::laplacian(), phi, rho, l.h());
}

std::string truncation_order(const Ctx&, Rng&) {
  const double e1 = sinusoid_error(8), e2 = sinusoid_error(16), e3 = sinusoid_error(32);
  for (double ratio : {e1 / e2, e2 / e3})
    if (ratio < 3.6 || ratio > 4.4) return fmt::format("ratio {:.4f} outside [3.6, 4.4]", ratio);
  return {};
}

std::string emit_structure(const Ctx& c, Rng&) {
  const std::regex loop(R"(\bfor\b)");
  const std::regex arr(R"(([A-Za-z_][A-Za-z0-9_]*)\s*\[)");
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n);
    const auto p = sigma::fuse(sigma::lower(ol::build_poisson(un, un + 2, 0.25, 0.01, 0.1)));
    for (const std::string& src : {emit::emit_c_scalar(p, emit::EmitConfig::for_program(p)),
                                   emit::emit_c_openmp(p, emit::EmitConfig::for_program(p, 4))}) {
      if (std::distance(std::sregex_iterator(src.begin(), src.end(), loop), std::sregex_iterator()) != 1) {
        return fmt::format("loop count at n={}", n);
      }
      if (src.find(fmt::format("i1 <= {}", n * n - 1)) == std::string::npos) return fmt::format("loop bound at n={}", n);
      for (auto it = std::sregex_iterator(src.begin(), src.end(), arr); it != std::sregex_iterator(); ++it) {
        const std::string name = (*it)[1];
        if (name != "X" && name != "Y" && name != "rhs") return fmt::format("array '{}' at n={}", name, n);
      }
    }
  }
  return {};
}

std::string emit_determinism(const Ctx& c, Rng&) {
  for (int n : c.sizes) {
    const auto un = static_cast<std::size_t>(n);
    auto make = [&] { return sigma::fuse(sigma::lower(ol::build_poisson(un, un + 2, 0.25, 0.01, 0.1))); };
    const auto p = make(), q = make();
    if (emit::emit_c_scalar(p, emit::EmitConfig::for_program(p)) != emit::emit_c_scalar(q, emit::EmitConfig::for_program(q)) ||
        emit::emit_c_openmp(p, emit::EmitConfig::for_program(p, 4)) != emit::emit_c_openmp(q, emit::EmitConfig::for_program(q, 4))) {
      return fmt::format("text differs at n={}", n);
    }
  }
  return {};
}

std::string csv_roundtrip(const Ctx&, Rng& r) {
  std::vector<BenchRecord> recs;
  for (int i = 0; i < 6; ++i) {
    BenchRecord b{uni_int(r, 1, 512), uni_int(r, 1, 8), uni_int(r, 0, 100), i % 2 ? Backend::Fused : Backend::Reference,
                  uni(r, 1e-4, 10), uni(r, 0, 1e6), std::nullopt};
    if (i % 2) b.speedup = uni(r, 0.5, 3);
    recs.push_back(b);
  }
  std::stringstream ss;
  write_csv(ss, recs);
  if (read_csv(ss) != recs) return "records changed after write/read";
  return {};
}

struct Entry {
  const char* name;
  Check fn;
};

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = {
      {"grid.ordinal_roundtrip", ordinal_roundtrip},
      {"grid.intersect_set", intersect_set},
      {"grid.exchange_periodic", exchange_periodic},
      {"stencil.dense_oracle", stencil_dense},
      {"stencil.linearity", stencil_linearity},
      {"stencil.translation", stencil_translation},
      {"ol.eval_vs_dense", ol_eval_vs_dense},
      {"ol.shape_algebra", ol_shape_algebra},
      {"ol.laplace_dense", ol_laplace_dense},
      {"chain.ol_sigma_fused", chain},
      {"lowering.fusion_legality", fusion_legality},
      {"lowering.structure", lowering_structure},
      {"exec.backend_equivalence", backend_equivalence},
      {"exec.constant_preservation", constant_preservation},
      {"exec.mean_preservation", mean_preservation},
      {"exec.residual_trend", residual_trend},
      {"exec.truncation_order", truncation_order},
      {"emit.structure", emit_structure},
      {"emit.determinism", emit_determinism},
      {"cli.csv_roundtrip", csv_roundtrip},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : table()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

std::vector<CheckResult> run_checks(const VerifyOptions& opt) {
  if (opt.max_n < 2) throw UsageError("--max-n must be >= 2");
  Ctx ctx{opt, {}};
  for (int n = 2; n <= opt.max_n; n *= 2) ctx.sizes.push_back(n);
  if (opt.max_n >= 3) ctx.sizes.push_back(3);

  std::vector<CheckResult> out;
  std::uint64_t salt = 0;
  for (const auto& e : table()) {
    Rng rng(opt.seed * 1000003 + salt++);
    CheckResult r{e.name, false, {}, 0.0};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = e.fn(ctx, rng);
      r.pass = r.detail.empty();
    } catch (const std::exception& ex) {
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out) {
  const auto results = run_checks(opt);
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  int failed = 0;
  out << fmt::format("{:<{}}  result  seconds\n", "check", width);
  for (const auto& r : results) {
    out << fmt::format("{:<{}}  {:<6}  {:7.3f}", r.name, width, r.pass ? "PASS" : "FAIL", r.seconds);
    if (!r.pass) out << "  " << r.detail;
    out << '\n';
    failed += r.pass ? 0 : 1;
  }
  out << fmt::format("{} of {} checks passed (max n = {})\n", results.size() - static_cast<std::size_t>(failed),
                     results.size(), opt.max_n);
  return failed ? kCheckFailed : kOk;
}

}  // namespace stenfuse::cli
