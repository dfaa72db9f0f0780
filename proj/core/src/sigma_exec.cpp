#include <cmath>

#include "stenfuse/sigma.hpp"

namespace stenfuse::sigma {

namespace {

// An access resolved against j = r*n + c: ordinal = base + r*row_step + c*col_step.
struct Addr {
  const double* src = nullptr;
  long base = 0;
  long row_step = 0;
  long col_step = 0;
};

Addr resolve(const FusedProgram& p, const Access& a, const double* data, std::size_t size) {
  const IndexExpr& e = a.index;
  const auto n = static_cast<long>(p.n);
  if ((e.coef_div != 0 || e.coef_mod != 0) && e.divisor != n) {
    throw FusionError("fused access " + a.str() + " does not split on the box width " + std::to_string(n));
  }
  Addr r{data, e.offset, e.coef * n + e.coef_div, e.coef + e.coef_mod};
  // Affine in (row, col): the extremes sit at the corners.
  for (long rr : {0L, n - 1}) {
    for (long cc : {0L, n - 1}) {
      const long k = r.base + rr * r.row_step + cc * r.col_step;
      if (k < 0 || static_cast<std::size_t>(k) >= size) {
        throw DomainError("fused access " + a.str() + " reaches ordinal " + std::to_string(k) +
                          " outside [0, " + std::to_string(size) + ")");
      }
    }
  }
  return r;
}

struct Spans {
  std::span<const double> x;
  std::span<const double> rho;
  std::span<double> out;
};

Addr resolve_read(const FusedProgram& p, const Access& a, const Spans& s) {
  if (a.buffer.kind == Buffer::X) return resolve(p, a, s.x.data(), s.x.size());
  if (a.buffer.kind == Buffer::Rho) return resolve(p, a, s.rho.data(), s.rho.size());
  throw FusionError("fused body reads non-input buffer " + a.buffer.str());
}

// Generic path: one pass over the instruction list per point.
void interpret(const FusedProgram& p, const Spans& s, double& acc) {
  struct CTerm {
    double coeff;
    int temp;  // -1 for a direct read
    Addr addr;
  };
  struct CInstr {
    Instr::Op op;
    int dest;
    Addr addr;  // Load source or Store target
    std::vector<CTerm> terms;
    bool abs;
  };
  std::vector<CInstr> code;
  for (const auto& ins : p.body) {
    CInstr c{ins.op, ins.dest, {}, {}, ins.abs};
    if (ins.op == Instr::Op::Load) c.addr = resolve_read(p, ins.source, s);
    if (ins.op == Instr::Op::Store) c.addr = resolve(p, ins.target, s.out.data(), s.out.size());
    for (const auto& t : ins.terms) {
      CTerm ct{t.coeff.value, -1, {}};
      if (t.operand.kind == Operand::Kind::Temp) ct.temp = t.operand.temp;
      else ct.addr = resolve_read(p, t.operand.read, s);
      c.terms.push_back(ct);
    }
    code.push_back(std::move(c));
  }

  std::vector<double> regs(p.temps.size(), 0.0);
  double* out = s.out.data();
  const auto n = static_cast<long>(p.n);
  for (long r = 0; r < n; ++r) {
    for (long col = 0; col < n; ++col) {
      auto at = [&](const Addr& a) { return a.base + r * a.row_step + col * a.col_step; };
      for (const auto& c : code) {
        if (c.op == Instr::Op::Load) {
          regs[static_cast<std::size_t>(c.dest)] = c.addr.src[at(c.addr)];
          continue;
        }
        double v = 0.0;
        for (std::size_t k = 0; k < c.terms.size(); ++k) {
          const CTerm& t = c.terms[k];
          const double x = t.temp >= 0 ? regs[static_cast<std::size_t>(t.temp)] : t.addr.src[at(t.addr)];
          v = k == 0 ? t.coeff * x : v + t.coeff * x;
        }
        if (c.abs) v = std::fabs(v);
        switch (c.op) {
          case Instr::Op::Assign: regs[static_cast<std::size_t>(c.dest)] = v; break;
          case Instr::Op::Store: out[at(c.addr)] = v; break;
          case Instr::Op::Reduce: acc = acc >= v ? acc : v; break;
          case Instr::Op::Load: break;
        }
      }
    }
  }
}

// The body fuse() produces for the Poisson pipeline:
//   s_phi = X[b + c0]; s_lap = sum_k a_k * X[b + o_k]; s_rho = rho[j];
//   Y[b + c0] = j0*s_phi + j1*s_lap + j2*s_rho; acc = max(acc, |r0*s_lap + r1*s_rho|)
struct PoissonShape {
  long center = 0;
  long out_offset = 0;
  std::vector<long> offsets;
  std::vector<double> coeffs;
  double jac[3] = {};
  double res[2] = {};
};

bool interior_base(const IndexExpr& e, const FusedProgram& p) {
  return e.coef == 0 && e.coef_div == static_cast<long>(p.m) && e.coef_mod == 1 &&
         e.divisor == static_cast<long>(p.n);
}

bool match_poisson(const FusedProgram& p, PoissonShape& out) {
  if (p.body.size() != 5) return false;
  const Instr& phi = p.body[0];
  const Instr& lap = p.body[1];
  const Instr& rho = p.body[2];
  const Instr& store = p.body[3];
  const Instr& red = p.body[4];
  if (phi.op != Instr::Op::Load || phi.source.buffer.kind != Buffer::X || !interior_base(phi.source.index, p)) return false;
  if (lap.op != Instr::Op::Assign || lap.abs || lap.terms.empty()) return false;
  if (rho.op != Instr::Op::Load || rho.source.buffer.kind != Buffer::Rho || !(rho.source.index == IndexExpr::identity()))
    return false;
  if (store.op != Instr::Op::Store || store.abs || store.terms.size() != 3 || !interior_base(store.target.index, p))
    return false;
  if (red.op != Instr::Op::Reduce || !red.abs || red.terms.size() != 2) return false;

  out.center = phi.source.index.offset;
  out.out_offset = store.target.index.offset;
  for (const auto& t : lap.terms) {
    if (t.operand.kind == Operand::Kind::Temp) {
      if (t.operand.temp != phi.dest) return false;
      out.offsets.push_back(out.center);
    } else {
      if (t.operand.read.buffer.kind != Buffer::X || !interior_base(t.operand.read.index, p)) return false;
      out.offsets.push_back(t.operand.read.index.offset);
    }
    out.coeffs.push_back(t.coeff.value);
  }
  const int want_store[3] = {phi.dest, lap.dest, rho.dest};
  for (int k = 0; k < 3; ++k) {
    const Term& t = store.terms[static_cast<std::size_t>(k)];
    if (t.operand.kind != Operand::Kind::Temp || t.operand.temp != want_store[k]) return false;
    out.jac[k] = t.coeff.value;
  }
  const int want_red[2] = {lap.dest, rho.dest};
  for (int k = 0; k < 2; ++k) {
    const Term& t = red.terms[static_cast<std::size_t>(k)];
    if (t.operand.kind != Operand::Kind::Temp || t.operand.temp != want_red[k]) return false;
    out.res[k] = t.coeff.value;
  }
  return true;
}

template <int K>
void poisson_loop(const FusedProgram& p, const PoissonShape& shape, const Spans& s, double& acc) {
  const auto n = static_cast<long>(p.n);
  const auto m = static_cast<long>(p.m);
  const std::size_t taps = K > 0 ? static_cast<std::size_t>(K) : shape.offsets.size();
  const long* off = shape.offsets.data();
  const double* a = shape.coeffs.data();
  const long c0 = shape.center;
  const double j0 = shape.jac[0], j1 = shape.jac[1], j2 = shape.jac[2];
  const double r0 = shape.res[0], r1 = shape.res[1];
  double best = acc;
  for (long r = 0; r < n; ++r) {
    const double* x = s.x.data() + r * m;
    const double* rho = s.rho.data() + r * n;
    double* y = s.out.data() + r * m + shape.out_offset;
    for (long c = 0; c < n; ++c) {
      const double* b = x + c;
      const double s_phi = b[c0];
      double s_lap = a[0] * b[off[0]];
      for (std::size_t k = 1; k < taps; ++k) s_lap += a[k] * b[off[k]];
      const double s_rho = rho[c];
      y[c] = (j0 * s_phi + j1 * s_lap) + j2 * s_rho;
      const double v = std::fabs(r0 * s_lap + r1 * s_rho);
      best = best >= v ? best : v;
    }
  }
  acc = best;
}

}  // namespace

void run_fused_patch(const FusedProgram& p, std::span<const double> x, std::span<const double> rho,
                     std::span<double> out, double& acc, bool specialize) {
  if (x.size() != p.m * p.m || out.size() != p.m * p.m || rho.size() != p.n * p.n || p.trip != p.n * p.n) {
    throw ShapeError("run_fused_patch: buffers do not match n=" + std::to_string(p.n) + ", m=" + std::to_string(p.m));
  }
  const Spans s{x, rho, out};
  PoissonShape shape;
  if (specialize && match_poisson(p, shape)) {
    for (const long o : shape.offsets) resolve(p, {{Buffer::X}, IndexExpr::box_interior(static_cast<long>(p.n), static_cast<long>(p.m), o)}, x.data(), x.size());
    resolve(p, p.body[0].source, x.data(), x.size());
    resolve(p, p.body[3].target, out.data(), out.size());
    if (shape.offsets.size() == 5) poisson_loop<5>(p, shape, s, acc);
    else if (shape.offsets.size() == 9) poisson_loop<9>(p, shape, s, acc);
    else poisson_loop<0>(p, shape, s, acc);
    return;
  }
  interpret(p, s, acc);
}

std::vector<double> fused_eval(const FusedProgram& p, std::span<const double> x, bool specialize) {
  const std::size_t m2 = p.m * p.m;
  if (x.size() != m2 + p.n * p.n) {
    throw ShapeError("fused_eval: input length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(m2 + p.n * p.n));
  }
  std::vector<double> out(m2, 0.0);
  double acc = 0.0;
  run_fused_patch(p, x.subspan(0, m2), x.subspan(m2), out, acc, specialize);
  const IndexExpr center = IndexExpr::box_interior(static_cast<long>(p.n), static_cast<long>(p.m),
                                                   static_cast<long>(p.m) + 1);
  std::vector<double> y(p.n * p.n + 1);
  for (std::size_t j = 0; j < p.n * p.n; ++j) y[j] = out[static_cast<std::size_t>(center(static_cast<long>(j)))];
  y.back() = acc;
  return y;
}

}  // namespace stenfuse::sigma
