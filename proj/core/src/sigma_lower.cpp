#include <cmath>
#include <sstream>

#include "stenfuse/sigma.hpp"

namespace stenfuse::sigma {

namespace {

template <typename T>
const T& expect(const ol::Expr& e, const char* want, const std::string& where) {
  const T* node = e.as<T>();
  if (!node) {
    throw LoweringError("lower: expected " + std::string(want) + " at " + where + ", found " + e.kind());
  }
  return *node;
}

std::size_t exact_sqrt(std::size_t v) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v))));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

const std::vector<double>& row_of_tensor(const ol::Expr& e, std::size_t npts, std::size_t width,
                                         const std::string& where) {
  const auto& t = expect<ol::TensorNode>(e, "Tensor", where);
  const auto& row = expect<ol::RowVecNode>(t.row, "RowVec", where + ".row");
  const auto& id = expect<ol::IdentityNode>(t.identity, "Identity", where + ".identity");
  if (id.size != npts || row.coeffs.size() != width) {
    throw LoweringError("lower: " + where + " has shape " + e.shape().str() + ", expected a width-" +
                        std::to_string(width) + " row over I_" + std::to_string(npts));
  }
  return row.coeffs;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(Buffer b) {
  switch (b) {
    case Buffer::X: return "X";
    case Buffer::Rho: return "rho";
    case Buffer::Temp: return "T";
    case Buffer::Out: return "Y";
    case Buffer::Acc: return "acc";
  }
  return "?";
}

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::Laplace: return "Laplace";
    case StageKind::Jacobi: return "Jacobi";
    case StageKind::MaxNorm: return "MaxNorm";
  }
  return "?";
}

std::string BufferRef::str() const {
  return kind == Buffer::Temp ? std::string("T") + std::to_string(stage) : to_string(kind);
}

std::string Access::str(const std::string& var) const { return buffer.str() + "[" + index.str(var) + "]"; }

std::string Coefficient::str() const {
  if (param.empty()) return fmt_double(value);
  return (negated ? "-" : "") + param;
}

std::size_t StagedProgram::buffer_size(const BufferRef& b) const {
  switch (b.kind) {
    case Buffer::X:
    case Buffer::Out: return m * m;
    case Buffer::Rho: return n * n;
    case Buffer::Temp: return stages.at(static_cast<std::size_t>(b.stage)).trip;
    case Buffer::Acc: return 1;
  }
  return 0;
}

StagedProgram lower(const ol::Expr& e) {
  // [Jacobi ; MaxNorm] o ([Interior ; Laplace] (+) I)
  const auto& top = expect<ol::ComposeNode>(e, "Compose", "root");
  const auto& outs = expect<ol::VStackNode>(top.outer, "VStack", "root.outer");
  const auto& ins = expect<ol::DirectSumNode>(top.inner, "DirectSum", "root.inner");
  const auto& rho_id = expect<ol::IdentityNode>(ins.second, "Identity", "root.inner.second");
  const std::size_t npts = rho_id.size;
  const std::size_t n = exact_sqrt(npts);
  if (n * n != npts || n == 0) {
    throw LoweringError("lower: rho block size " + std::to_string(npts) + " is not a square");
  }

  const auto& split = expect<ol::VStackNode>(ins.first, "VStack", "root.inner.first");
  const auto& interior = expect<ol::GatherNode>(split.top, "Gather", "root.inner.first.top");
  const auto& lap = expect<ol::ComposeNode>(split.bottom, "Compose", "root.inner.first.bottom");
  const auto& lap_scatter = expect<ol::ScatterNode>(lap.outer, "Scatter", "laplace.outer");
  const auto& lap_loop = expect<ol::IterVStackNode>(lap.inner, "IterVStack", "laplace.inner");
  const auto& f = expect<ol::FiltNode>(lap_loop.body, "Filt", "laplace.inner.body");

  const std::size_t m = f.row_stride;
  const auto nl = static_cast<long>(n);
  const auto ml = static_cast<long>(m);
  const IndexExpr center = IndexExpr::box_interior(nl, ml, ml + 1);
  if (m != n + 2 || f.in != m * m) {
    throw LoweringError("lower: Filt stride " + std::to_string(m) + " / input " + std::to_string(f.in) +
                        " inconsistent with n=" + std::to_string(n));
  }
  if (lap_loop.count != npts || f.var != lap_loop.var || !(f.center == center)) {
    throw LoweringError("lower: Filt loop is not centred on the n^2 interior points");
  }
  if (!(lap_scatter.map == IndexExpr::identity()) || lap_scatter.in != npts || lap_scatter.out != npts) {
    throw LoweringError("lower: Laplace scatter is not the identity on n^2 points");
  }
  if (!(interior.map == center) || interior.out != npts || interior.in != m * m) {
    throw LoweringError("lower: interior Gather does not select the n^2 interior of the m^2 patch");
  }

  const auto& jac = row_of_tensor(outs.top, npts, 3, "root.outer.top");
  const auto& norm_max = expect<ol::ComposeNode>(outs.bottom, "Compose", "root.outer.bottom");
  const auto& maxr = expect<ol::MaxReduceNode>(norm_max.outer, "MaxReduce", "maxnorm.outer");
  const auto& norm_pw = expect<ol::ComposeNode>(norm_max.inner, "Compose", "maxnorm.inner");
  const auto& pw = expect<ol::PointwiseNode>(norm_pw.outer, "Pointwise", "maxnorm.inner.outer");
  const auto& res = row_of_tensor(norm_pw.inner, npts, 3, "maxnorm.inner.inner");
  if (maxr.in != npts || pw.rows * pw.cols != npts || pw.fn != ol::PointwiseFn::Abs) {
    throw LoweringError("lower: max-norm block is not Max o abs over n^2 points");
  }

  StagedProgram p{n, m, {}};
  const BufferRef x{Buffer::X};
  const BufferRef rho{Buffer::Rho};
  const BufferRef lap_out{Buffer::Temp, 0};

  Stage laplace{StageKind::Laplace, npts, {}, {{{lap_out, IndexExpr::identity()}}}, {}};
  for (long dy = 0; dy < 3; ++dy) {
    for (long dx = 0; dx < 3; ++dx) {
      const double t = f.taps[static_cast<std::size_t>(dy * 3 + dx)];
      if (t == 0.0) continue;
      laplace.gather.entries.push_back({x, IndexExpr::box_interior(nl, ml, dy * ml + dx)});
      laplace.kernel.coeffs.push_back(Coefficient::literal(t));
    }
  }
  if (laplace.gather.entries.empty()) throw LoweringError("lower: Filt has no nonzero taps");

  // Both row operators read (interior phi | Laplace | rho).
  const Access operands[3] = {{x, center}, {lap_out, IndexExpr::identity()}, {rho, IndexExpr::identity()}};

  Stage jacobi{StageKind::Jacobi, npts, {}, {{{BufferRef{Buffer::Out}, center}}}, {}};
  const Coefficient jcoeffs[3] = {Coefficient::literal(jac[0]), Coefficient::named("weight", jac[1]),
                                  Coefficient::named("lambda", -jac[2], true)};
  for (int k = 0; k < 3; ++k) {
    if (jac[static_cast<std::size_t>(k)] == 0.0) continue;
    jacobi.gather.entries.push_back(operands[k]);
    jacobi.kernel.coeffs.push_back(jcoeffs[k]);
  }

  Stage norm{StageKind::MaxNorm, npts, {}, {{{BufferRef{Buffer::Acc}, IndexExpr::constant(0)}}}, {}};
  norm.kernel.abs = true;
  norm.kernel.max_accumulate = true;
  const Coefficient ncoeffs[3] = {Coefficient::literal(res[0]), Coefficient::named("inv_h2", res[1]),
                                  Coefficient::literal(res[2])};
  for (int k = 0; k < 3; ++k) {
    if (res[static_cast<std::size_t>(k)] == 0.0) continue;
    norm.gather.entries.push_back(operands[k]);
    norm.kernel.coeffs.push_back(ncoeffs[k]);
  }

  p.stages = {std::move(laplace), std::move(jacobi), std::move(norm)};
  return p;
}

namespace {

struct Buffers {
  std::span<const double> x;
  std::span<const double> rho;
  std::vector<std::vector<double>> temps;
  std::vector<double> out;
  double acc = 0.0;

  double read(const StagedProgram& p, const Access& a, long j) const {
    const std::size_t idx = index(p, a, j);
    switch (a.buffer.kind) {
      case Buffer::X: return x[idx];
      case Buffer::Rho: return rho[idx];
      case Buffer::Temp: return temps[static_cast<std::size_t>(a.buffer.stage)][idx];
      case Buffer::Out: return out[idx];
      case Buffer::Acc: return acc;
    }
    return 0.0;
  }

  static std::size_t index(const StagedProgram& p, const Access& a, long j) {
    const long i = a.index(j);
    const std::size_t bound = p.buffer_size(a.buffer);
    if (i < 0 || static_cast<std::size_t>(i) >= bound) {
      throw DomainError("sigma_eval: " + a.str() + " at j=" + std::to_string(j) + " gives ordinal " +
                        std::to_string(i) + " outside [0, " + std::to_string(bound) + ")");
    }
    return static_cast<std::size_t>(i);
  }
};

}  // namespace

std::vector<double> sigma_eval(const StagedProgram& p, std::span<const double> x) {
  if (x.size() != p.input_size()) {
    throw ShapeError("sigma_eval: input length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(p.input_size()));
  }
  Buffers buf;
  buf.x = x.subspan(0, p.m * p.m);
  buf.rho = x.subspan(p.m * p.m);
  buf.out.assign(p.m * p.m, 0.0);
  for (const auto& s : p.stages) buf.temps.emplace_back(s.trip, 0.0);

  for (std::size_t si = 0; si < p.stages.size(); ++si) {
    const Stage& s = p.stages[si];
    if (s.kernel.coeffs.size() != s.gather.arity() || s.scatter.arity() != 1) {
      throw ShapeError(std::string("sigma_eval: stage ") + to_string(s.name) + " kernel arity mismatch");
    }
    const Access& dst = s.scatter.entries.front();
    for (std::size_t jj = 0; jj < s.trip; ++jj) {
      const auto j = static_cast<long>(jj);
      double v = 0.0;
      for (std::size_t k = 0; k < s.gather.arity(); ++k) {
        const double t = s.kernel.coeffs[k].value * buf.read(p, s.gather.entries[k], j);
        v = k == 0 ? t : v + t;
      }
      if (s.kernel.abs) v = std::fabs(v);
      if (s.kernel.max_accumulate) {
        buf.acc = buf.acc >= v ? buf.acc : v;
        continue;
      }
      const std::size_t idx = Buffers::index(p, dst, j);
      switch (dst.buffer.kind) {
        case Buffer::Temp: buf.temps[static_cast<std::size_t>(dst.buffer.stage)][idx] = v; break;
        case Buffer::Out: buf.out[idx] = v; break;
        default:
          throw ShapeError(std::string("sigma_eval: stage ") + to_string(s.name) + " scatters into " +
                           dst.buffer.str());
      }
    }
  }

  const IndexExpr center = IndexExpr::box_interior(static_cast<long>(p.n), static_cast<long>(p.m),
                                                   static_cast<long>(p.m) + 1);
  std::vector<double> y(p.n * p.n + 1);
  for (std::size_t j = 0; j < p.n * p.n; ++j) y[j] = buf.out[static_cast<std::size_t>(center(static_cast<long>(j)))];
  y.back() = buf.acc;
  return y;
}

std::string pretty(const Stage& s) {
  std::ostringstream os;
  os << "sum_{j<" << s.trip << "} " << to_string(s.name) << '\n';
  os << "  gather:";
  for (const auto& a : s.gather.entries) os << ' ' << a.str();
  os << "\n  kernel: ";
  if (s.kernel.max_accumulate) os << "max(acc, ";
  if (s.kernel.abs) os << '|';
  for (std::size_t k = 0; k < s.kernel.coeffs.size(); ++k) {
    os << (k ? " + " : "") << s.kernel.coeffs[k].str() << "*g" << k;
  }
  if (s.kernel.abs) os << '|';
  if (s.kernel.max_accumulate) os << ')';
  os << "\n  scatter:";
  for (const auto& a : s.scatter.entries) os << ' ' << a.str();
  os << '\n';
  return os.str();
}

std::string pretty(const StagedProgram& p) {
  std::ostringstream os;
  os << "staged program n=" << p.n << " m=" << p.m << '\n';
  for (const auto& s : p.stages) os << pretty(s);
  return os.str();
}

}  // namespace stenfuse::sigma
