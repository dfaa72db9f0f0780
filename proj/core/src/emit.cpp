#include "stenfuse/emit.hpp"

#include <fmt/format.h>

#include <map>

namespace stenfuse::emit {

namespace {

using sigma::Access;
using sigma::Buffer;
using sigma::Coefficient;
using sigma::FusedProgram;
using sigma::Instr;
using sigma::Operand;

constexpr const char* kLoop = "i1";
constexpr const char* kBase = "b1";
constexpr const char* kAcc = "*(retval1)";

// Shortest round-trip literal that still reads as a C double.
std::string literal(double v) {
  std::string s = fmt::format("{}", v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

class Writer {
 public:
  Writer(const FusedProgram& p, const EmitConfig& cfg, std::string acc) : p_(p), cfg_(cfg), acc_(std::move(acc)) {
    validate();
    // Base-relative offsets used more than once get their own index variable.
    std::map<long, int> uses;
    for (const auto& ins : p_.body) {
      if (ins.op == Instr::Op::Load && is_base(ins.source)) ++uses[ins.source.index.offset];
      if (ins.op == Instr::Op::Store && is_base(ins.target)) ++uses[ins.target.index.offset];
      for (const auto& t : ins.terms) {
        if (t.operand.kind == Operand::Kind::Read && is_base(t.operand.read)) ++uses[t.operand.read.index.offset];
      }
    }
    for (const auto& [off, count] : uses) {
      if (count > 1) named_.emplace(off, "a" + std::to_string(named_.size() + 1));
    }
  }

  std::string body(const std::string& indent) const {
    std::string out;
    if (!p_.temps.empty()) {
      out += indent + "double ";
      for (std::size_t t = 0; t < p_.temps.size(); ++t) out += (t ? ", " : "") + temp(static_cast<int>(t));
      out += ";\n";
    }
    out += indent + "int ";
    for (const auto& [off, name] : named_) out += name + ", ";
    out += std::string(kBase) + ";\n";
    out += indent + fmt::format("{} = (({}*({} / {})) + ({} % {}));\n", kBase, p_.m, kLoop, p_.n, kLoop, p_.n);
    for (const auto& [off, name] : named_) out += indent + fmt::format("{} = ({} + {});\n", name, kBase, off);
    for (const auto& ins : p_.body) out += indent + statement(ins) + "\n";
    return out;
  }

  std::string last_index() const { return std::to_string(p_.trip - 1); }

 private:
  void validate() const {
    if (cfg_.n != p_.n || cfg_.m != p_.m) {
      throw EmitError(fmt::format("emit: config n={}, m={} does not match program n={}, m={}", cfg_.n, cfg_.m, p_.n,
                                  p_.m));
    }
    if (cfg_.m != cfg_.n + 2) throw EmitError("emit: m must equal n + 2");
    if (cfg_.threads < 1) throw EmitError("emit: thread count must be >= 1");
    if (p_.trip != p_.n * p_.n) throw EmitError("emit: program trip count is not n^2");
    sigma::check_structure(p_);
  }

  bool is_base(const Access& a) const {
    const auto& e = a.index;
    return e.coef == 0 && e.coef_div == static_cast<long>(p_.m) && e.coef_mod == 1 &&
           e.divisor == static_cast<long>(p_.n);
  }

  static std::string temp(int t) { return "s" + std::to_string(t + 1); }

  std::string index(const Access& a) const {
    const auto& e = a.index;
    if (is_base(a)) {
      auto it = named_.find(e.offset);
      if (it != named_.end()) return it->second;
      return e.offset == 0 ? std::string(kBase) : fmt::format("({} + {})", kBase, e.offset);
    }
    if (e.coef == 1 && e.coef_div == 0 && e.coef_mod == 0) {
      return e.offset == 0 ? std::string(kLoop) : fmt::format("({} + {})", kLoop, e.offset);
    }
    return fmt::format("(({}*{}) + ({}*({} / {})) + ({}*({} % {})) + {})", e.coef, kLoop, e.coef_div, kLoop,
                       e.divisor, e.coef_mod, kLoop, e.divisor, e.offset);
  }

  static const char* array(Buffer b) {
    switch (b) {
      case Buffer::X: return "X";
      case Buffer::Rho: return "rhs";
      case Buffer::Out: return "Y";
      default: return nullptr;
    }
  }

  std::string ref(const Access& a) const {
    const char* name = array(a.buffer.kind);
    if (!name) throw EmitError("emit: no C array for buffer " + a.buffer.str());
    return fmt::format("{}[{}]", name, index(a));
  }

  std::string operand(const Operand& o) const { return o.kind == Operand::Kind::Temp ? temp(o.temp) : ref(o.read); }

  std::string coeff(const Coefficient& c) const {
    if (c.param.empty()) return literal(c.value < 0 ? -c.value : c.value);
    if (c.param == "weight") return cfg_.weight_name;
    if (c.param == "lambda") return cfg_.lambda_name;
    if (c.param == "inv_h2") return fmt::format("(1.0/({}*{}))", cfg_.h_name, cfg_.h_name);
    throw EmitError("emit: unknown coefficient parameter '" + c.param + "'");
  }

  // Left-to-right sum; a negative coefficient becomes a subtraction, which
  // rounds the same as adding the negated product.
  std::string sum(const Instr& ins) const {
    std::string acc;
    for (std::size_t k = 0; k < ins.terms.size(); ++k) {
      const auto& t = ins.terms[k];
      const bool neg = t.coeff.param.empty() ? t.coeff.value < 0 : t.coeff.negated;
      const bool unit = t.coeff.param.empty() && (t.coeff.value == 1.0 || t.coeff.value == -1.0);
      const std::string x = operand(t.operand);
      const std::string prod = unit ? x : fmt::format("({}*{})", coeff(t.coeff), x);
      if (k == 0) acc = neg ? fmt::format("(-{})", prod) : prod;
      else acc = fmt::format("({} {} {})", acc, neg ? '-' : '+', prod);
    }
    if (ins.terms.empty()) acc = "0.0";
    return ins.abs ? fmt::format("fabs({})", acc) : acc;
  }

  std::string statement(const Instr& ins) const {
    switch (ins.op) {
      case Instr::Op::Load: return fmt::format("{} = {};", temp(ins.dest), ref(ins.source));
      case Instr::Op::Assign: return fmt::format("{} = {};", temp(ins.dest), sum(ins));
      case Instr::Op::Store: return fmt::format("{} = {};", ref(ins.target), sum(ins));
      case Instr::Op::Reduce: {
        const std::string v = sum(ins);
        return fmt::format("{} = (({} >= {}) ? {} : {});", acc_, acc_, v, acc_, v);
      }
    }
    return {};
  }

  const FusedProgram& p_;
  const EmitConfig& cfg_;
  std::string acc_;
  std::map<long, std::string> named_;
};

std::string signature(const EmitConfig& cfg) {
  return fmt::format(
      "void {}(double *Y, double *X, double {}, double {}, double *rhs,\n"
      "        double {}, double *retval1)",
      cfg.function_name, cfg.weight_name, cfg.lambda_name, cfg.h_name);
}

}  // namespace

EmitConfig EmitConfig::for_program(const sigma::FusedProgram& p, int threads) {
  EmitConfig c;
  c.n = p.n;
  c.m = p.m;
  c.threads = threads;
  return c;
}

std::string emit_c_scalar(const sigma::FusedProgram& p, const EmitConfig& cfg) {
  const Writer w(p, cfg, kAcc);
  std::string out = "#include <math.h>\n\n";
  out += signature(cfg) + " {\n";
  out += fmt::format("    for (int {} = 0; {} <= {}; {}++) {{\n", kLoop, kLoop, w.last_index(), kLoop);
  out += w.body("        ");
  out += "    }\n}\n";
  return out;
}

std::string emit_c_openmp(const sigma::FusedProgram& p, const EmitConfig& cfg) {
  const Writer w(p, cfg, "retval");
  const int t = cfg.threads;
  std::string out = "#include <math.h>\n#include <omp.h>\n\n";
  out += fmt::format("static const int NUM_THREADS = {};\n\n", t);
  out += signature(cfg) + " {\n";
  out += "    double retval = *(retval1);\n";
  out += "    omp_set_dynamic(0);\n";
  out += fmt::format("    #pragma omp parallel num_threads({}) reduction(max : retval)\n", t);
  out += "    {\n";
  out += "        int tid1 = omp_get_thread_num();\n";
  out += fmt::format("        for (int {} = tid1; {} <= {}; {} += {}) {{\n", kLoop, kLoop, w.last_index(), kLoop, t);
  out += w.body("            ");
  out += "        }\n";
  out += "    }\n";
  out += "    *(retval1) = retval;\n";
  out += "}\n";
  return out;
}

}  // namespace stenfuse::emit
