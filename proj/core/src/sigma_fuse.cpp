#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "stenfuse/sigma.hpp"

namespace stenfuse::sigma {

namespace {

std::string role_of(StageKind k) {
  std::string s = to_string(k);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void check_alignment(const StagedProgram& p) {
  const std::size_t trip = p.stages.empty() ? 0 : p.stages.front().trip;
  for (std::size_t si = 0; si < p.stages.size(); ++si) {
    const Stage& s = p.stages[si];
    const std::string name = to_string(s.name);
    if (s.trip != trip || trip == 0) {
      throw FusionError("fuse: stage " + name + " has trip " + std::to_string(s.trip) + ", expected " +
                        std::to_string(trip));
    }
    if (s.scatter.arity() != 1 || s.kernel.coeffs.size() != s.gather.arity()) {
      throw FusionError("fuse: stage " + name + " kernel arity does not match its index maps");
    }
    const Access& dst = s.scatter.entries.front();
    if (dst.buffer.kind == Buffer::Temp && dst.buffer.stage != static_cast<int>(si)) {
      throw FusionError("fuse: stage " + name + " writes another stage's buffer " + dst.buffer.str());
    }
    if (dst.buffer.kind == Buffer::Temp || dst.buffer.kind == Buffer::Out) {
      std::set<long> seen;
      for (std::size_t j = 0; j < trip; ++j) {
        if (!seen.insert(dst.index(static_cast<long>(j))).second) {
          throw FusionError("fuse: stage " + name + " scatter is not injective (j=" + std::to_string(j) + ")");
        }
      }
    }

    for (const Access& a : s.gather.entries) {
      if (a.buffer.kind == Buffer::Out || a.buffer.kind == Buffer::Acc) {
        throw FusionError("fuse: stage " + name + " reads output buffer " + a.buffer.str());
      }
      if (a.buffer.kind != Buffer::Temp) continue;
      const int q = a.buffer.stage;
      if (q < 0 || q >= static_cast<int>(si)) {
        throw FusionError("fuse: stage " + name + " reads " + a.buffer.str() + " before it is produced");
      }
      const Stage& producer = p.stages[static_cast<std::size_t>(q)];
      const Access& w = producer.scatter.entries.front();
      const std::string pair = std::string(to_string(producer.name)) + " -> " + name;
      if (!(w.buffer == a.buffer)) {
        throw FusionError("fuse: " + pair + ": producer writes " + w.buffer.str() + ", consumer reads " +
                          a.buffer.str());
      }
      for (std::size_t j = 0; j < trip; ++j) {
        const auto jl = static_cast<long>(j);
        if (w.index(jl) != a.index(jl)) {
          throw FusionError("fuse: " + pair + " misaligned at j=" + std::to_string(j) + ": consumer reads " +
                            a.str() + " = " + std::to_string(a.index(jl)) + ", producer wrote " +
                            std::to_string(w.index(jl)));
        }
      }
    }
  }
}

}  // namespace

FusedProgram fuse(const StagedProgram& p) {
  check_alignment(p);

  FusedProgram f;
  f.n = p.n;
  f.m = p.m;
  f.trip = p.stages.front().trip;

  // Primary reads needed more than once go through a temporary.
  std::vector<std::pair<Access, int>> uses;
  for (const auto& s : p.stages) {
    for (const auto& a : s.gather.entries) {
      if (!a.buffer.primary()) continue;
      auto it = std::find_if(uses.begin(), uses.end(), [&](const auto& u) { return u.first == a; });
      if (it == uses.end()) {
        uses.push_back({a, 1});
        f.reads.entries.push_back(a);
      } else {
        ++it->second;
      }
    }
  }

  std::vector<std::pair<Access, int>> loaded;
  std::vector<int> stage_temp(p.stages.size(), -1);
  auto new_temp = [&](std::string role) {
    f.temps.push_back({std::move(role)});
    return static_cast<int>(f.temps.size()) - 1;
  };

  for (std::size_t si = 0; si < p.stages.size(); ++si) {
    const Stage& s = p.stages[si];
    std::vector<Term> terms;
    for (std::size_t k = 0; k < s.gather.arity(); ++k) {
      const Access& a = s.gather.entries[k];
      Operand op;
      if (a.buffer.kind == Buffer::Temp) {
        op.kind = Operand::Kind::Temp;
        op.temp = stage_temp[static_cast<std::size_t>(a.buffer.stage)];
      } else {
        const int count = std::find_if(uses.begin(), uses.end(), [&](const auto& u) { return u.first == a; })->second;
        if (count > 1) {
          auto it = std::find_if(loaded.begin(), loaded.end(), [&](const auto& l) { return l.first == a; });
          int t;
          if (it == loaded.end()) {
            t = new_temp(a.buffer.kind == Buffer::X ? "phi" : "rho");
            Instr load;
            load.op = Instr::Op::Load;
            load.dest = t;
            load.source = a;
            f.body.push_back(load);
            loaded.push_back({a, t});
          } else {
            t = it->second;
          }
          op.kind = Operand::Kind::Temp;
          op.temp = t;
        } else {
          op.kind = Operand::Kind::Read;
          op.read = a;
        }
      }
      terms.push_back({s.kernel.coeffs[k], op});
    }

    Instr ins;
    ins.terms = std::move(terms);
    ins.abs = s.kernel.abs;
    const Access& dst = s.scatter.entries.front();
    if (s.kernel.max_accumulate) {
      ins.op = Instr::Op::Reduce;
    } else if (dst.buffer.kind == Buffer::Temp) {
      ins.op = Instr::Op::Assign;
      ins.dest = new_temp(role_of(s.name));
      stage_temp[si] = ins.dest;
    } else if (dst.buffer.kind == Buffer::Out) {
      ins.op = Instr::Op::Store;
      ins.target = dst;
      f.writes.entries.push_back(dst);
    } else {
      throw FusionError(std::string("fuse: stage ") + to_string(s.name) + " scatters into " + dst.buffer.str());
    }
    f.body.push_back(std::move(ins));
  }

  check_structure(f);
  return f;
}

void check_structure(const FusedProgram& p) {
  std::vector<bool> assigned(p.temps.size(), false);
  auto check_access = [&](const Access& a, bool write) {
    const Buffer k = a.buffer.kind;
    const bool ok = write ? k == Buffer::Out : (k == Buffer::X || k == Buffer::Rho);
    if (!ok) throw FusionError("fused body touches buffer " + a.buffer.str());
  };
  auto check_temp = [&](int t) {
    if (t < 0 || static_cast<std::size_t>(t) >= p.temps.size() || !assigned[static_cast<std::size_t>(t)]) {
      throw FusionError("fused body uses temporary " + std::to_string(t) + " before assignment");
    }
  };
  for (const auto& ins : p.body) {
    for (const auto& term : ins.terms) {
      if (term.operand.kind == Operand::Kind::Temp) check_temp(term.operand.temp);
      else check_access(term.operand.read, false);
    }
    if (ins.op == Instr::Op::Load) check_access(ins.source, false);
    if (ins.op == Instr::Op::Store) check_access(ins.target, true);
    if (ins.op == Instr::Op::Load || ins.op == Instr::Op::Assign) {
      if (ins.dest < 0 || static_cast<std::size_t>(ins.dest) >= p.temps.size() ||
          assigned[static_cast<std::size_t>(ins.dest)]) {
        throw FusionError("fused body assigns temporary " + std::to_string(ins.dest) + " twice");
      }
      assigned[static_cast<std::size_t>(ins.dest)] = true;
    }
  }
}

std::string pretty(const FusedProgram& p) {
  std::ostringstream os;
  auto operand = [&](const Operand& o) {
    return o.kind == Operand::Kind::Temp ? "s" + std::to_string(o.temp) : o.read.str();
  };
  auto sum = [&](const Instr& ins) {
    std::string s = ins.abs ? "|" : "";
    for (std::size_t k = 0; k < ins.terms.size(); ++k) {
      s += (k ? " + " : "") + ins.terms[k].coeff.str() + "*" + operand(ins.terms[k].operand);
    }
    return ins.abs ? s + "|" : s;
  };
  os << "fused loop j < " << p.trip << " (n=" << p.n << ", m=" << p.m << ")\n";
  for (const auto& ins : p.body) {
    os << "  ";
    switch (ins.op) {
      case Instr::Op::Load:
        os << 's' << ins.dest << " = " << ins.source.str() << "    // " << p.temps[static_cast<std::size_t>(ins.dest)].role;
        break;
      case Instr::Op::Assign:
        os << 's' << ins.dest << " = " << sum(ins) << "    // " << p.temps[static_cast<std::size_t>(ins.dest)].role;
        break;
      case Instr::Op::Store: os << ins.target.str() << " = " << sum(ins); break;
      case Instr::Op::Reduce: os << "acc = max(acc, " << sum(ins) << ')'; break;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace stenfuse::sigma
