#include "bhotoc/runner.hpp"

#include <cmath>
#include <fstream>
#include <memory>

#include "bhotoc/csv.hpp"
#include "bhotoc/error.hpp"
#include "bhotoc/validation.hpp"

namespace bhotoc {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

OTOCSeries run_quantum(const RunConfig& cfg) {
  const auto& sys = *cfg.system;
  const auto& st = *cfg.state;
  const auto& t = cfg.task;
  const bool quadrature = !t.A.conserves_number() || !t.B.conserves_number();
  const BasisMode mode =
      cfg.numerics.basis.mode.value_or(quadrature ? BasisMode::truncated : BasisMode::fixed_number);
  std::shared_ptr<const FockBasis> basis;
  if (mode == BasisMode::truncated) {
    basis = std::make_shared<FockBasis>(FockBasis::truncated(sys.sites, *cfg.numerics.basis.n_max));
  } else {
    double n = 0.0;
    for (double v : st.occupations) n += v;
    basis = std::make_shared<FockBasis>(FockBasis::fixed_number(sys.sites, static_cast<std::size_t>(std::llround(n))));
  }
  const SparseOperator A = build_observable(*basis, t.A);
  const SparseOperator B = build_observable(*basis, t.B);
  const auto times = t.times.resolve();

  StateVector psi = [&] {
    if (st.kind == StateConfig::Kind::fock) {
      std::vector<std::uint32_t> occ;
      for (double v : st.occupations) occ.push_back(static_cast<std::uint32_t>(v));
      return fock_state(basis, occ);
    }
    std::vector<double> ph = st.phases.empty() ? std::vector<double>(st.occupations.size(), 0.0) : st.phases;
    return coherent_state(basis, coherent_amplitudes(st.occupations, ph));
  }();
  auto s = quantum_otoc(sys, psi, A, B, times, cfg.numerics.propagator);
  s.meta.A = t.A.name();
  s.meta.B = t.B.name();
  return s;
}

}  // namespace

RunReport run_task(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  RunReport rep;
  const auto& n = cfg.numerics;
  const auto& t = cfg.task;

  auto add = [&](const std::string& name) {
    rep.files.push_back(out_dir / name);
    return out_dir / name;
  };

  switch (t.kind) {
    case TaskKind::quantum_otoc: {
      const auto s = run_quantum(cfg);
      write_otoc_csv(add("otoc.csv"), s);
      log << "quantum otoc: " << s.size() << " grid points, C(t_end)=" << format_double(s.values.back()) << "\n";
      break;
    }
    case TaskKind::classical_otoc: {
      const auto s = classical_otoc(*cfg.system, cfg.state->sampler(n.seed), t.A, t.B, t.times.resolve(), n.samples,
                                    n.flow, n.workers);
      write_otoc_csv(add("otoc.csv"), s);
      log << "classical otoc: " << s.size() << " grid points, " << s.meta.samples << " samples, " << s.meta.excluded
          << " excluded\n";
      break;
    }
    case TaskKind::cinf: {
      const auto r = cinf(*cfg.system, cfg.state->sampler(n.seed), t.A, t.B, t.profile, n.samples, n.flow, n.workers);
      const auto& p = r.profile;
      CsvWriter w(add("profile.csv"), {"c1", "c2", "abar", "abar_err", "valid"});
      for (std::size_t c = 0; c < p.cells(); ++c) {
        const double c2 = p.axes.size() > 1 ? p.c_mean[1][c] : 0.0;
        w.row({p.c_mean[0][c], c2, p.abar[c], p.abar_err[c], p.valid[c] ? 1.0 : 0.0});
      }
      w.close();
      CsvWriter res(add("cinf.csv"), {"C_inf", "stderr", "used", "excluded", "span"});
      res.row({r.value, r.stderr_, static_cast<double>(r.used), static_cast<double>(r.excluded), r.span});
      res.close();
      log << "C_inf=" << format_double(r.value) << " stderr=" << format_double(r.stderr_) << " excluded=" << r.excluded
          << " span=" << format_double(r.span) << "\n";
      break;
    }
    case TaskKind::lyapunov: {
      const auto r = lyapunov(*cfg.system, cfg.state->center(), t.horizon, t.renorm, n.flow);
      CsvWriter w(add("lyapunov.csv"), {"t", "lambda_running"});
      for (std::size_t i = 0; i < r.times.size(); ++i) w.row({r.times[i], r.running[i]});
      w.close();
      log << "lambda=" << format_double(r.exponent) << "\n";
      break;
    }
    case TaskKind::poincare:
    case TaskKind::strobo: {
      const auto r = t.kind == TaskKind::poincare
                         ? poincare(*cfg.system, cfg.state->center(), t.T, n.flow, t.direction)
                         : stroboscopic(*cfg.system, cfg.state->center(), t.periods, n.flow);
      CsvWriter w(add("sections.csv"), {"x", "y", "crossing_time"});
      for (const auto& p : r.points) w.row({p.x, p.y, p.time});
      w.close();
      log << "section points=" << r.points.size() << (r.no_crossings ? " (warning: no crossings)" : "") << "\n";
      break;
    }
    case TaskKind::families: {
      FamilyConfig fc = t.families;
      fc.dt = n.flow.dt;
      const auto r = family_count(OneDofHamiltonian::sqrt_well(), t.q0, t.q_target, t.t, fc);
      CsvWriter w(add("families.csv"), {"p0", "q_t"});
      for (std::size_t i = 0; i < r.p0.size(); ++i) w.row({r.p0[i], r.q_t[i]});
      w.close();
      log << "families=" << r.families << "\n";
      log << "roots=" << r.roots.size() << " branches=" << r.branches;
      if (!r.unresolved.empty()) log << " unresolved=" << r.unresolved.size();
      log << "\n";
      break;
    }
    case TaskKind::validate: {
      const auto checks = run_validation(t.quick, n.workers);
      std::string text;
      for (const auto& c : checks) {
        const auto line = format_check(c);
        log << line << "\n";
        text += line + "\n";
        rep.passed = rep.passed && c.passed;
      }
      write_text(add("validation.txt"), text);
      break;
    }
  }
  write_text(add("manifest.yaml"), cfg.manifest());
  return rep;
}

}  // namespace bhotoc
