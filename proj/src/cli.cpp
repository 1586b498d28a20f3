#include "rbll/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rbll/admissibility.hpp"
#include "rbll/functional.hpp"
#include "rbll/instance.hpp"
#include "rbll/kernels.hpp"
#include "rbll/orbit.hpp"
#include "rbll/rng.hpp"
#include "rbll/spectral.hpp"
#include "rbll/stability.hpp"
#include "rbll/symflow.hpp"

namespace rbll::cli {

namespace {

struct PropertyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  const std::string path = dir + "/" + name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write output file: " + path);
  f << content;
}

std::vector<double> parse_range(const std::string& s) {
  // "lo:hi:n" inclusive linear range
  double lo, hi;
  int n;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1)
    throw std::invalid_argument("bad range (expected lo:hi:n): " + s);
  std::vector<double> out;
  for (int k = 0; k < n; ++k)
    out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1));
  return out;
}

HarmonicTuple parse_harmonic(const std::string& s, const Instance& inst,
                             const MeasureSpec& spec) {
  if (s.rfind("nu", 0) == 0) {
    HarmonicTuple G;
    G.nu = std::stoi(s.substr(2));
    G.comp.assign(inst.fam.J(), {1.0, 0.0});
    return G;
  }
  if (s == "translation") {
    std::vector<double> v(static_cast<std::size_t>(inst.fam.m) * 2, 0.0);
    v[0] = 1.0;
    return symmetry_direction_tuple(SymmetryKind::translation, v, inst.fam, spec);
  }
  if (s == "shear") {
    const double A[3] = {1.0, 0.0, 0.0};  // diag(1,-1) generator
    return symmetry_direction_tuple(SymmetryKind::shear, {A, 3}, inst.fam, spec);
  }
  throw std::invalid_argument("unknown harmonic spec: " + s);
}

// random star-blob tuple rasterized on the default grid (flow experiments)
SetTuple random_grid_tuple(const Instance& inst, const MeasureSpec& spec,
                           std::uint64_t seed, std::vector<double>* e_out) {
  RngStream rng(seed, 11);
  SetTuple t;
  t.d = spec.d;
  const double h = grid_default_h(spec);
  const Box box = grid_default_box(spec);
  for (int j = 0; j < inst.fam.J(); ++j) {
    RadialGraph rg;
    rg.ntheta = 256;
    rg.rho.resize(rg.ntheta);
    const double a1 = rng.uniform(-0.3, 0.3), b1 = rng.uniform(-0.3, 0.3);
    const double a2 = rng.uniform(-0.2, 0.2), b2 = rng.uniform(-0.2, 0.2);
    for (int k = 0; k < rg.ntheta; ++k) {
      const double th = 2 * geom::kPi * k / rg.ntheta;
      const double bump = 1.0 + a1 * std::cos(th) + b1 * std::sin(th) +
                          a2 * std::cos(2 * th) + b2 * std::sin(3 * th);
      rg.rho[k] = spec.r[j] * std::max(0.35, bump);
    }
    GridSet g = rasterize(spec.d, SetRep(rg), h, box);
    if (e_out) (*e_out)[j] = set_measure(spec.d, SetRep(g));
    t.sets.emplace_back(std::move(g));
  }
  return t;
}

int cmd_certify(const Instance& inst, const std::string& outdir, std::ostream& out) {
  AdmissibilityCertificate cert = certify(inst.fam, inst.e, inst.fam.dim_d);
  write_file(outdir, inst.name + ".certificate.txt",
             serialize_certificate(cert, inst.fam));
  out << "verdict = " << to_string(cert.verdict) << "\n";
  for (const FaceWitness& w : cert.witnesses) {
    out << "face " << inst.fam.labels[w.k] << ": reached=" << w.face_reached
        << " slack=" << fmt(w.slack) << " x=";
    for (double v : w.x) out << " " << fmt(v);
    out << "\n";
  }
  if (cert.genericity.checked)
    out << "generic = " << (cert.genericity.generic ? 1 : 0) << " ("
        << cert.genericity.vertices.size() << " vertices)\n";
  return 0;
}

int cmd_phi(const Instance& inst, const std::string& engine_s, std::uint64_t n,
            std::uint64_t seed, const std::string& outdir, std::ostream& out) {
  const MeasureSpec spec = inst.spec();
  const SetTuple star = make_ball_tuple(spec);
  const Engine engine = engine_from_string(engine_s);
  double value = 0, err = 0;
  if (engine == Engine::exact) {
    if (spec.d != 1) throw std::invalid_argument("phi: exact engine is d = 1");
    value = eval_phi_d1_exact(inst.fam, star);
  } else if (engine == Engine::fiber) {
    FiberEstimate fe = eval_phi_fiber(inst.fam, star);
    value = fe.value;
    err = fe.error;
  } else {
    MCEstimate est = eval_phi_mc(inst.fam, star, n, seed);
    value = est.value;
    err = est.std_error;
  }
  std::ostringstream rec;
  rec << "instance = " << inst.name << "\nengine = " << engine_s
      << "\nvalue = " << fmt(value) << "\nstderr = " << fmt(err)
      << "\nsamples = " << n << "\nseed = " << seed << "\n";
  write_file(outdir, inst.name + ".phi.txt", rec.str());
  out << "phi(E*) = " << fmt(value) << " +- " << fmt(err) << " [" << engine_s
      << "]\n";
  return 0;
}

int cmd_kernels(const Instance& inst, int jsel, int npts,
                const std::string& outdir, std::ostream& out) {
  const int d = inst.fam.dim_d;
  for (int j = 0; j < inst.fam.J(); ++j) {
    if (jsel >= 0 && j != jsel) continue;
    KernelProfile prof = kernel_profile(inst.fam, inst.e, d, j, npts);
    write_file(outdir, inst.name + ".K" + inst.fam.labels[j] + ".txt",
               serialize_profile(prof));
    LeftDerivativeEstimate ld = left_derivative(inst.fam, inst.e, d, j);
    out << "K" << inst.fam.labels[j] << ": support=" << fmt(prof.support_radius)
        << " D-(r_j)=" << fmt(ld.value) << " +- " << fmt(ld.error);
    if (d >= 2) {
      GammaEstimate g = gamma(inst.fam, inst.e, d, j);
      out << " gamma=" << fmt(g.gamma) << " mismatch=" << fmt(g.mismatch);
    }
    out << "\n";
  }
  return 0;
}

int cmd_flow(const Instance& inst, int steps, std::uint64_t samples,
             std::uint64_t seed, const std::string& start,
             const std::string& outdir, std::ostream& out) {
  MeasureSpec spec = inst.spec();
  SetTuple E;
  if (start == "balls") {
    const double h = grid_default_h(spec);
    const Box box = grid_default_box(spec);
    SetTuple star = make_ball_tuple(spec);
    E.d = spec.d;
    std::vector<double> e2(inst.fam.J());
    for (int j = 0; j < inst.fam.J(); ++j) {
      GridSet g = rasterize(spec.d, star.sets[j], h, box);
      e2[j] = set_measure(spec.d, SetRep(g));
      E.sets.emplace_back(std::move(g));
    }
    spec = make_measure_spec(e2, spec.d);
  } else if (start == "random") {
    std::vector<double> e2(inst.fam.J());
    E = random_grid_tuple(inst, spec, seed, &e2);
    spec = make_measure_spec(e2, spec.d);
  } else {
    throw std::invalid_argument("flow: --start must be balls or random");
  }

  FlowOptions fopts;
  fopts.steps = steps;
  fopts.mc_samples = samples;
  fopts.seed = seed;
  FlowResult res = flow_to_balls(inst.fam, E, spec, fopts);
  write_file(outdir, inst.name + ".flow.csv", serialize_trajectory(res));

  // monotonicity within combined error bars is a certified property
  for (std::size_t k = 1; k < res.trajectory.size(); ++k) {
    const auto& a = res.trajectory[k - 1];
    const auto& b = res.trajectory[k];
    const double bar = 3 * std::hypot(a.std_error, b.std_error);
    if (b.phi < a.phi - bar)
      throw PropertyViolation("flow: Phi decreased beyond error bars at step " +
                              std::to_string(k));
  }
  out << "flow: steps=" << steps
      << " final_phi=" << fmt(res.trajectory.back().phi)
      << " final_dist=" << fmt(res.trajectory.back().dist)
      << (res.stalled ? " [stalled]" : "") << "\n";
  return 0;
}

int cmd_dist(const Instance& inst, std::uint64_t planted_seed,
             const std::string& outdir, std::ostream& out) {
  const MeasureSpec spec = inst.spec();
  const int d = spec.d;
  RngStream rng(planted_seed, 21);
  std::vector<double> v(static_cast<std::size_t>(inst.fam.m) * d);
  const double rmax = *std::max_element(spec.r.begin(), spec.r.end());
  for (double& x : v) x = rng.uniform(-0.3 * rmax, 0.3 * rmax);
  std::array<double, 9> psi{1, 0, 0, 0, 1, 0, 0, 0, 1};
  double gen[2] = {0, 0};
  if (d == 2) {
    gen[0] = rng.uniform(-0.25, 0.25);
    gen[1] = rng.uniform(-0.25, 0.25);
    const auto e2 = sl2_exp(gen[0], gen[1], gen[1]);  // symmetric generator
    psi = {e2[0], e2[1], 0, e2[2], e2[3], 0, 0, 0, 1};
  }
  SetTuple E;
  E.d = d;
  for (int j = 0; j < inst.fam.J(); ++j) {
    Ellipsoid el;
    el.r = spec.r[j];
    el.psi = psi;
    for (int k = 0; k < d; ++k) {
      double s = 0;
      for (int i = 0; i < inst.fam.m; ++i)
        s += inst.fam.coef(j, i) * v[static_cast<std::size_t>(i) * d + k];
      el.c[k] = s;
    }
    E.sets.emplace_back(el);
  }

  OrbitOptions oopts;
  oopts.seed = planted_seed ^ 0x5bd1u;
  OrbitResult res = dist_to_orbit(inst.fam, E, spec, oopts);
  std::ostringstream rec;
  rec << "planted_v =";
  for (double x : v) rec << " " << fmt(x);
  rec << "\nplanted_generator = " << fmt(gen[0]) << " " << fmt(gen[1]) << " "
      << fmt(gen[1]) << "\n";
  rec << serialize_orbit_result(res);
  write_file(outdir, inst.name + ".dist.txt", rec.str());
  out << "dist = " << fmt(res.distance) << " spread = " << fmt(res.spread) << "\n";
  return 0;
}

int cmd_spectrum(const Instance& inst, int numax, const std::string& outdir,
                 std::ostream& out) {
  const int d = inst.fam.dim_d;
  if (d < 2) throw std::invalid_argument("spectrum: requires d >= 2");
  auto [Jp, n] = select_independent_subset(inst.fam);
  SpectralReport rep = balanced_gap(inst.fam, inst.e, d, Jp, n, numax);
  write_file(outdir, inst.name + ".spectrum.csv",
             serialize_spectral(rep, inst.fam));
  out << "A = " << fmt(rep.A) << " margin = " << fmt(rep.gap_margin)
      << " Lambda_1 = " << fmt(rep.Lambda_nu.front())
      << " Lambda_max_nu = " << fmt(rep.Lambda_nu.back()) << "\n";
  if (rep.A >= 0.5)
    throw PropertyViolation("spectrum: balanced gap violated (A >= 1/2)");
  return 0;
}

int cmd_deficit(const Instance& inst, const std::string& harmonic,
                const std::string& srange, const std::string& engine_s,
                std::uint64_t samples, std::uint64_t seed,
                const std::string& outdir, std::ostream& out) {
  const MeasureSpec spec = inst.spec();
  if (spec.d != 2) throw std::invalid_argument("deficit: requires d = 2");
  HarmonicTuple G = parse_harmonic(harmonic, inst, spec);
  const std::vector<double> svals = parse_range(srange);
  StabilityOptions opts;
  opts.deficit.n = samples;
  opts.deficit.seed = seed;
  DeficitCurve curve =
      deficit_curve(inst.fam, spec, G, svals, engine_from_string(engine_s), opts);
  curve.label = harmonic;
  write_file(outdir, inst.name + ".deficit.csv", serialize_curve(curve));
  for (const DeficitPoint& p : curve.points)
    if (p.deficit < -3 * p.error)
      throw PropertyViolation("deficit: negative beyond error bars (BLL)");
  if (curve.fit.ok)
    out << "deficit fit: exponent = " << fmt(curve.fit.exponent) << " +- "
        << fmt(curve.fit.exponent_stderr) << " c = " << fmt(curve.fit.c) << "\n";
  else
    out << "deficit fit: indeterminate (points below noise)\n";
  return 0;
}

int cmd_report(const Instance& inst, const std::string& outdir, std::ostream& out) {
  std::ostringstream rep;
  const int d = inst.fam.dim_d;
  NondegeneracyReport nd = validate_nondegenerate(inst.fam);
  rep << "instance = " << inst.name << "\nnondegenerate = " << nd.pass() << "\n";
  AdmissibilityCertificate cert = certify(inst.fam, inst.e, d);
  rep << serialize_certificate(cert, inst.fam);
  for (int j = 0; j < inst.fam.J(); ++j) {
    LeftDerivativeEstimate ld = left_derivative(inst.fam, inst.e, d, j);
    rep << "D-K[" << inst.fam.labels[j] << "] = " << fmt(ld.value) << "\n";
  }
  if (d >= 2 && cert.verdict == Verdict::strictly_admissible) {
    auto [Jp, n] = select_independent_subset(inst.fam);
    SpectralReport sr = balanced_gap(inst.fam, inst.e, d, Jp, n, 16);
    rep << "spectral_A = " << fmt(sr.A) << "\nspectral_margin = "
        << fmt(sr.gap_margin) << "\n";
  }
  write_file(outdir, inst.name + ".report.txt", rep.str());
  out << "report written: " << inst.name << ".report.txt\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"rbll: a numerical laboratory for symmetrization functionals"};
  app.require_subcommand(1);

  std::string instance_path, outdir = ".", engine = "mc", start = "random";
  std::string harmonic = "nu3", srange = "0.02:0.1:5";
  std::uint64_t samples = 1u << 20;
  std::int64_t seed = -1;
  int jsel = -1, npts = 256, steps = 50, numax = 32;
  std::uint64_t planted_seed = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--instance", instance_path, "instance config file")->required();
    cmd->add_option("--out", outdir, "output directory");
    cmd->add_option("--seed", seed, "seed override");
  };
  CLI::App* certify_cmd = app.add_subcommand("certify", "admissibility certificate");
  add_common(certify_cmd);
  CLI::App* phi_cmd = app.add_subcommand("phi", "evaluate Phi(E*)");
  add_common(phi_cmd);
  phi_cmd->add_option("--engine", engine, "mc|fiber|exact");
  phi_cmd->add_option("--samples", samples, "Monte Carlo samples");
  CLI::App* kern_cmd = app.add_subcommand("kernels", "slice-volume kernel profiles");
  add_common(kern_cmd);
  kern_cmd->add_option("--j", jsel, "single index (0-based)");
  kern_cmd->add_option("--npts", npts, "profile points");
  CLI::App* flow_cmd = app.add_subcommand("flow", "Steiner flow to balls");
  add_common(flow_cmd);
  flow_cmd->add_option("--steps", steps, "flow steps");
  flow_cmd->add_option("--samples", samples, "Monte Carlo samples per step");
  flow_cmd->add_option("--start", start, "balls|random");
  CLI::App* dist_cmd = app.add_subcommand("dist", "distance to the maximizer orbit");
  add_common(dist_cmd);
  dist_cmd->add_option("--planted-seed", planted_seed, "seed of the planted member");
  CLI::App* spec_cmd = app.add_subcommand("spectrum", "balanced spectral gap");
  add_common(spec_cmd);
  spec_cmd->add_option("--numax", numax, "largest degree");
  CLI::App* def_cmd = app.add_subcommand("deficit", "deficit curves");
  add_common(def_cmd);
  def_cmd->add_option("--harmonic", harmonic, "nu<k>|translation|shear");
  def_cmd->add_option("--s", srange, "lo:hi:n");
  def_cmd->add_option("--engine", engine, "mc|fiber");
  def_cmd->add_option("--samples", samples, "Monte Carlo samples");
  CLI::App* rep_cmd = app.add_subcommand("report", "bundled summary");
  add_common(rep_cmd);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    out << app.help();
    return 1;
  }

  try {
    Instance inst = load_instance(instance_path);
    const std::uint64_t use_seed = seed >= 0 ? static_cast<std::uint64_t>(seed)
                                             : inst.seed;
    if (certify_cmd->parsed()) return cmd_certify(inst, outdir, out);
    if (phi_cmd->parsed())
      return cmd_phi(inst, engine, samples, use_seed, outdir, out);
    if (kern_cmd->parsed()) return cmd_kernels(inst, jsel, npts, outdir, out);
    if (flow_cmd->parsed())
      return cmd_flow(inst, steps, samples, use_seed, start, outdir, out);
    if (dist_cmd->parsed()) return cmd_dist(inst, planted_seed, outdir, out);
    if (spec_cmd->parsed()) return cmd_spectrum(inst, numax, outdir, out);
    if (def_cmd->parsed())
      return cmd_deficit(inst, harmonic, srange, engine, samples, use_seed,
                         outdir, out);
    if (rep_cmd->parsed()) return cmd_report(inst, outdir, out);
    out << app.help();
    return 1;
  } catch (const PropertyViolation& e) {
    out << "property violation: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    out << "argument error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    out << "computation error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace rbll::cli
