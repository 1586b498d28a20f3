#include "rbll/admissibility.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rbll/kernels.hpp"

namespace rbll {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Enumerate basic solutions of {rows * y <= rhs} in R^n, maximizing y[n-1].
// Small dense problems only; every n-subset of constraints is tried.
struct LpEnumResult {
  bool feasible = false;
  double objective = -1e300;
  Eigen::VectorXd y;
};

LpEnumResult lp_enum_max_last(const Eigen::MatrixXd& rows, const Eigen::VectorXd& rhs,
                              double tol) {
  const int n = static_cast<int>(rows.cols());
  const int c = static_cast<int>(rows.rows());
  LpEnumResult best;
  std::vector<int> idx(n);
  // iterate n-subsets of {0..c-1} in lexicographic order
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (c < n) return best;
  while (true) {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
      A.row(i) = rows.row(idx[i]);
      b(i) = rhs(idx[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      Eigen::VectorXd y = lu.solve(b);
      bool ok = true;
      for (int i = 0; i < c && ok; ++i)
        if (rows.row(i).dot(y) > rhs(i) + tol) ok = false;
      if (ok && (!best.feasible || y(n - 1) > best.objective)) {
        best.feasible = true;
        best.objective = y(n - 1);
        best.y = y;
      }
    }
    // next combination
    int k = n - 1;
    while (k >= 0 && idx[k] == c - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < n; ++i) idx[i] = idx[i - 1] + 1;
  }
  return best;
}

}  // namespace

PolytopeH build_K_e(const LinearFamily& fam, std::span<const double> e) {
  if (static_cast<int>(e.size()) != fam.J())
    throw std::invalid_argument("build_K_e: need one measure per map");
  PolytopeH p;
  p.m = fam.m;
  p.rows = fam.coeffs;
  p.b.resize(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (!(e[j] > 0)) throw std::invalid_argument("build_K_e: measures must be positive");
    p.b[j] = 0.5 * e[j];
  }
  return p;
}

std::vector<double> dimension_reduce(std::span<const double> e, int d) {
  if (d < 1) throw std::invalid_argument("dimension_reduce: d >= 1");
  std::vector<double> out(e.begin(), e.end());
  if (d == 1) return out;
  for (double& v : out) v = std::pow(v, 1.0 / d);
  return out;
}

std::vector<double> radii_from_measures(std::span<const double> e, int d) {
  const double wd = geom::unit_ball_volume(d);
  std::vector<double> r(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) r[j] = std::pow(e[j] / wd, 1.0 / d);
  return r;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::inadmissible: return "inadmissible";
    case Verdict::weakly_admissible: return "weakly-admissible";
    default: return "strictly-admissible";
  }
}

FaceWitness max_slack_on_face(const PolytopeH& poly, int k) {
  const int m = poly.m, J = poly.J();
  Eigen::VectorXd ak(m);
  for (int i = 0; i < m; ++i) ak(i) = poly.rows[static_cast<std::size_t>(k) * m + i];
  const double nk2 = ak.squaredNorm();
  if (nk2 == 0) throw StructuralError("max_slack_on_face: zero row");
  const Eigen::VectorXd x0 = (poly.b[k] / nk2) * ak;

  // Orthonormal basis of the face direction space null(a_k).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ak.transpose(), Eigen::ComputeFullV);
  Eigen::MatrixXd N = svd.matrixV().rightCols(m - 1);

  // Variables y = (z, t); constraints s(a_i x0) + s(a_i^T N) z + t <= b_i.
  // By the symmetry x -> -x the face L_k = -b_k attains the same slack.
  const int ncon = 2 * (J - 1);
  Eigen::MatrixXd rows(ncon, m);
  Eigen::VectorXd rhs(ncon);
  int c = 0;
  for (int i = 0; i < J; ++i) {
    if (i == k) continue;
    Eigen::VectorXd ai(m);
    for (int q = 0; q < m; ++q) ai(q) = poly.rows[static_cast<std::size_t>(i) * m + q];
    const Eigen::RowVectorXd aiN = ai.transpose() * N;
    for (int s = -1; s <= 1; s += 2) {
      for (int q = 0; q < m - 1; ++q) rows(c, q) = s * aiN(q);
      rows(c, m - 1) = 1.0;
      rhs(c) = poly.b[i] - s * ai.dot(x0);
      ++c;
    }
  }

  LpEnumResult lp = lp_enum_max_last(rows, rhs, 1e-12);
  FaceWitness w;
  w.k = k;
  if (!lp.feasible) {
    // cannot happen for bounded pointed feasible sets; report as unreachable
    w.face_reached = false;
    return w;
  }
  w.slack = lp.objective;
  Eigen::VectorXd x = x0 + N * lp.y.head(m - 1);
  w.x.assign(x.data(), x.data() + m);
  w.slacks.resize(J);
  for (int i = 0; i < J; ++i) {
    double v = 0;
    for (int q = 0; q < m; ++q) v += poly.rows[static_cast<std::size_t>(i) * m + q] * x(q);
    w.slacks[i] = poly.b[i] - std::abs(v);
  }
  w.face_reached = w.slack >= -1e-9;
  return w;
}

GenericityReport check_generic(const LinearFamily& fam, std::span<const double> e,
                               double tol) {
  const int m = fam.m, J = fam.J();
  if (m > 3) throw std::invalid_argument("check_generic: only m <= 3 supported");
  PolytopeH poly = build_K_e(fam, e);

  {  // boundedness; failure signals a nondegeneracy violation
    Eigen::MatrixXd M(J, m);
    for (int j = 0; j < J; ++j)
      for (int i = 0; i < m; ++i) M(j, i) = fam.coef(j, i);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    if (svd.singularValues().minCoeff() <= svd.singularValues().maxCoeff() * 1e-10)
      throw StructuralError("check_generic: K_e unbounded (rows do not span R^m)");
  }

  // Hyperplanes a_j . x = s b_j, s in {+,-}; enumerate m-fold intersections.
  struct Plane { Eigen::VectorXd a; double b; };
  std::vector<Plane> planes;
  for (int j = 0; j < J; ++j) {
    Eigen::VectorXd a(m);
    for (int i = 0; i < m; ++i) a(i) = fam.coef(j, i);
    planes.push_back({a, poly.b[j]});
    planes.push_back({-a, poly.b[j]});
  }

  GenericityReport rep;
  rep.checked = true;
  const int P = static_cast<int>(planes.size());
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::vector<Eigen::VectorXd> verts;
  while (true) {
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      A.row(i) = planes[idx[i]].a.transpose();
      b(i) = planes[idx[i]].b;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(b);
      bool feas = true;
      for (int j = 0; j < J && feas; ++j) {
        double v = 0;
        for (int q = 0; q < m; ++q) v += fam.coef(j, q) * x(q);
        if (std::abs(v) > poly.b[j] + tol) feas = false;
      }
      if (feas) {
        bool dup = false;
        for (const auto& u : verts)
          if ((u - x).lpNorm<Eigen::Infinity>() < 1e-7) { dup = true; break; }
        if (!dup) verts.push_back(x);
      }
    }
    int k = m - 1;
    while (k >= 0 && idx[k] == P - m + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < m; ++i) idx[i] = idx[i - 1] + 1;
  }

  rep.generic = true;
  for (const auto& x : verts) {
    int active = 0;
    for (int j = 0; j < J; ++j) {
      double v = 0;
      for (int q = 0; q < m; ++q) v += fam.coef(j, q) * x(q);
      if (poly.b[j] - std::abs(v) <= tol) ++active;
    }
    rep.vertices.emplace_back(x.data(), x.data() + m);
    rep.active_counts.push_back(active);
    if (active != m) rep.generic = false;
  }
  return rep;
}

AdmissibilityCertificate certify(const LinearFamily& fam, std::span<const double> e,
                                 int d, const CertifyOptions& opts) {
  NondegeneracyReport nd = validate_nondegenerate(fam);
  if (!nd.pass()) throw StructuralError("certify: family is degenerate");
  if (static_cast<int>(e.size()) != fam.J())
    throw std::invalid_argument("certify: need one measure per map");

  AdmissibilityCertificate cert;
  cert.d = d;
  cert.e.assign(e.begin(), e.end());
  cert.e_reduced = dimension_reduce(e, d);
  cert.r = radii_from_measures(e, d);
  cert.slack_threshold = opts.slack_threshold;

  PolytopeH poly = build_K_e(fam, cert.e_reduced);
  bool admissible = true, strict = true;
  for (int k = 0; k < fam.J(); ++k) {
    FaceWitness w = max_slack_on_face(poly, k);
    admissible = admissible && w.face_reached;
    strict = strict && (w.slack > opts.slack_threshold);
    cert.witnesses.push_back(std::move(w));
  }

  if (opts.check_left_derivatives && admissible) {
    for (int j = 0; j < fam.J(); ++j) {
      LeftDerivativeEstimate est = left_derivative(fam, cert.e_reduced, 1, j);
      LeftDerivativeRecord rec;
      rec.j = j;
      rec.applicable = est.applicable;
      rec.value = est.value;
      rec.error = est.error;
      rec.strictly_negative = est.applicable &&
          est.value < -std::max(1e-8, 3.0 * est.error);
      cert.left_derivatives.push_back(rec);
      strict = strict && rec.strictly_negative;
    }
  }

  if (opts.check_genericity && fam.m <= 3)
    cert.genericity = check_generic(fam, cert.e_reduced);

  cert.verdict = !admissible ? Verdict::inadmissible
               : strict      ? Verdict::strictly_admissible
                             : Verdict::weakly_admissible;
  return cert;
}

std::string serialize_certificate(const AdmissibilityCertificate& cert,
                                  const LinearFamily& fam) {
  std::ostringstream os;
  os << "verdict = " << to_string(cert.verdict) << "\n";
  os << "d = " << cert.d << "\n";
  os << "slack_threshold = " << fmt(cert.slack_threshold) << "\n";
  for (std::size_t j = 0; j < cert.e.size(); ++j) {
    os << "e[" << fam.labels[j] << "] = " << fmt(cert.e[j])
       << "  e_reduced = " << fmt(cert.e_reduced[j])
       << "  r = " << fmt(cert.r[j]) << "\n";
  }
  for (const FaceWitness& w : cert.witnesses) {
    os << "face[" << fam.labels[w.k] << "] reached = " << (w.face_reached ? 1 : 0)
       << "  slack = " << fmt(w.slack) << "  x =";
    for (double v : w.x) os << " " << fmt(v);
    os << "  slacks =";
    for (double v : w.slacks) os << " " << fmt(v);
    os << "\n";
  }
  for (const LeftDerivativeRecord& r : cert.left_derivatives) {
    os << "left_derivative[" << fam.labels[r.j] << "] = " << fmt(r.value)
       << "  error = " << fmt(r.error)
       << "  applicable = " << (r.applicable ? 1 : 0)
       << "  strictly_negative = " << (r.strictly_negative ? 1 : 0) << "\n";
  }
  if (cert.genericity.checked) {
    os << "generic = " << (cert.genericity.generic ? 1 : 0) << "\n";
    os << "vertices = " << cert.genericity.vertices.size() << "\n";
    for (std::size_t i = 0; i < cert.genericity.vertices.size(); ++i) {
      os << "vertex[" << i << "] =";
      for (double v : cert.genericity.vertices[i]) os << " " << fmt(v);
      os << "  active = " << cert.genericity.active_counts[i] << "\n";
    }
  }
  return os.str();
}

}  // namespace rbll
