#include "rheoshape/rheology/rheology.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rheoshape {

RheologyParams::RheologyParams(double q_, double p_, std::vector<double> m_schedule_)
    : q(q_), p(p_), m_schedule(std::move(m_schedule_)) {
  std::ostringstream msg;
  if (!(q > 6.0 / 5.0) || !(q <= 2.0)) {
    msg << "RheologyParams: q = " << q << " outside (6/5, 2]";
    throw CertificationError(msg.str());
  }
  if (!(p >= p_floor(q))) {
    msg << "RheologyParams: p = " << p << " below required " << p_floor(q);
    throw CertificationError(msg.str());
  }
  double prev = 0.0;
  for (double m : m_schedule) {
    if (!(m >= 1.0) || !(m > prev)) {
      msg << "RheologyParams: m_schedule must be strictly increasing with entries >= 1";
      throw CertificationError(msg.str());
    }
    prev = m;
  }
}

HemolysisParams::HemolysisParams(double c_h_, double alpha_, double beta_, double r_,
                                 const RheologyParams& rp)
    : c_h(c_h_), alpha(alpha_), beta(beta_), r(r_) {
  std::ostringstream msg;
  if (!(c_h > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    msg << "HemolysisParams: c_h, alpha, beta must be positive";
    throw CertificationError(msg.str());
  }
  const double qc = rp.q_conj();
  if (!(alpha <= qc)) {
    msg << "HemolysisParams: alpha = " << alpha << " violates alpha <= q' = " << qc;
    throw CertificationError(msg.str());
  }
  const auto window = r_window(rp, alpha);
  if (!(r >= window.first) || !(r <= window.second)) {
    msg << "HemolysisParams: r = " << r << " outside [" << window.first << ", " << window.second
        << "] = [1, q'/alpha]";
    throw CertificationError(msg.str());
  }
}

std::pair<double, double> HemolysisParams::r_window(const RheologyParams& rp, double alpha) {
  return {1.0, rp.q_conj() / alpha};
}

namespace {

void require_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw NumericalError("stress: tensor must be square");
  const double scale = std::max(1.0, a.norm());
  if ((a - a.transpose()).norm() > 1e-12 * scale)
    throw NumericalError("stress: tensor not symmetric to 1e-12");
}

}  // namespace

Eigen::MatrixXd stress(const Eigen::MatrixXd& a, const RheologyParams& params) {
  require_symmetric(a);
  return power_law_viscosity(a.norm(), params.q) * a;
}

Eigen::MatrixXd stress_regularized(const Eigen::MatrixXd& a, const RheologyParams& params,
                                   double m) {
  require_symmetric(a);
  if (!(m >= 1.0)) throw NumericalError("stress_regularized: m must be >= 1");
  const double d = a.norm();
  double nu = power_law_viscosity(d, params.q);
  if (std::isfinite(m)) nu += power_law_viscosity(d, params.p) / m;
  return nu * a;
}

InequalityCertificate certify_inequalities(const RheologyParams& params, long samples,
                                           std::uint64_t seed, int dim) {
  if (samples < 10000) throw NumericalError("certify_inequalities: samples must be >= 1e4");
  if (dim != 2 && dim != 3) throw NumericalError("certify_inequalities: dim must be 2 or 3");

  InequalityCertificate cert;
  cert.dim = dim;
  cert.q = params.q;
  cert.samples = samples;
  cert.seed = seed;
  cert.c1 = cert.c2 = std::pow(2.0, params.q - 2.0);
  cert.c3 = 1.0;
  cert.coercivity_margin = std::numeric_limits<double>::infinity();
  cert.growth_margin = std::numeric_limits<double>::infinity();
  cert.monotonicity_min = std::numeric_limits<double>::infinity();
  cert.passed = true;

  Rng rng(seed);
  const double q = params.q;
  auto random_symmetric = [&]() {
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) a(i, j) = a(j, i) = rng.normal();
    const double norm = a.norm();
    if (norm == 0.0) return a;
    // log-uniform magnitudes spanning [1e-6, 1e3]
    const double mag = std::pow(10.0, rng.uniform(-6.0, 3.0));
    return Eigen::MatrixXd(a * (mag / norm));
  };

  Eigen::MatrixXd prev = random_symmetric();
  Eigen::MatrixXd s_prev = power_law_viscosity(prev.norm(), q) * prev;
  auto record_witness = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (!cert.passed) return;
    cert.passed = false;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        cert.witness_a.push_back(a(i, j));
        cert.witness_b.push_back(b(i, j));
      }
  };

  for (long k = 0; k < samples; ++k) {
    const Eigen::MatrixXd a = random_symmetric();
    const double na = a.norm();
    const Eigen::MatrixXd s = power_law_viscosity(na, q) * a;

    const double coer = s.cwiseProduct(a).sum() - (cert.c1 * std::pow(na, q) - cert.c2);
    cert.coercivity_margin = std::min(cert.coercivity_margin, coer);
    if (coer < 0.0) record_witness(a, a);

    const double grow = cert.c3 * (1.0 + std::pow(na, q - 1.0)) - s.norm();
    cert.growth_margin = std::min(cert.growth_margin, grow);
    if (grow < 0.0) record_witness(a, a);

    if ((a - prev).norm() > 0.0) {
      const double mono = (s - s_prev).cwiseProduct(a - prev).sum();
      cert.monotonicity_min = std::min(cert.monotonicity_min, mono);
      if (!(mono > 0.0)) record_witness(a, prev);
    }
    prev = a;
    s_prev = s;
  }
  return cert;
}

}  // namespace rheoshape
