#include "rheoshape/solver/solver.hpp"

namespace rheoshape {

// A-priori constant for
//   max_s 1/2||w(s)||^2 + int ||Dw||^q + (1/M) int ||Dw||^p  <=  C.
// Chain (homogenized problem, testing the layer equation with w):
//   * initial term: K0 = 2 (C0^2 + |D| c_V^2),
//   * transport exchange split with Young at eps = q/4, leaving a factor 1/2
//     of the dissipation on the left and
//       R = K0 + ((c_P c_K)^{q'} / (q' eps^{1/(q-1)}))
//             * ( 2^{1/(q-1)} ||f||^{q'} + c_V^{q'} (2^{1/(q-1)} + c_V^{q'}) |cyl| ),
//   * the remaining |int (w (x) w) : grad V| <= c_V ||w||^2 closes with the
//     integral form of Gronwall:
//       1/2 ||w(s)||^2 <= R e^{2 c_V T},
//       1/2 (diss_q + diss_p) <= R (1 + 2 c_V T e^{2 c_V T}).
double energy_bound_constant(const EnergyBoundInputs& in) {
  const double q = in.q;
  const double qc = q / (q - 1.0);
  const double k0 = 2.0 * (in.c0 * in.c0 + in.box_measure * in.c_V * in.c_V);
  const double eps = q / 4.0;
  const double eps_pow = std::pow(eps, 1.0 / (q - 1.0));
  const double two_pow = std::pow(2.0, 1.0 / (q - 1.0));
  const double cpk = std::pow(in.c_P * in.c_K, qc);
  const double cv_qc = std::pow(in.c_V, qc);
  const double r = k0 + (cpk / (qc * eps_pow)) * (two_pow * std::pow(in.f_norm, qc) +
                                                  cv_qc * (two_pow + cv_qc) * in.cyl_measure);
  const double gronwall = std::exp(2.0 * in.c_V * in.horizon);
  const double kinetic_bound = r * gronwall;
  const double dissipation_bound = 2.0 * r * (1.0 + 2.0 * in.c_V * in.horizon * gronwall);
  return kinetic_bound + dissipation_bound;
}

EnergyCheckReport energy_check(const EnergyLedger& ledger, double dt, double c_bound) {
  EnergyCheckReport rep;
  rep.max_kinetic = ledger.max_kinetic();
  rep.diss_q = ledger.total_q_dissipation(dt);
  rep.diss_p = ledger.total_p_dissipation(dt);
  rep.lhs = rep.max_kinetic + rep.diss_q + rep.diss_p;
  rep.bound = c_bound;
  rep.passed = rep.lhs <= c_bound;
  return rep;
}

}  // namespace rheoshape
