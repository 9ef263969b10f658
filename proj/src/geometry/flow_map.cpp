#include "rheoshape/geometry/flow_map.hpp"

#include <cmath>
#include <sstream>

namespace rheoshape {

namespace {

struct State {
  Vec2 x;
  Mat2 jac;
};

State rhs(const VelocityFieldSpec& spec, double t, const State& s) {
  return {spec.value(t, s.x), spec.gradient(t, s.x) * s.jac};
}

State axpy(const State& a, double h, const State& b) {
  return {a.x + h * b.x, a.jac + h * b.jac};
}

void rk4_step(const VelocityFieldSpec& spec, double t, double h, State& s) {
  const State k1 = rhs(spec, t, s);
  const State k2 = rhs(spec, t + 0.5 * h, axpy(s, 0.5 * h, k1));
  const State k3 = rhs(spec, t + 0.5 * h, axpy(s, 0.5 * h, k2));
  const State k4 = rhs(spec, t + h, axpy(s, h, k3));
  s.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  s.jac += (h / 6.0) * (k1.jac + 2.0 * k2.jac + 2.0 * k3.jac + k4.jac);
}

}  // namespace

void FlowMap::advance(const VelocityFieldSpec& spec, double t_from, double t_to, double dt_ode,
                      Vec2& x, Mat2& jac) {
  const double span = t_to - t_from;
  if (span == 0.0) return;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / dt_ode)));
  const double h = span / n;
  State s{x, jac};
  for (int i = 0; i < n; ++i) rk4_step(spec, t_from + i * h, h, s);
  if (!s.x.allFinite() || !s.jac.allFinite())
    throw NumericalError("FlowMap: non-finite state during integration");
  x = s.x;
  jac = s.jac;
}

std::pair<Vec2, Mat2> FlowMap::evaluate(const VelocityFieldSpec& spec, double t, const Vec2& x,
                                        double dt_ode) {
  Vec2 p = x;
  Mat2 j = Mat2::Identity();
  advance(spec, 0.0, t, dt_ode, p, j);
  return {p, j};
}

std::pair<Vec2, Mat2> FlowMap::evaluate_inverse(const VelocityFieldSpec& spec, double t,
                                                const Vec2& y, double dt_ode) {
  Vec2 p = y;
  Mat2 j = Mat2::Identity();
  advance(spec, t, 0.0, dt_ode, p, j);
  return {p, j};
}

FlowMap::FlowMap(const VelocityFieldSpec& spec, std::vector<Vec2> points,
                 std::vector<double> times, double dt_ode, const HoldAll& hold_all)
    : spec_(&spec), initial_points_(std::move(points)), times_(std::move(times)), dt_ode_(dt_ode) {
  if (times_.empty() || times_.front() != 0.0)
    throw NumericalError("FlowMap: layer grid must start at t = 0");
  if (!(dt_ode_ > 0.0)) throw NumericalError("FlowMap: dt_ode must be positive");
  for (const Vec2& p : initial_points_)
    if (!hold_all.contains(p))
      throw NumericalError("FlowMap: initial point outside the hold-all box");

  const int np = point_count();
  positions_.assign(times_.size(), initial_points_);
  jacobians_.assign(times_.size(), std::vector<Mat2>(np, Mat2::Identity()));

  std::vector<State> state(np);
  for (int p = 0; p < np; ++p) state[p] = {initial_points_[p], Mat2::Identity()};
  for (std::size_t layer = 1; layer < times_.size(); ++layer) {
    for (int p = 0; p < np; ++p) {
      advance(spec, times_[layer - 1], times_[layer], dt_ode_, state[p].x, state[p].jac);
      if (!hold_all.contains(state[p].x)) {
        // Admissible fields vanish near the box, so an escaping trajectory
        // signals inconsistent inputs rather than physics.
        std::ostringstream msg;
        msg << "FlowMap: point " << p << " left the hold-all box at layer " << layer;
        throw NumericalError(msg.str());
      }
      positions_[layer][p] = state[p].x;
      jacobians_[layer][p] = state[p].jac;
    }
  }
}

double FlowMap::max_det_defect() const {
  double worst = 0.0;
  for (const auto& layer : jacobians_)
    for (const Mat2& j : layer) worst = std::max(worst, std::abs(j.determinant() - 1.0));
  return worst;
}

}  // namespace rheoshape
