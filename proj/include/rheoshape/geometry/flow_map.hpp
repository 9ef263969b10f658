#pragma once

#include <vector>

#include "rheoshape/geometry/velocity_field.hpp"

namespace rheoshape {

/// Uniform layer grid t_0 ... t_N on [0, T].
struct TimeGrid {
  double t_begin = 0.0;
  double t_end = 1.0;
  int layers = 2;  // number of grid points, N+1

  double time(int i) const { return t_begin + (t_end - t_begin) * i / (layers - 1); }
  double dt() const { return (t_end - t_begin) / (layers - 1); }
  int intervals() const { return layers - 1; }
};

/// Trajectories and Jacobians of the driving-field flow, sampled on a layer
/// grid for a fixed point set. Classical 4th-order one-step integration with
/// a fixed substep; the variational equation d/dt grad(phi) = grad(V) grad(phi)
/// is advanced with the same scheme, so det(grad phi) stays near 1 for
/// solenoidal fields to integrator accuracy.
class FlowMap {
public:
  FlowMap(const VelocityFieldSpec& spec, std::vector<Vec2> points, std::vector<double> times,
          double dt_ode, const HoldAll& hold_all);

  int layer_count() const { return static_cast<int>(times_.size()); }
  int point_count() const { return static_cast<int>(initial_points_.size()); }
  double layer_time(int i) const { return times_[i]; }
  const std::vector<double>& times() const { return times_; }

  const Vec2& position(int layer, int point) const { return positions_[layer][point]; }
  const Mat2& jacobian(int layer, int point) const { return jacobians_[layer][point]; }
  const std::vector<Vec2>& layer_positions(int layer) const { return positions_[layer]; }
  const std::vector<Vec2>& initial_points() const { return initial_points_; }

  double dt_ode() const { return dt_ode_; }
  const VelocityFieldSpec& field() const { return *spec_; }

  /// Worst deviation of det(grad phi) from 1 over all stored samples.
  double max_det_defect() const;

  /// Advance a single (position, Jacobian) state from t_from to t_to with the
  /// same one-step scheme and substep policy. t_to < t_from integrates the
  /// reversed flow, which evaluates the inverse map.
  static void advance(const VelocityFieldSpec& spec, double t_from, double t_to, double dt_ode,
                      Vec2& x, Mat2& jac);

  /// phi(t, x) together with grad phi(t, x), integrated on demand from t = 0.
  static std::pair<Vec2, Mat2> evaluate(const VelocityFieldSpec& spec, double t, const Vec2& x,
                                        double dt_ode);

  /// phi^{-1}(t, y) together with grad(phi^{-1})(t, y).
  static std::pair<Vec2, Mat2> evaluate_inverse(const VelocityFieldSpec& spec, double t,
                                                const Vec2& y, double dt_ode);

private:
  const VelocityFieldSpec* spec_;
  std::vector<Vec2> initial_points_;
  std::vector<double> times_;
  double dt_ode_;
  std::vector<std::vector<Vec2>> positions_;
  std::vector<std::vector<Mat2>> jacobians_;
};

}  // namespace rheoshape
