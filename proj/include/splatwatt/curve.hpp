// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "splatwatt/types.hpp"

namespace splatwatt {

/// Inverse Michaelis-Menten pair parameterizing one iso-quality curve on
/// normalized data:
///   display(rho) = 1 - V_d (1-rho) / (K_d + (1-rho))   (non-decreasing)
///   render(rho)  = 1 - V_r rho / (K_r + rho)           (non-increasing)
/// Both are convex on [0,1] for positive parameters.
struct MmParams {
  double v = 1.0;
  double k = 1.0;
};

enum class MmKind { Display, Render };

double mm_eval(double rho, const MmParams& p, MmKind kind);

struct MmFit {
  MmParams params;
  double sse = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton in log-parameters (positivity by construction) with
/// multi-start over a coarse (V, K) grid; converges when the step norm drops
/// below 1e-10 or after 200 iterations per start.
MmFit fit_mm(const std::vector<double>& rho, const std::vector<double>& y, MmKind kind);

/// Min-max normalization constants of one fitted curve. Fitting and the
/// closed-form minimization run in the normalized domain; predictions map
/// back to Watts through these.
struct CurveNormalization {
  double rho_min = 0.0, rho_max = 1.0;
  double display_min = 0.0, display_max = 1.0;
  double render_min = 0.0, render_max = 1.0;

  double norm_rho(double rho) const { return (rho - rho_min) / (rho_max - rho_min); }
  double denorm_rho(double t) const { return rho_min + t * (rho_max - rho_min); }
  double denorm_display(double t) const { return display_min + t * (display_max - display_min); }
  double denorm_render(double t) const { return render_min + t * (render_max - render_min); }
  double display_range() const { return display_max - display_min; }
  double render_range() const { return render_max - render_min; }
};

struct CurveDiagnostics {
  double mre_display = 0.0;  // mean |pred - y| / y on de-normalized Watts
  double mre_render = 0.0;
  double r2_display = 0.0;
  double r2_render = 0.0;
};

struct CurveSample {
  double rho = 0.0;
  double display_watts = 0.0;
  double rendering_watts = 0.0;
  double lambda_used = 0.0;
  double quality_achieved = 0.0;
  bool flagged = false;
};

struct IsoQualityCurve {
  MmParams display;  // V_d, K_d
  MmParams render;   // V_r, K_r
  CurveNormalization norm;
  CurveDiagnostics diagnostics;
  std::string quality_constraint;

  double display_norm(double rho_norm) const { return mm_eval(rho_norm, display, MmKind::Display); }
  double render_norm(double rho_norm) const { return mm_eval(rho_norm, render, MmKind::Render); }
  double display_watts(double rho) const { return norm.denorm_display(display_norm(norm.norm_rho(rho))); }
  double rendering_watts(double rho) const { return norm.denorm_render(render_norm(norm.norm_rho(rho))); }
  double total_watts(double rho) const { return display_watts(rho) + rendering_watts(rho); }
};

// Thrown on regression non-convergence; carries the best parameters found.
struct CurveFitError : ComputeError {
  CurveFitError(const std::string& what, MmFit best_display, MmFit best_render)
      : ComputeError(what), display(best_display), render(best_render) {}
  MmFit display, render;
};

/// Least-squares fit of both curves on min-max-normalized samples (>= 3
/// distinct rho values). Throws ComputeError on degenerate (zero-variance)
/// data and CurveFitError on non-convergence.
IsoQualityCurve fit_curve(const std::vector<CurveSample>& samples,
                          const std::string& quality_constraint = "");

struct PowerMinimum {
  double rho = 0.0;
  double display = 0.0;
  double rendering = 0.0;
  double total = 0.0;
};

/// Closed-form minimizer of display(rho) + render(rho): the stationary point
///   rho* = [sqrt(Vr Kr)(Kd + 1) - sqrt(Vd Kd) Kr] / [sqrt(Vd Kd) + sqrt(Vr Kr)]
/// clamped to [lo, hi] (the sum is convex, so clamping handles boundary
/// optima). Operates in the normalized domain.
PowerMinimum minimize_total_power(const MmParams& display, const MmParams& render,
                                  double lo = 0.0, double hi = 1.0);
PowerMinimum minimize_total_power(const IsoQualityCurve& curve, double lo = 0.0, double hi = 1.0);

/// Watt-domain minimizer: same stationary-point algebra with V_d, V_r scaled
/// by the de-normalization ranges. Bounds and the returned rho are raw.
PowerMinimum minimize_total_power_watts(const IsoQualityCurve& curve, double lo_raw,
                                        double hi_raw);

}  // namespace splatwatt
