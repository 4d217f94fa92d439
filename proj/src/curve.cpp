// Copyright Contributors to the SplatWatt Project
// SPDX-License-Identifier: Apache-2.0
#include "splatwatt/curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace splatwatt {

namespace {

// Both curves share 1 - v*u/(k+u) with u = 1-rho (display) or u = rho (render).
double axis(double rho, MmKind kind) { return kind == MmKind::Display ? 1.0 - rho : rho; }

struct GnResult {
  double log_v, log_k;
  double sse;
  int iterations;
  bool converged;
};

double sse_at(const std::vector<double>& u, const std::vector<double>& y, double v, double k) {
  double sse = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = 1.0 - v * u[i] / (k + u[i]) - y[i];
    sse += r * r;
  }
  return sse;
}

GnResult gauss_newton(const std::vector<double>& u, const std::vector<double>& y, double v0,
                      double k0) {
  GnResult res{std::log(v0), std::log(k0), 0.0, 0, false};
  double mu = 1e-3;  // damping
  res.sse = sse_at(u, y, v0, k0);

  // Termination: step norm below 1e-10, no damping level improving the fit,
  // or the 200-iteration budget. All three leave a usable local optimum; the
  // caller treats only non-finite results as failure.
  for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
    const double v = std::exp(res.log_v), k = std::exp(res.log_k);
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double den = k + u[i];
      const double f = 1.0 - v * u[i] / den;
      const double r = f - y[i];
      // Derivatives w.r.t. log v and log k.
      const Eigen::Vector2d j(-u[i] / den * v, v * u[i] / (den * den) * k);
      jtj += j * j.transpose();
      jtr += j * r;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::Matrix2d damped = jtj;
      damped(0, 0) += mu * (1.0 + jtj(0, 0));
      damped(1, 1) += mu * (1.0 + jtj(1, 1));
      const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        mu *= 4.0;
        continue;
      }
      // Keep log-parameters bounded so extreme knee shapes cannot overflow.
      const double lv = std::clamp(res.log_v + step[0], -30.0, 30.0);
      const double lk = std::clamp(res.log_k + step[1], -30.0, 30.0);
      const double trial = sse_at(u, y, std::exp(lv), std::exp(lk));
      if (trial <= res.sse) {
        res.log_v = lv;
        res.log_k = lk;
        res.sse = trial;
        mu = std::max(1e-12, mu * 0.3);
        stepped = true;
        if (step.norm() < 1e-10) res.converged = true;
        break;
      }
      mu *= 4.0;
    }
    if (!stepped) {
      res.converged = true;  // local minimum to working precision
      break;
    }
    if (res.converged) break;
  }
  if (res.iterations >= 200) res.converged = true;  // budget is a valid stop
  if (!std::isfinite(res.sse) || !std::isfinite(res.log_v) || !std::isfinite(res.log_k))
    res.converged = false;
  return res;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double mm_eval(double rho, const MmParams& p, MmKind kind) {
  const double u = axis(rho, kind);
  return 1.0 - p.v * u / (p.k + u);
}

MmFit fit_mm(const std::vector<double>& rho, const std::vector<double>& y, MmKind kind) {
  if (rho.size() != y.size() || rho.size() < 3)
    throw ComputeError("fit_mm: need at least 3 samples");

  std::vector<double> u(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) u[i] = axis(rho[i], kind);

  static const double v_grid[] = {0.3, 0.6, 1.0, 1.5, 2.5};
  static const double k_grid[] = {0.05, 0.15, 0.4, 1.0, 3.0};

  MmFit best;
  best.sse = std::numeric_limits<double>::infinity();
  for (double v0 : v_grid) {
    for (double k0 : k_grid) {
      const GnResult r = gauss_newton(u, y, v0, k0);
      if (r.sse < best.sse) {
        best.params = {std::exp(r.log_v), std::exp(r.log_k)};
        best.sse = r.sse;
        best.iterations = r.iterations;
        best.converged = r.converged;
      }
    }
  }
  return best;
}

IsoQualityCurve fit_curve(const std::vector<CurveSample>& samples,
                          const std::string& quality_constraint) {
  if (samples.size() < 3) throw ComputeError("fit_curve: need at least 3 samples");
  std::set<double> distinct;
  for (const CurveSample& s : samples) distinct.insert(s.rho);
  if (distinct.size() < 3) throw ComputeError("fit_curve: need at least 3 distinct rho values");

  IsoQualityCurve curve;
  curve.quality_constraint = quality_constraint;
  CurveNormalization& n = curve.norm;
  n.rho_min = n.display_min = n.render_min = std::numeric_limits<double>::infinity();
  n.rho_max = n.display_max = n.render_max = -std::numeric_limits<double>::infinity();
  for (const CurveSample& s : samples) {
    n.rho_min = std::min(n.rho_min, s.rho);
    n.rho_max = std::max(n.rho_max, s.rho);
    n.display_min = std::min(n.display_min, s.display_watts);
    n.display_max = std::max(n.display_max, s.display_watts);
    n.render_min = std::min(n.render_min, s.rendering_watts);
    n.render_max = std::max(n.render_max, s.rendering_watts);
  }
  if (!(n.rho_max > n.rho_min))
    throw ComputeError("fit_curve: degenerate samples (constant rho)");
  if (!(n.display_max > n.display_min) || !(n.render_max > n.render_min))
    throw ComputeError("fit_curve: degenerate samples (zero-variance power)");

  std::vector<double> rho_n, d_n, r_n;
  for (const CurveSample& s : samples) {
    rho_n.push_back(n.norm_rho(s.rho));
    d_n.push_back((s.display_watts - n.display_min) / n.display_range());
    r_n.push_back((s.rendering_watts - n.render_min) / n.render_range());
  }

  const MmFit fd = fit_mm(rho_n, d_n, MmKind::Display);
  const MmFit fr = fit_mm(rho_n, r_n, MmKind::Render);
  if (!fd.converged || !fr.converged)
    throw CurveFitError("fit_curve: regression did not converge", fd, fr);
  curve.display = fd.params;
  curve.render = fr.params;

  // Diagnostics on de-normalized Watts.
  double mre_d = 0.0, mre_r = 0.0, ssr_d = 0.0, ssr_r = 0.0, sst_d = 0.0, sst_r = 0.0;
  std::vector<double> dw, rw;
  for (const CurveSample& s : samples) {
    dw.push_back(s.display_watts);
    rw.push_back(s.rendering_watts);
  }
  const double dmean = mean(dw), rmean = mean(rw);
  for (const CurveSample& s : samples) {
    const double pd = curve.display_watts(s.rho);
    const double pr = curve.rendering_watts(s.rho);
    mre_d += std::abs(pd - s.display_watts) / std::max(std::abs(s.display_watts), 1e-300);
    mre_r += std::abs(pr - s.rendering_watts) / std::max(std::abs(s.rendering_watts), 1e-300);
    ssr_d += (pd - s.display_watts) * (pd - s.display_watts);
    ssr_r += (pr - s.rendering_watts) * (pr - s.rendering_watts);
    sst_d += (s.display_watts - dmean) * (s.display_watts - dmean);
    sst_r += (s.rendering_watts - rmean) * (s.rendering_watts - rmean);
  }
  const double count = static_cast<double>(samples.size());
  curve.diagnostics.mre_display = mre_d / count;
  curve.diagnostics.mre_render = mre_r / count;
  curve.diagnostics.r2_display = 1.0 - ssr_d / sst_d;
  curve.diagnostics.r2_render = 1.0 - ssr_r / sst_r;
  return curve;
}

namespace {

PowerMinimum minimize_scaled(const MmParams& d, const MmParams& r, double d_scale, double r_scale,
                             double lo, double hi) {
  if (!(lo <= hi)) throw ComputeError("minimize_total_power: invalid bounds");
  const double sd = std::sqrt(d.v * d_scale * d.k);
  const double sr = std::sqrt(r.v * r_scale * r.k);
  double rho = (sr * (d.k + 1.0) - sd * r.k) / (sd + sr);
  rho = std::clamp(rho, lo, hi);

  PowerMinimum out;
  out.rho = rho;
  out.display = mm_eval(rho, d, MmKind::Display);
  out.rendering = mm_eval(rho, r, MmKind::Render);
  out.total = out.display + out.rendering;
  return out;
}

}  // namespace

PowerMinimum minimize_total_power(const MmParams& display, const MmParams& render, double lo,
                                  double hi) {
  if (!(display.v > 0 && display.k > 0 && render.v > 0 && render.k > 0))
    throw ComputeError("minimize_total_power: parameters must be positive");
  return minimize_scaled(display, render, 1.0, 1.0, lo, hi);
}

PowerMinimum minimize_total_power(const IsoQualityCurve& curve, double lo, double hi) {
  return minimize_total_power(curve.display, curve.render, lo, hi);
}

PowerMinimum minimize_total_power_watts(const IsoQualityCurve& curve, double lo_raw,
                                        double hi_raw) {
  const CurveNormalization& n = curve.norm;
  PowerMinimum m = minimize_scaled(curve.display, curve.render, n.display_range(),
                                   n.render_range(), n.norm_rho(lo_raw), n.norm_rho(hi_raw));
  PowerMinimum out;
  out.rho = n.denorm_rho(m.rho);
  out.display = n.denorm_display(m.display);
  out.rendering = n.denorm_render(m.rendering);
  out.total = out.display + out.rendering;
  return out;
}

}  // namespace splatwatt
