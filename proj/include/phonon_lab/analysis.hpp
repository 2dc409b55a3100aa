#pragma once

// Inverse pipeline: Lorentzian fits, linewidth-vs-power regression and the
// two phonon-occupation estimators.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phonon_lab/dynamics.hpp"
#include "phonon_lab/errors.hpp"
#include "phonon_lab/spectrum_trace.hpp"
#include "phonon_lab/units.hpp"

namespace phonon_lab::analysis {

enum class Orientation { dip, peak };

struct FitUncertainties {
  double center = 0.0;
  double fwhm = 0.0;
  double area = 0.0;
  double peak_height = 0.0;
  double background = 0.0;
};

/// Lorentzian + constant background. For a dip the Lorentzian is subtracted,
/// so area and peak_height are positive for a well-formed feature of either
/// orientation.
struct FitResult {
  hertz center = 0.0;
  hertz fwhm = 0.0;
  double area = 0.0;
  double peak_height = 0.0;
  double background = 0.0;
  FitUncertainties uncertainties;
  double residual_norm = 0.0;  // rms residual
  int iterations = 0;
  // Covariance of (center, fwhm, area, background).
  std::array<std::array<double, 4>, 4> covariance{};
};

struct FitOptions {
  int max_iterations = 200;
  double prominence_sigmas = 3.0;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Residual spread of one edge after removing its least-squares line, as
// scaled median absolute deviation.
inline std::vector<double> detrended(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  const double slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  const double icpt = (sy - slope * sx) / n;
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[i] - (icpt + slope * x[i]);
  return r;
}

inline double lorentz_profile(double x, double center, double fwhm) {
  const double hw2 = 0.25 * fwhm * fwhm;
  const double dx = x - center;
  return hw2 / (dx * dx + hw2);
}

}  // namespace detail

/// Damped least-squares (Levenberg-Marquardt) fit of a Lorentzian on a
/// constant background, parameterized by (center, FWHM, area, background).
inline FitResult fit_lorentzian(const SpectrumTrace& trace, Orientation orientation, const FitOptions& opt = {}) {
  validate(trace);
  const auto& x = trace.detunings;
  const auto& y = trace.values;
  const std::size_t n = x.size();
  require(n >= 7, Errc::insufficient_data, "Lorentzian fit needs at least 7 points");
  const double sign = orientation == Orientation::peak ? 1.0 : -1.0;

  // Edge statistics: background level and noise floor.
  const std::size_t edge = std::max<std::size_t>(3, n / 10);
  std::vector<double> edge_vals, lx, ly, rx, ry;
  for (std::size_t i = 0; i < edge; ++i) {
    edge_vals.push_back(y[i]);
    edge_vals.push_back(y[n - 1 - i]);
    lx.push_back(x[i]); ly.push_back(y[i]);
    rx.push_back(x[n - 1 - i]); ry.push_back(y[n - 1 - i]);
  }
  const double background0 = detail::median(edge_vals);
  auto resid = detail::detrended(lx, ly);
  const auto resid_r = detail::detrended(rx, ry);
  resid.insert(resid.end(), resid_r.begin(), resid_r.end());
  const double resid_median = detail::median(resid);
  for (auto& r : resid) r = std::abs(r - resid_median);
  const double sigma = 1.4826 * detail::median(resid);

  // Extremum located on a 3-point running mean, so isolated noise spikes do
  // not pass the prominence test.
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = std::min(n - 1, i + 1);
    double s = 0.0;
    for (std::size_t k = a; k <= b; ++k) s += y[k];
    smooth[i] = s / static_cast<double>(b - a + 1);
  }
  std::size_t ext = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sign * (smooth[i] - smooth[ext]) > 0.0) ext = i;
  }
  if (ext < edge || ext >= n - edge) fail(Errc::no_peak_found, "extremum lies in the background window");
  const double prominence = sign * (smooth[ext] - background0);
  if (!(prominence > 0.0) || prominence < opt.prominence_sigmas * sigma) {
    fail(Errc::no_peak_found, "feature prominence below " + std::to_string(opt.prominence_sigmas) +
                                  " sigma of the edge noise");
  }

  // Half-prominence crossing on each side.
  const double half = background0 + sign * 0.5 * prominence;
  auto crossing = [&](int dir) -> double {
    for (std::size_t i = ext;;) {
      const std::size_t j = dir > 0 ? i + 1 : i - 1;
      if ((dir > 0 && i + 1 >= n) || (dir < 0 && i == 0)) return x[i];
      if (sign * (smooth[j] - half) <= 0.0) {
        const double t = (smooth[i] - half) / (smooth[i] - smooth[j]);
        return x[i] + t * (x[j] - x[i]);
      }
      i = j;
    }
  };
  double fwhm0 = crossing(+1) - crossing(-1);
  const double span = x.back() - x.front();
  if (!(fwhm0 > 0.0)) fwhm0 = 0.25 * span;

  // theta = (center, fwhm, area, background)
  Eigen::Vector4d theta(x[ext], fwhm0, prominence * constants::pi * fwhm0 / 2.0, background0);

  auto residuals = [&](const Eigen::Vector4d& t, Eigen::VectorXd& r) {
    const double h = 2.0 * t[2] / (constants::pi * t[1]);
    for (std::size_t i = 0; i < n; ++i) {
      r[static_cast<Eigen::Index>(i)] = y[i] - (t[3] + sign * h * detail::lorentz_profile(x[i], t[0], t[1]));
    }
    return r.squaredNorm();
  };
  auto jacobian = [&](const Eigen::Vector4d& t, Eigen::MatrixXd& J) {
    const double c = t[0], w = t[1], a = t[2];
    const double hw2 = 0.25 * w * w;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = x[i] - c;
      const double den = dx * dx + hw2;
      // model = B + s (a w / (2 pi)) / den
      const double k = sign * a * w / (2.0 * constants::pi);
      const auto row = static_cast<Eigen::Index>(i);
      J(row, 0) = k * 2.0 * dx / (den * den);
      J(row, 1) = sign * a / (2.0 * constants::pi) / den - k * 0.5 * w / (den * den);
      J(row, 2) = sign * w / (2.0 * constants::pi) / den;
      J(row, 3) = 1.0;
    }
  };

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::VectorXd r(rows), r_try(rows);
  Eigen::MatrixXd J(rows, 4);
  double cost = residuals(theta, r);
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  for (; iter < opt.max_iterations; ++iter) {
    jacobian(theta, J);
    const Eigen::Matrix4d jtj = J.transpose() * J;
    const Eigen::Vector4d grad = J.transpose() * r;
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix4d damped = jtj;
      for (int k = 0; k < 4; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-300);
      const Eigen::Vector4d step = damped.ldlt().solve(grad);
      const Eigen::Vector4d trial = theta + step;
      const double trial_cost = trial[1] > 0.0 ? residuals(trial, r_try) : std::numeric_limits<double>::infinity();
      if (trial_cost <= cost) {
        const double rel_step = std::max({std::abs(step[0]) / theta[1], std::abs(step[1]) / theta[1],
                                          std::abs(step[2]) / std::max(std::abs(theta[2]), 1e-300),
                                          std::abs(step[3]) / std::max(std::abs(theta[2]) / theta[1], std::abs(theta[3]) + 1e-300)});
        const bool tiny = rel_step < 1e-14 || cost - trial_cost <= 1e-15 * cost;
        theta = trial;
        r.swap(r_try);
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (tiny) converged = true;
      } else {
        lambda *= 10.0;
        if (lambda > 1e16) {
          // No descent direction left at working precision: at the minimum.
          accepted = true;
          converged = true;
        }
      }
    }
    if (converged) break;
  }
  if (!converged) fail(Errc::no_convergence, "Levenberg-Marquardt hit the iteration cap");

  FitResult fit;
  fit.center = theta[0];
  fit.fwhm = theta[1];
  fit.area = theta[2];
  fit.background = theta[3];
  fit.peak_height = 2.0 * fit.area / (constants::pi * fit.fwhm);
  fit.iterations = iter + 1;
  fit.residual_norm = std::sqrt(cost / static_cast<double>(n));

  jacobian(theta, J);
  const Eigen::Matrix4d jtj = J.transpose() * J;
  const double dof = static_cast<double>(n) - 4.0;
  Eigen::Matrix4d cov = jtj.ldlt().solve(Eigen::Matrix4d::Identity()) * (cost / dof);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) fit.covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cov(i, j);
  auto sd = [](double v) { return std::sqrt(std::max(v, 0.0)); };
  fit.uncertainties.center = sd(cov(0, 0));
  fit.uncertainties.fwhm = sd(cov(1, 1));
  fit.uncertainties.area = sd(cov(2, 2));
  fit.uncertainties.background = sd(cov(3, 3));
  // height = 2 area / (pi fwhm)
  const Eigen::Vector4d dh(0.0, -fit.peak_height / fit.fwhm, fit.peak_height / fit.area, 0.0);
  fit.uncertainties.peak_height = sd(dh.dot(cov * dh));
  return fit;
}

struct LinewidthPoint {
  watts power = 0.0;
  hertz linewidth = 0.0;
  hertz sigma = 0.0;  // one-sigma; <= 0 when unknown
};

struct RegressionResult {
  hertz gamma0 = 0.0;
  watts power_at_unity_c = 0.0;
  double slope = 0.0;  // Hz / W
  hertz gamma0_sigma = 0.0;
  watts power_sigma = 0.0;
  double slope_sigma = 0.0;
  double covariance_intercept_slope = 0.0;
  std::size_t points = 0;
  bool weighted = false;

  double cooperativity(watts p) const { return p / power_at_unity_c; }
};

/// Single linear fit Gamma(P) = Gamma0 (1 + P / P1) over OMIT points at +P and
/// OMIA points reflected to -P. Inverse-variance weights when every point
/// carries an uncertainty (floored at 1 ppm of its linewidth), unweighted otherwise.
inline RegressionResult fit_linewidth_vs_power(const std::vector<LinewidthPoint>& omit_points,
                                               const std::vector<LinewidthPoint>& omia_points) {
  struct Row { double x, y, s; };
  std::vector<Row> rows;
  for (const auto& p : omit_points) rows.push_back({p.power, p.linewidth, p.sigma});
  for (const auto& p : omia_points) rows.push_back({-p.power, p.linewidth, p.sigma});
  require(rows.size() >= 2, Errc::insufficient_data, "regression needs at least two points");
  std::vector<double> xs;
  for (const auto& r : rows) xs.push_back(r.x);
  std::sort(xs.begin(), xs.end());
  require(std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) != xs.end(),
          Errc::insufficient_data, "regression needs at least two distinct powers");

  const bool weighted = std::all_of(rows.begin(), rows.end(), [](const Row& r) {
    return r.s > 0.0 && std::isfinite(r.s);
  });
  std::vector<double> w(rows.size(), 1.0);
  if (weighted) {
    double w_max = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double s = std::max(rows[i].s, 1e-6 * std::abs(rows[i].y));
      w[i] = 1.0 / (s * s);
      w_max = std::max(w_max, w[i]);
    }
    for (auto& wi : w) wi /= w_max;
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sw += w[i]; sx += w[i] * rows[i].x; sy += w[i] * rows[i].y;
    sxx += w[i] * rows[i].x * rows[i].x; sxy += w[i] * rows[i].x * rows[i].y;
  }
  // Center x for conditioning.
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx_c = 0, sxy_c = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double dx = rows[i].x - xm;
    sxx_c += w[i] * dx * dx;
    sxy_c += w[i] * dx * (rows[i].y - ym);
  }
  const double slope = sxy_c / sxx_c;
  const double icpt = ym - slope * xm;
  if (!(slope > 0.0)) fail(Errc::negative_slope, "linewidth does not increase with pump power");

  double chi2 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double res = rows[i].y - (icpt + slope * rows[i].x);
    chi2 += w[i] * res * res;
  }
  const double dof = static_cast<double>(rows.size()) - 2.0;
  // Weights are relative after normalization, so the residual scatter sets
  // the absolute scale whenever it can be estimated.
  const double scale = dof > 0.0 ? chi2 / dof : 0.0;
  const double var_slope = scale / sxx_c;
  const double var_icpt = scale * (1.0 / sw + xm * xm / sxx_c);
  const double cov_is = -scale * xm / sxx_c;

  RegressionResult out;
  out.gamma0 = icpt;
  out.slope = slope;
  out.power_at_unity_c = icpt / slope;
  out.gamma0_sigma = std::sqrt(std::max(var_icpt, 0.0));
  out.slope_sigma = std::sqrt(std::max(var_slope, 0.0));
  out.covariance_intercept_slope = cov_is;
  // P1 = a / b
  const double da = 1.0 / slope;
  const double db = -icpt / (slope * slope);
  out.power_sigma = std::sqrt(std::max(da * da * var_icpt + db * db * var_slope + 2.0 * da * db * cov_is, 0.0));
  out.points = rows.size();
  out.weighted = weighted;
  return out;
}

/// g0 = sqrt(Gamma0 kappa / (4 n_c)) at the photon number giving C = 1.
inline hertz extract_g0(hertz gamma0, hertz kappa, double n_c_at_unity) {
  require(gamma0 > 0.0 && kappa > 0.0 && n_c_at_unity > 0.0, Errc::invalid_argument,
          "extract_g0 needs positive inputs");
  return std::sqrt(gamma0 * kappa / (4.0 * n_c_at_unity));
}

inline double occupation_from_linewidth(hertz gamma0, hertz gamma_plus, double n_th) {
  require(gamma0 > 0.0, Errc::invalid_argument, "gamma0 must be positive");
  if (gamma_plus < gamma0) fail(Errc::unphysical_linewidth, "cooled linewidth below intrinsic linewidth");
  return n_th * gamma0 / gamma_plus;
}

/// n_th V Gamma+ / (4 C Gamma0), V the peak brightness normalized at C = 1.
inline double occupation_from_area(double v_norm, hertz gamma_plus, double c_of_p, hertz gamma0, double n_th) {
  require(v_norm >= 0.0 && gamma_plus > 0.0 && c_of_p > 0.0 && gamma0 > 0.0 && n_th >= 0.0,
          Errc::invalid_argument, "occupation_from_area needs positive inputs");
  return n_th * v_norm * gamma_plus / (4.0 * c_of_p * gamma0);
}

/// Linear map from transmitted power to cooperativity, C = P / P1.
struct CooperativityModel {
  double per_watt = 0.0;

  double operator()(watts p) const { return per_watt * p; }
  static CooperativityModel from(const RegressionResult& r) { return {1.0 / r.power_at_unity_c}; }
};

/// Peak heights rescaled so the height interpolated to C = 1 equals 1. The
/// interpolant is a least-squares quadratic in C through the (up to) three
/// fits nearest C = 1.
inline std::vector<std::pair<watts, double>> normalized_brightness(
    const std::vector<std::pair<watts, FitResult>>& fits, const CooperativityModel& c_model) {
  require(!fits.empty(), Errc::insufficient_data, "no fits to normalize");
  require(c_model.per_watt > 0.0, Errc::invalid_argument, "cooperativity model must be invertible");

  std::vector<std::pair<double, double>> ch;  // (C, height)
  for (const auto& [p, f] : fits) ch.emplace_back(c_model(p), f.peak_height);
  double c_min = ch.front().first, c_max = ch.front().first;
  for (const auto& [c, h] : ch) { c_min = std::min(c_min, c); c_max = std::max(c_max, c); }
  const double data_span = c_max - c_min;
  const double distance = 1.0 < c_min ? c_min - 1.0 : (1.0 > c_max ? 1.0 - c_max : 0.0);
  if (distance > 0.0 && distance > 2.0 * data_span) {
    fail(Errc::insufficient_data, "C = 1 lies too far outside the measured cooperativity range");
  }

  auto nearest = ch;
  std::sort(nearest.begin(), nearest.end(), [](const auto& a, const auto& b) {
    return std::abs(a.first - 1.0) < std::abs(b.first - 1.0);
  });
  nearest.resize(std::min<std::size_t>(3, nearest.size()));
  double h1 = 0.0;
  if (nearest.size() == 1) {
    require(nearest[0].first == 1.0, Errc::insufficient_data, "single fit not at C = 1");
    h1 = nearest[0].second;
  } else {
    const auto degree = static_cast<Eigen::Index>(nearest.size() - 1);
    Eigen::MatrixXd A(static_cast<Eigen::Index>(nearest.size()), degree + 1);
    Eigen::VectorXd b(static_cast<Eigen::Index>(nearest.size()));
    for (std::size_t i = 0; i < nearest.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      const double u = nearest[i].first - 1.0;
      for (Eigen::Index k = 0; k <= degree; ++k) A(row, k) = std::pow(u, static_cast<double>(k));
      b(row) = nearest[i].second;
    }
    const Eigen::VectorXd coeff = A.colPivHouseholderQr().solve(b);
    h1 = coeff(0);
  }
  require(h1 > 0.0, Errc::insufficient_data, "interpolated brightness at C = 1 is not positive");

  std::vector<std::pair<watts, double>> out;
  out.reserve(fits.size());
  for (const auto& [p, f] : fits) out.emplace_back(p, f.peak_height / h1);
  return out;
}

struct CoolingPoint {
  watts transmitted_power = 0.0;
  double cooperativity = 0.0;
  hertz linewidth = 0.0;
  hertz linewidth_sigma = 0.0;
  double area = 0.0;
  double area_sigma = 0.0;
  double occupation_from_linewidth = 0.0;
  double occupation_from_linewidth_sigma = 0.0;
  double occupation_from_area = 0.0;
  double occupation_from_area_sigma = 0.0;
  double normalized_brightness = 0.0;
  double normalized_area = 0.0;  // area / fitted asymptote, compare with C/(1+C)
  bool ok = false;
  std::string error;
};

/// Least-squares asymptote A of area(C) = A C / (1 + C).
inline double area_asymptote(const std::vector<CoolingPoint>& table) {
  double num = 0.0, den = 0.0;
  for (const auto& pt : table) {
    if (!pt.ok) continue;
    const double s = pt.cooperativity / (1.0 + pt.cooperativity);
    num += pt.area * s;
    den += s * s;
  }
  require(den > 0.0, Errc::insufficient_data, "no usable points for the area asymptote");
  return num / den;
}

/// Per-trace fit, both occupation estimators and normalized brightness.
/// A failed fit marks its row and the table continues.
inline std::vector<CoolingPoint> build_cooling_table(const std::vector<SpectrumTrace>& traces,
                                                     const dynamics::SystemParams& params,
                                                     const RegressionResult& regression,
                                                     const FitOptions& fit_options = {}) {
  std::vector<CoolingPoint> table;
  if (traces.empty()) return table;
  for (const auto& t : traces) {
    require(t.kind == TraceKind::spontaneous_psd, Errc::invalid_argument,
            "cooling table needs spontaneous PSD traces");
  }
  const auto c_model = CooperativityModel::from(regression);
  const double gamma0 = regression.gamma0;
  const double rel_c = regression.power_sigma / regression.power_at_unity_c;
  const double rel_g0 = regression.gamma0_sigma / gamma0;

  std::vector<std::pair<watts, FitResult>> fits;
  std::vector<std::size_t> fit_rows;
  table.resize(traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto& pt = table[i];
    pt.transmitted_power = traces[i].metadata.transmitted_power;
    pt.cooperativity = c_model(pt.transmitted_power);
    try {
      const auto fit = fit_lorentzian(traces[i], Orientation::peak, fit_options);
      pt.linewidth = fit.fwhm;
      pt.linewidth_sigma = fit.uncertainties.fwhm;
      pt.area = fit.area;
      pt.area_sigma = fit.uncertainties.area;
      fits.emplace_back(pt.transmitted_power, fit);
      fit_rows.push_back(i);
      pt.ok = true;
    } catch (const PhysicsError& e) {
      pt.error = e.what();
    }
  }
  if (fits.empty()) return table;

  std::vector<std::pair<watts, double>> brightness;
  try {
    brightness = normalized_brightness(fits, c_model);
  } catch (const PhysicsError& e) {
    for (auto i : fit_rows) { table[i].ok = false; table[i].error = e.what(); }
    return table;
  }
  for (std::size_t k = 0; k < fit_rows.size(); ++k) {
    auto& pt = table[fit_rows[k]];
    pt.normalized_brightness = brightness[k].second;
    try {
      pt.occupation_from_linewidth = occupation_from_linewidth(gamma0, pt.linewidth, params.n_th);
      const double rel_w = pt.linewidth_sigma / pt.linewidth;
      pt.occupation_from_linewidth_sigma = pt.occupation_from_linewidth * std::hypot(rel_w, rel_g0);
      pt.occupation_from_area =
          occupation_from_area(pt.normalized_brightness, pt.linewidth, pt.cooperativity, gamma0, params.n_th);
      // V Gamma+ is proportional to the fitted area, so the area's own
      // uncertainty carries the height-width correlation.
      const double rel_a = pt.area_sigma / pt.area;
      pt.occupation_from_area_sigma = pt.occupation_from_area * std::sqrt(rel_a * rel_a + rel_c * rel_c + rel_g0 * rel_g0);
    } catch (const PhysicsError& e) {
      pt.ok = false;
      pt.error = e.what();
    }
  }
  const double asym = area_asymptote(table);
  for (auto& pt : table) {
    if (pt.ok) pt.normalized_area = pt.area / asym;
  }
  return table;
}

}  // namespace phonon_lab::analysis
