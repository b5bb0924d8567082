#include "graspda/filter.hpp"

#include "graspda/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace graspda {
namespace {

using cplx = std::complex<double>;

// Analog Butterworth prototype poles, unit cutoff, left half plane.
std::vector<cplx> butter_prototype(int n) {
  std::vector<cplx> p;
  p.reserve(n);
  for (int m = -n + 1; m < n; m += 2) {
    p.push_back(-std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * n))));
  }
  return p;
}

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); }

struct Zpk {
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  double gain = 1.0;
};

Zpk bilinear(const Zpk& analog, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk d;
  cplx num(1.0, 0.0), den(1.0, 0.0);
  for (const auto& z : analog.zeros) {
    d.zeros.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : analog.poles) {
    d.poles.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  // Zeros at infinity land on Nyquist.
  for (std::size_t i = analog.zeros.size(); i < analog.poles.size(); ++i) d.zeros.emplace_back(-1.0, 0.0);
  d.gain = analog.gain * (num / den).real();
  return d;
}

// Pairs conjugate poles into biquads. Zeros are all real here (+1 or -1), and
// are handed out two per section in the given order.
SosFilter to_sos(const Zpk& d) {
  constexpr double tol = 1e-12;
  std::vector<cplx> complex_poles;
  std::vector<double> real_poles;
  for (const auto& p : d.poles) {
    if (std::abs(p.imag()) > tol) {
      if (p.imag() > 0) complex_poles.push_back(p);
    } else {
      real_poles.push_back(p.real());
    }
  }
  std::sort(complex_poles.begin(), complex_poles.end(),
            [](const cplx& a, const cplx& b) { return std::abs(a) < std::abs(b); });
  std::sort(real_poles.begin(), real_poles.end());

  std::vector<std::vector<double>> pole_groups;
  for (const auto& p : complex_poles) pole_groups.push_back({});
  for (std::size_t i = 0; i < real_poles.size(); i += 2) {
    std::vector<double> g{real_poles[i]};
    if (i + 1 < real_poles.size()) g.push_back(real_poles[i + 1]);
    pole_groups.push_back(g);
  }

  std::vector<double> zeros;
  for (const auto& z : d.zeros) zeros.push_back(z.real());

  SosFilter f;
  f.order = static_cast<int>(d.poles.size());
  std::size_t zi = 0;
  for (std::size_t s = 0; s < pole_groups.size(); ++s) {
    Biquad q;
    int n_poles = 2;
    if (s < complex_poles.size()) {
      const cplx p = complex_poles[s];
      q.a1 = -2.0 * p.real();
      q.a2 = std::norm(p);
    } else {
      const auto& g = pole_groups[s];
      n_poles = static_cast<int>(g.size());
      if (n_poles == 2) {
        q.a1 = -(g[0] + g[1]);
        q.a2 = g[0] * g[1];
      } else {
        q.a1 = -g[0];
        q.a2 = 0.0;
      }
    }
    if (n_poles == 2 && zi + 2 <= zeros.size()) {
      const double z1 = zeros[zi], z2 = zeros[zi + 1];
      zi += 2;
      q.b0 = 1.0;
      q.b1 = -(z1 + z2);
      q.b2 = z1 * z2;
    } else if (zi < zeros.size()) {
      q.b0 = 1.0;
      q.b1 = -zeros[zi++];
      q.b2 = 0.0;
    }
    f.sections.push_back(q);
  }
  if (f.sections.empty()) throw InvalidParameter("filter design produced no sections");
  f.sections.front().b0 *= d.gain;
  f.sections.front().b1 *= d.gain;
  f.sections.front().b2 *= d.gain;
  return f;
}

// Zero order: [+1, -1, +1, -1, ...] so that each band-pass section gets one
// zero at DC and one at Nyquist.
std::vector<cplx> interleave(std::vector<cplx> zeros) {
  std::vector<cplx> pos, neg;
  for (const auto& z : zeros) (z.real() > 0 ? pos : neg).push_back(z);
  std::vector<cplx> out;
  for (std::size_t i = 0; i < std::max(pos.size(), neg.size()); ++i) {
    if (i < pos.size()) out.push_back(pos[i]);
    if (i < neg.size()) out.push_back(neg[i]);
  }
  return out;
}

}  // namespace

double SosFilter::magnitude(double frequency_hz, double sample_rate_hz) const {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  const cplx q = std::exp(cplx(0.0, -w));
  cplx h(1.0, 0.0);
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * q + s.b2 * q * q) / (1.0 + s.a1 * q + s.a2 * q * q);
  }
  return std::abs(h);
}

SosFilter butterworth_bandpass(double low_hz, double high_hz, double fs, int order) {
  const double nyq = fs / 2.0;
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz <= nyq)) {
    throw InvalidParameter("band edges must satisfy 0 < low < high < Nyquist");
  }
  if (order < 2 || order % 2 != 0) throw InvalidParameter("band-pass order must be even and >= 2");
  if (high_hz == nyq) return butterworth_highpass(low_hz, fs, order / 2);

  const int n = order / 2;
  const double wl = prewarp(low_hz, fs);
  const double wh = prewarp(high_hz, fs);
  const double bw = wh - wl;
  const double w0 = std::sqrt(wl * wh);

  Zpk analog;
  for (const auto& p : butter_prototype(n)) {
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0 * w0);
    analog.poles.push_back(half + root);
    analog.poles.push_back(half - root);
  }
  analog.zeros.assign(n, cplx(0.0, 0.0));
  analog.gain = std::pow(bw, n);

  Zpk d = bilinear(analog, fs);
  d.zeros = interleave(d.zeros);
  return to_sos(d);
}

SosFilter butterworth_highpass(double cutoff_hz, double fs, int order) {
  if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0)) throw InvalidParameter("high-pass cutoff must lie in (0, Nyquist)");
  if (order < 1) throw InvalidParameter("high-pass order must be >= 1");
  const double wc = prewarp(cutoff_hz, fs);
  Zpk analog;
  cplx prod(1.0, 0.0);
  for (const auto& p : butter_prototype(order)) {
    analog.poles.push_back(wc / p);
    prod *= -p;
  }
  analog.zeros.assign(order, cplx(0.0, 0.0));
  analog.gain = (1.0 / prod).real();
  return to_sos(bilinear(analog, fs));
}

SosFilter iir_notch(double center_hz, double q, double fs) {
  if (!(center_hz > 0.0 && center_hz < fs / 2.0)) throw InvalidParameter("notch center must lie in (0, Nyquist)");
  if (!(q > 0.0)) throw InvalidParameter("notch quality factor must be positive");
  const double w0 = 2.0 * std::numbers::pi * center_hz / fs;
  const double beta = std::tan(w0 / q / 2.0);
  const double gain = 1.0 / (1.0 + beta);
  Biquad b;
  b.b0 = gain;
  b.b1 = -2.0 * gain * std::cos(w0);
  b.b2 = gain;
  b.a1 = -2.0 * gain * std::cos(w0);
  b.a2 = 2.0 * gain - 1.0;
  SosFilter f;
  f.sections.push_back(b);
  f.order = 2;
  return f;
}

namespace {

// Runs the cascade over columns of `x` (in place), vectorized across rows.
// Section states start at x0 * zi_s where zi_s is the unit-step steady state
// scaled by the DC gain of the preceding sections.
void run_cascade(const SosFilter& f, Eigen::MatrixXd& x) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  if (cols == 0) return;
  const Eigen::ArrayXd x0 = x.col(0).array();
  double upstream_gain = 1.0;
  Eigen::ArrayXd z1(rows), z2(rows), xin(rows), y(rows);
  for (const auto& s : f.sections) {
    const double dc_den = 1.0 + s.a1 + s.a2;
    const double g = std::abs(dc_den) > 1e-300 ? (s.b0 + s.b1 + s.b2) / dc_den : 0.0;
    const double zi1 = (s.b1 + s.b2) - (s.a1 + s.a2) * g;
    const double zi2 = s.b2 - s.a2 * g;
    z1 = x0 * (upstream_gain * zi1);
    z2 = x0 * (upstream_gain * zi2);
    for (Eigen::Index c = 0; c < cols; ++c) {
      xin = x.col(c).array();
      y = s.b0 * xin + z1;
      z1 = s.b1 * xin - s.a1 * y + z2;
      z2 = s.b2 * xin - s.a2 * y;
      x.col(c) = y.matrix();
    }
    upstream_gain *= g;
  }
}

}  // namespace

Eigen::MatrixXd filtfilt(const SosFilter& f, const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.cols();
  if (n == 0) return data;
  const Eigen::Index pad = std::min<Eigen::Index>(3 * std::max(f.order, 1), n - 1);
  Eigen::MatrixXd ext(data.rows(), n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext.col(i) = 2.0 * data.col(0) - data.col(pad - i);
    ext.col(pad + n + i) = 2.0 * data.col(n - 1) - data.col(n - 2 - i);
  }
  ext.middleCols(pad, n) = data;

  run_cascade(f, ext);
  ext.rowwise().reverseInPlace();
  run_cascade(f, ext);
  ext.rowwise().reverseInPlace();
  return ext.middleCols(pad, n);
}

}  // namespace graspda
