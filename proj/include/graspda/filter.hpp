#pragma once

#include <Eigen/Dense>

#include <vector>

namespace graspda {

// Transposed direct-form II biquad, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Cascade of second-order sections.
struct SosFilter {
  std::vector<Biquad> sections;
  int order = 0;  // number of poles

  // |H(e^{jw})| at frequency_hz.
  double magnitude(double frequency_hz, double sample_rate_hz) const;
};

SosFilter butterworth_bandpass(double low_hz, double high_hz, double sample_rate_hz, int order);
SosFilter butterworth_highpass(double cutoff_hz, double sample_rate_hz, int order);
SosFilter iir_notch(double center_hz, double q, double sample_rate_hz);

// Forward-backward application along columns (time) of a channel-major
// matrix. Edges are extended by odd reflection of 3 x order samples and the
// sections start from their step-response steady state.
Eigen::MatrixXd filtfilt(const SosFilter& filter, const Eigen::MatrixXd& data);

}  // namespace graspda
