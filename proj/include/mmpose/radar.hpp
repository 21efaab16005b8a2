// Copyright 2026, mmpose authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * \file radar.hpp
 * \brief FMCW chirp model and the range / Doppler / angle processing chain
 *        that turns TDM-MIMO baseband samples into a point cloud.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace mmpose::radar {

using cplx = std::complex<double>;

/// Waveform and antenna geometry for one radar module.
struct ChirpConfig {
  double f0 = 79e9;         ///< chirp start frequency (Hz)
  double bw = 3.072e9;      ///< sweep bandwidth (Hz)
  double t_chirp = 92e-6;   ///< chirp duration (s)
  int n_chirps = 128;       ///< chirps per coherent processing interval
  double fs = 5e6;          ///< complex fast-time sample rate (Hz)
  int n_rx = 4;
  int n_tx = 2;
  double d_rx = 0.0;        ///< receive element spacing (m)
  double d_tx = 0.0;        ///< transmit element spacing (m)
  double c = 3e8;           ///< propagation speed (m/s)

  double wavelength() const { return c / f0; }
  double chirp_rate() const { return bw / t_chirp; }
  double cpi() const { return n_chirps * t_chirp; }
  int virtual_channels() const { return n_tx * n_rx; }
  int samples_per_chirp() const;
  /// Range whose beat frequency equals the sample rate.
  double unambiguous_range() const;

  /// Throws DomainError when a field violates the waveform invariants.
  void validate() const;
};

/// AWR1642-like module: 3.072 GHz sweep from 79 GHz every 92 us, 2 TX x 4 RX
/// with half-wavelength receive spacing and a contiguous 8-element virtual
/// array.
ChirpConfig default_chirp();

struct PointTarget {
  double r0 = 1.0;     ///< initial range (m)
  double v = 0.0;      ///< radial velocity (m/s), positive = approaching
  double theta = 0.0;  ///< angle of arrival (rad)
  double rcs = 0.0;    ///< radar cross section (dBsm)
};

/// Complex baseband samples indexed [virtual channel][chirp][fast-time].
class RadarCube {
 public:
  RadarCube() = default;
  RadarCube(int channels, int chirps, int samples);

  int channels() const { return channels_; }
  int chirps() const { return chirps_; }
  int samples() const { return samples_; }

  cplx& at(int channel, int chirp, int sample) {
    return data_[index(channel, chirp, sample)];
  }
  const cplx& at(int channel, int chirp, int sample) const {
    return data_[index(channel, chirp, sample)];
  }
  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

 private:
  std::size_t index(int channel, int chirp, int sample) const {
    return (static_cast<std::size_t>(channel) * chirps_ + chirp) * samples_ +
           sample;
  }

  int channels_ = 0;
  int chirps_ = 0;
  int samples_ = 0;
  std::vector<cplx> data_;
};

struct Detection {
  double range = 0.0;     ///< m
  double velocity = 0.0;  ///< m/s, positive = approaching
  double angle = 0.0;     ///< rad
  double power = 0.0;     ///< peak amplitude relative to the strongest cell, (0, 1]
  double amplitude = 0.0; ///< estimated received amplitude A_r
};

enum class Plane { XY, XZ };

// Closed-form waveform relations. All throw DomainError on invalid input.
double beat_frequency(const ChirpConfig& cfg, double r0);
double range_resolution(const ChirpConfig& cfg);
double velocity_resolution(const ChirpConfig& cfg);
double doppler_frequency(double v, double lambda);
double rcs_from_amplitude(double a_r, double r0);
double amplitude_from_rcs(double sigma_dbsm, double r0);
double steering_phase(double n, double d, double theta, double lambda);

struct SynthesisOptions {
  /// SNR relative to the weakest target's per-sample power; +inf = noiseless.
  double snr_db = 20.0;
  std::uint64_t seed = 0;
};

/// Sums one stretch-processed tone per target into a TDM-MIMO cube.
/// Throws DomainError for an empty target list or a target outside
/// (0, unambiguous range).
RadarCube synthesize_baseband(const ChirpConfig& cfg,
                              const std::vector<PointTarget>& targets,
                              const SynthesisOptions& opts = {});

/// Unitary zero-padded FFT along fast time, returned as
/// [channel][chirp][range bin].
std::vector<cplx> range_spectrum(const RadarCube& cube, const ChirpConfig& cfg);

/// Number of bins per axis after zero-padding to the next power of two.
struct SpectrumShape {
  int range = 0;
  int doppler = 0;
  int angle = 0;
};
SpectrumShape spectrum_shape(const ChirpConfig& cfg);

inline constexpr std::size_t kMaxDetections = 256;

/// 3-D FFT over (fast time, slow time, channel) followed by local-maximum
/// peak picking: cells whose power is at least threshold * max cell power
/// become detections. At most max_detections are returned, strongest first.
std::vector<Detection> process_cube(const RadarCube& cube,
                                    const ChirpConfig& cfg,
                                    double threshold = 0.25,
                                    std::size_t max_detections = kMaxDetections);

/// (depth, lateral) = (R cos(theta), R sin(theta)) in the module's plane.
std::pair<double, double> to_cartesian(const Detection& det, Plane plane);

}  // namespace mmpose::radar
