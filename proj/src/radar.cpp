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

#include "mmpose/radar.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "mmpose/errors.hpp"
#include "mmpose/rng.hpp"

namespace mmpose::radar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// FFTW's planner is not re-entrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer alloc_buffer(std::size_t n) {
  FftwBuffer buf(fftw_alloc_complex(n));
  std::fill_n(reinterpret_cast<double*>(buf.get()), 2 * n, 0.0);
  return buf;
}

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {}
  ~Plan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

void require_positive(double value, const char* what) {
  if (!(value > 0.0)) {
    throw DomainError(std::string(what) + " must be positive, got " +
                      std::to_string(value));
  }
}

void check_cube(const RadarCube& cube, const ChirpConfig& cfg) {
  if (cube.channels() != cfg.virtual_channels() ||
      cube.chirps() != cfg.n_chirps ||
      cube.samples() != cfg.samples_per_chirp()) {
    throw StructuralError(
        "radar cube is " + std::to_string(cube.channels()) + "x" +
        std::to_string(cube.chirps()) + "x" + std::to_string(cube.samples()) +
        " but the chirp config expects " +
        std::to_string(cfg.virtual_channels()) + "x" +
        std::to_string(cfg.n_chirps) + "x" +
        std::to_string(cfg.samples_per_chirp()));
  }
}

int signed_bin(int k, int n) { return k < n / 2 ? k : k - n; }

}  // namespace

int ChirpConfig::samples_per_chirp() const {
  return static_cast<int>(std::lround(fs * t_chirp));
}

double ChirpConfig::unambiguous_range() const {
  return fs * c * t_chirp / (2.0 * bw);
}

void ChirpConfig::validate() const {
  require_positive(f0, "f0");
  require_positive(bw, "bandwidth");
  require_positive(t_chirp, "chirp duration");
  require_positive(fs, "sample rate");
  require_positive(c, "propagation speed");
  require_positive(d_rx, "receive spacing");
  if (n_chirps < 1 || n_rx < 1 || n_tx < 1) {
    throw DomainError("chirp, receive and transmit counts must be positive");
  }
  if (samples_per_chirp() < 2) {
    throw DomainError("fewer than two fast-time samples per chirp");
  }
}

ChirpConfig default_chirp() {
  ChirpConfig cfg;
  cfg.d_rx = 0.5 * cfg.wavelength();
  cfg.d_tx = cfg.n_rx * cfg.d_rx;
  return cfg;
}

RadarCube::RadarCube(int channels, int chirps, int samples)
    : channels_(channels),
      chirps_(chirps),
      samples_(samples),
      data_(static_cast<std::size_t>(channels) * chirps * samples) {
  if (channels <= 0 || chirps <= 0 || samples <= 0) {
    throw StructuralError("radar cube dimensions must be positive");
  }
}

double beat_frequency(const ChirpConfig& cfg, double r0) {
  require_positive(r0, "range");
  require_positive(cfg.t_chirp, "chirp duration");
  return cfg.chirp_rate() * (2.0 * r0 / cfg.c);
}

double range_resolution(const ChirpConfig& cfg) {
  require_positive(cfg.bw, "bandwidth");
  return cfg.c / (2.0 * cfg.bw);
}

double velocity_resolution(const ChirpConfig& cfg) {
  if (cfg.n_chirps < 2) {
    throw DomainError("velocity resolution needs at least two chirps");
  }
  require_positive(cfg.t_chirp, "chirp duration");
  return cfg.wavelength() / (2.0 * cfg.cpi());
}

double doppler_frequency(double v, double lambda) {
  require_positive(lambda, "wavelength");
  return -2.0 * v / lambda;
}

double rcs_from_amplitude(double a_r, double r0) {
  require_positive(a_r, "amplitude");
  require_positive(r0, "range");
  return 20.0 * std::log10(4.0 * std::numbers::pi * r0 * r0 * a_r);
}

double amplitude_from_rcs(double sigma_dbsm, double r0) {
  require_positive(r0, "range");
  return std::pow(10.0, sigma_dbsm / 20.0) /
         (4.0 * std::numbers::pi * r0 * r0);
}

double steering_phase(double n, double d, double theta, double lambda) {
  require_positive(lambda, "wavelength");
  return kTwoPi * n * d * std::sin(theta) / lambda;
}

RadarCube synthesize_baseband(const ChirpConfig& cfg,
                              const std::vector<PointTarget>& targets,
                              const SynthesisOptions& opts) {
  cfg.validate();
  if (targets.empty()) {
    throw DomainError("cannot synthesize a scene without targets");
  }
  const double r_max = cfg.unambiguous_range();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    if (!(t.r0 > 0.0) || t.r0 >= r_max) {
      throw DomainError("target " + std::to_string(i) + " at range " +
                        std::to_string(t.r0) +
                        " m is outside (0, " + std::to_string(r_max) + ") m");
    }
  }

  const int n_samples = cfg.samples_per_chirp();
  RadarCube cube(cfg.virtual_channels(), cfg.n_chirps, n_samples);
  const double lambda = cfg.wavelength();
  const double slope = cfg.chirp_rate();

  double weakest = std::numeric_limits<double>::infinity();
  for (const auto& t : targets) {
    const double amp = amplitude_from_rcs(t.rcs, t.r0);
    weakest = std::min(weakest, amp);
    const double sin_theta = std::sin(t.theta);
    for (int tx = 0; tx < cfg.n_tx; ++tx) {
      for (int rx = 0; rx < cfg.n_rx; ++rx) {
        const int ch = tx * cfg.n_rx + rx;
        const double spatial =
            kTwoPi * (tx * cfg.d_tx + rx * cfg.d_rx) * sin_theta / lambda;
        for (int n = 0; n < cfg.n_chirps; ++n) {
          const double tau = 2.0 * (t.r0 - t.v * n * cfg.t_chirp) / cfg.c;
          const double carrier = kTwoPi * cfg.f0 * tau;
          const double residual = -std::numbers::pi * slope * tau * tau;
          const double base = carrier + residual + spatial;
          const double rate = kTwoPi * slope * tau / cfg.fs;
          for (int i = 0; i < n_samples; ++i) {
            cube.at(ch, n, i) += std::polar(amp, base + rate * i);
          }
        }
      }
    }
  }

  if (std::isfinite(opts.snr_db)) {
    const double noise_power = weakest * weakest / std::pow(10.0, opts.snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);
    Rng rng(opts.seed);
    for (auto& s : cube.data()) {
      const double re = rng.normal();
      s += cplx(sigma * re, sigma * rng.normal());
    }
  }
  return cube;
}

SpectrumShape spectrum_shape(const ChirpConfig& cfg) {
  return {next_pow2(cfg.samples_per_chirp()), next_pow2(cfg.n_chirps),
          next_pow2(cfg.virtual_channels())};
}

std::vector<cplx> range_spectrum(const RadarCube& cube, const ChirpConfig& cfg) {
  check_cube(cube, cfg);
  const int nr = spectrum_shape(cfg).range;
  const int rows = cube.channels() * cube.chirps();
  auto buf = alloc_buffer(static_cast<std::size_t>(rows) * nr);
  for (int row = 0; row < rows; ++row) {
    for (int i = 0; i < cube.samples(); ++i) {
      const cplx s = cube.data()[static_cast<std::size_t>(row) * cube.samples() + i];
      buf[static_cast<std::size_t>(row) * nr + i][0] = s.real();
      buf[static_cast<std::size_t>(row) * nr + i][1] = s.imag();
    }
  }
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    int n[] = {nr};
    plan = std::make_unique<Plan>(fftw_plan_many_dft(
        1, n, rows, buf.get(), nullptr, 1, nr, buf.get(), nullptr, 1, nr,
        FFTW_FORWARD, FFTW_ESTIMATE));
  }
  plan->execute();
  const double scale = 1.0 / std::sqrt(static_cast<double>(nr));
  std::vector<cplx> out(static_cast<std::size_t>(rows) * nr);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = cplx(buf[k][0], buf[k][1]) * scale;
  }
  return out;
}

std::vector<Detection> process_cube(const RadarCube& cube,
                                    const ChirpConfig& cfg, double threshold,
                                    std::size_t max_detections) {
  check_cube(cube, cfg);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DomainError("detection threshold must lie in [0, 1]");
  }
  const SpectrumShape shape = spectrum_shape(cfg);
  const int nr = shape.range, nd = shape.doppler, na = shape.angle;
  const std::size_t cells = static_cast<std::size_t>(nr) * nd * na;

  // Layout [angle][doppler][range], zero-padded on every axis.
  auto buf = alloc_buffer(cells);
  for (int ch = 0; ch < cube.channels(); ++ch) {
    for (int n = 0; n < cube.chirps(); ++n) {
      for (int i = 0; i < cube.samples(); ++i) {
        const std::size_t k = (static_cast<std::size_t>(ch) * nd + n) * nr + i;
        buf[k][0] = cube.at(ch, n, i).real();
        buf[k][1] = cube.at(ch, n, i).imag();
      }
    }
  }
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_3d(
        na, nd, nr, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
  }
  plan->execute();

  std::vector<double> power(cells);
  double peak = 0.0;
  for (std::size_t k = 0; k < cells; ++k) {
    power[k] = buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    peak = std::max(peak, power[k]);
  }
  if (peak <= 0.0) return {};

  auto cell = [&](int a, int d, int r) {
    return (static_cast<std::size_t>(a) * nd + d) * nr + r;
  };
  auto is_peak = [&](int a, int d, int r, std::size_t self) {
    const double p = power[self];
    for (int da = -1; da <= 1; ++da) {
      for (int dd = -1; dd <= 1; ++dd) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (da == 0 && dd == 0 && dr == 0) continue;
          const int rr = r + dr;
          if (rr < 0 || rr >= nr) continue;
          // Doppler and angle spectra are periodic.
          const int aa = (a + da + na) % na;
          const int dn = (d + dd + nd) % nd;
          const std::size_t other = cell(aa, dn, rr);
          if (other == self) continue;
          if (power[other] > p || (power[other] == p && other < self)) {
            return false;
          }
        }
      }
    }
    return true;
  };

  const double floor = threshold * peak;
  std::vector<std::size_t> peaks;
  for (int a = 0; a < na; ++a) {
    for (int d = 0; d < nd; ++d) {
      for (int r = 0; r < nr; ++r) {
        const std::size_t self = cell(a, d, r);
        if (power[self] >= floor && power[self] > 0.0 && is_peak(a, d, r, self)) {
          peaks.push_back(self);
        }
      }
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t x, std::size_t y) {
    return power[x] > power[y];
  });
  if (peaks.size() > max_detections) peaks.resize(max_detections);

  const double lambda = cfg.wavelength();
  const double peak_mag = std::sqrt(peak);
  const double gain = static_cast<double>(cube.channels()) * cube.chirps() *
                      cube.samples();
  std::vector<Detection> out;
  out.reserve(peaks.size());
  for (std::size_t k : peaks) {
    const int r = static_cast<int>(k % nr);
    const int d = static_cast<int>((k / nr) % nd);
    const int a = static_cast<int>(k / (static_cast<std::size_t>(nr) * nd));
    Detection det;
    const double f_beat = r * cfg.fs / nr;
    det.range = f_beat * cfg.c / (2.0 * cfg.chirp_rate());
    const double f_doppler = signed_bin(d, nd) / (nd * cfg.t_chirp);
    det.velocity = -f_doppler * lambda / 2.0;
    const double s = std::clamp(signed_bin(a, na) * lambda / (na * cfg.d_rx), -1.0, 1.0);
    det.angle = std::asin(s);
    const double mag = std::sqrt(power[k]);
    det.power = mag / peak_mag;
    det.amplitude = mag / gain;
    out.push_back(det);
  }
  return out;
}

std::pair<double, double> to_cartesian(const Detection& det, Plane /*plane*/) {
  return {det.range * std::cos(det.angle), det.range * std::sin(det.angle)};
}

}  // namespace mmpose::radar
