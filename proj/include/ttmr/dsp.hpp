#pragma once

#include <string>
#include <vector>

namespace ttmr {

struct MelConfig {
  double sample_rate = 22050.0;
  double clip_seconds = 10.0;
  std::size_t n_fft = 1024;
  std::size_t hop_samples = 220;  // 10 ms at 22050 Hz, floored
  std::size_t n_mels = 128;
  double fmin = 0.0;
  double fmax = 11025.0;
  double log_floor = 1e-10;

  std::size_t n_bins() const { return n_fft / 2 + 1; }
  std::size_t frame_count(std::size_t n_samples) const;
  void validate() const;
};

// Row-major frames x cols matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct MelSpectrogram {
  Matrix values;  // frames x n_mels, log10 power
  MelConfig config;
};

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<double>& re, std::vector<double>& im);

// Hann-windowed magnitude-squared spectrum, frames x (n_fft/2 + 1).
// No padding: frames lie fully inside the signal.
Matrix stft_power(const std::vector<double>& signal, const MelConfig& cfg);

// HTK-mel triangular filterbank, n_mels x n_bins.
Matrix mel_filterbank(const MelConfig& cfg);

// log10(filterbank . power + floor)
MelSpectrogram log_mel(const std::vector<double>& signal, const MelConfig& cfg);

// Time-mean over frames -> n_mels feature vector (the pooled input the
// audio encoder consumes).
std::vector<double> pooled_feature(const MelSpectrogram& mel);

// Deterministic per-track pseudo audio for the synthetic pipeline: a sum
// of sinusoids keyed by a hash of the id, 10 s at the configured rate.
std::vector<double> synth_signal(const std::string& track_id, const MelConfig& cfg);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Mono audio from a .wav (16-bit PCM or 32-bit float) or a raw .f32
// little-endian float file. WAV sample rates other than expect_rate are
// rejected, not resampled.
std::vector<double> load_audio(const std::string& path, double expect_rate);

}  // namespace ttmr
