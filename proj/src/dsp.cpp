#include "ttmr/dsp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "ttmr/util.hpp"

namespace ttmr {

namespace {
constexpr double kPi = std::numbers::pi;
}

void MelConfig::validate() const {
  if (hop_samples == 0) throw UsageError("hop_samples must be positive");
  if (n_fft == 0 || (n_fft & (n_fft - 1)) != 0)
    throw UsageError("n_fft must be a power of two");
  if (n_mels > n_bins()) throw UsageError("n_mels must be <= n_fft/2 + 1");
  if (fmax <= fmin) throw UsageError("fmax must exceed fmin");
}

std::size_t MelConfig::frame_count(std::size_t n_samples) const {
  if (n_samples < n_fft) return 0;
  return (n_samples - n_fft) / hop_samples + 1;
}

void fft_radix2(std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = re.size();
  if (n == 0 || (n & (n - 1)) != 0 || im.size() != n)
    throw NumericError("fft_radix2: size must be a power of two");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i], re[j]);
      std::swap(im[i], im[j]);
    }
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / static_cast<double>(len);
    const double wr = std::cos(ang), wi = std::sin(ang);
    for (std::size_t i = 0; i < n; i += len) {
      double cr = 1.0, ci = 0.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::size_t a = i + k, b = i + k + len / 2;
        const double tr = re[b] * cr - im[b] * ci;
        const double ti = re[b] * ci + im[b] * cr;
        re[b] = re[a] - tr;
        im[b] = im[a] - ti;
        re[a] += tr;
        im[a] += ti;
        const double ncr = cr * wr - ci * wi;
        ci = cr * wi + ci * wr;
        cr = ncr;
      }
    }
  }
}

Matrix stft_power(const std::vector<double>& signal, const MelConfig& cfg) {
  cfg.validate();
  if (signal.size() < cfg.n_fft)
    throw DataError("signal shorter than the analysis window (" +
                    std::to_string(signal.size()) + " < " + std::to_string(cfg.n_fft) + ")");
  const std::size_t frames = cfg.frame_count(signal.size());
  const std::size_t bins = cfg.n_bins();

  std::vector<double> window(cfg.n_fft);
  for (std::size_t i = 0; i < cfg.n_fft; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                     static_cast<double>(cfg.n_fft));

  Matrix power(frames, bins);
  std::vector<double> re(cfg.n_fft), im(cfg.n_fft);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t off = f * cfg.hop_samples;
    for (std::size_t i = 0; i < cfg.n_fft; ++i) {
      re[i] = signal[off + i] * window[i];
      im[i] = 0.0;
    }
    fft_radix2(re, im);
    for (std::size_t b = 0; b < bins; ++b) power.at(f, b) = re[b] * re[b] + im[b] * im[b];
  }
  return power;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const std::size_t bins = cfg.n_bins();
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> centers(cfg.n_mels + 2);
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                        static_cast<double>(cfg.n_mels + 1));

  Matrix fb(cfg.n_mels, bins);
  const double bin_hz = cfg.sample_rate / static_cast<double>(cfg.n_fft);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = centers[m], center = centers[m + 1], right = centers[m + 2];
    for (std::size_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * bin_hz;
      double w = 0.0;
      if (f > left && f < right) {
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      }
      fb.at(m, b) = w;
    }
  }
  return fb;
}

MelSpectrogram log_mel(const std::vector<double>& signal, const MelConfig& cfg) {
  Matrix power = stft_power(signal, cfg);
  Matrix fb = mel_filterbank(cfg);
  MelSpectrogram out;
  out.config = cfg;
  out.values = Matrix(power.rows, cfg.n_mels);
  for (std::size_t f = 0; f < power.rows; ++f) {
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double acc = 0.0;
      for (std::size_t b = 0; b < power.cols; ++b) acc += fb.at(m, b) * power.at(f, b);
      const double v = std::log10(acc + cfg.log_floor);
      if (!std::isfinite(v)) throw NumericError("non-finite log-mel value");
      out.values.at(f, m) = v;
    }
  }
  return out;
}

std::vector<double> pooled_feature(const MelSpectrogram& mel) {
  std::vector<double> out(mel.values.cols, 0.0);
  if (mel.values.rows == 0) return out;
  for (std::size_t f = 0; f < mel.values.rows; ++f)
    for (std::size_t m = 0; m < mel.values.cols; ++m) out[m] += mel.values.at(f, m);
  for (auto& v : out) v /= static_cast<double>(mel.values.rows);
  return out;
}

std::vector<double> synth_signal(const std::string& track_id, const MelConfig& cfg) {
  const std::size_t n = static_cast<std::size_t>(cfg.sample_rate * cfg.clip_seconds);
  std::uint64_t h = fnv1a64(track_id);
  std::vector<double> sig(n, 0.0);
  // three partials between ~100 Hz and ~5 kHz, phases and amps from the hash
  for (int p = 0; p < 3; ++p) {
    const double freq = 100.0 + static_cast<double>((h >> (p * 16)) & 0xffff) / 65535.0 * 4900.0;
    const double amp = 0.2 + 0.1 * static_cast<double>(p);
    const double phase = 2.0 * kPi * static_cast<double>((h >> (p * 8)) & 0xff) / 255.0;
    const double w = 2.0 * kPi * freq / cfg.sample_rate;
    for (std::size_t i = 0; i < n; ++i) sig[i] += amp * std::sin(w * static_cast<double>(i) + phase);
  }
  return sig;
}

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}
std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

std::vector<double> load_wav(const std::string& path, double expect_rate) {
  const std::string bytes = read_text_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 44 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t chunk_len = read_u32(p + off + 4);
    if (std::memcmp(p + off, "fmt ", 4) == 0 && off + 8 + 16 <= bytes.size()) {
      format = read_u16(p + off + 8);
      channels = read_u16(p + off + 10);
      rate = read_u32(p + off + 12);
      bits = read_u16(p + off + 22);
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data_off = off + 8;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);
  }
  if (data_off == 0) throw DataError("WAV has no data chunk: " + path);
  if (channels != 1) throw DataError("WAV must be mono: " + path);
  if (static_cast<double>(rate) != expect_rate)
    throw DataError("WAV sample rate " + std::to_string(rate) + " != expected " +
                    std::to_string(static_cast<long>(expect_rate)) + " (no resampling): " + path);
  if (data_off + data_len > bytes.size()) throw DataError("truncated WAV data: " + path);

  std::vector<double> out;
  if (format == 1 && bits == 16) {
    out.reserve(data_len / 2);
    for (std::size_t i = 0; i + 1 < data_len; i += 2) {
      const std::int16_t s =
          static_cast<std::int16_t>(p[data_off + i] | p[data_off + i + 1] << 8);
      out.push_back(static_cast<double>(s) / 32768.0);
    }
  } else if (format == 3 && bits == 32) {
    out.reserve(data_len / 4);
    for (std::size_t i = 0; i + 3 < data_len; i += 4) {
      float f;
      std::memcpy(&f, p + data_off + i, 4);
      out.push_back(static_cast<double>(f));
    }
  } else {
    throw DataError("unsupported WAV encoding (need 16-bit PCM or 32-bit float): " + path);
  }
  return out;
}

}  // namespace

std::vector<double> load_audio(const std::string& path, double expect_rate) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".wav")
    return load_wav(path, expect_rate);
  // raw little-endian float32
  const std::string bytes = read_text_file(path);
  if (bytes.size() % 4 != 0) throw DataError("raw float file size not a multiple of 4: " + path);
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + i * 4, 4);
    out[i] = static_cast<double>(f);
  }
  return out;
}

}  // namespace ttmr
