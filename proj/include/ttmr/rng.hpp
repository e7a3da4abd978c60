#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttmr {

// Deterministic generator with explicit derived draws. The standard
// distributions are implementation-defined, so every draw used for
// reproducible output goes through these methods instead.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
    return static_cast<std::size_t>(next() % n);
  }

  double normal() {
    // Box-Muller, one value per call (the spare is discarded to keep
    // the draw count independent of call pairing).
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  std::string save_state() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void load_state(const std::string& state) {
    std::istringstream is(state);
    is >> gen_;
    if (is.fail()) throw std::runtime_error("Rng::load_state: malformed state string");
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace ttmr
