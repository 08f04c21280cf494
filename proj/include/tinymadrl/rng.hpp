#ifndef TINYMADRL_RNG_HPP_
#define TINYMADRL_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace tinymadrl {

using Rng = std::mt19937_64;

// One master seed fans out into named, indexed streams so that adding a
// consumer (a new algorithm, an extra probe) never shifts another stream.
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view stream,
                         std::uint64_t index = 0);

inline Rng MakeRng(std::uint64_t master, std::string_view stream,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(master, stream, index));
}

inline double Uniform(Rng& rng, double low, double high) {
  if (low == high) return low;
  return std::uniform_real_distribution<double>(low, high)(rng);
}

}  // namespace tinymadrl

#endif  // TINYMADRL_RNG_HPP_
