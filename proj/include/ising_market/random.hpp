#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace ising_market {

/// The engine behind every simulation. mt19937_64's output sequence is fixed
/// by the standard, so runs are reproducible across toolchains.
using Engine = std::mt19937_64;

/// Independent stream for stock `stream` of a simulation seeded with `seed`.
inline Engine make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Engine(seq);
}

inline std::vector<Engine> make_streams(std::uint64_t seed, std::size_t count) {
  std::vector<Engine> streams;
  streams.reserve(count);
  for (std::size_t k = 0; k < count; ++k) streams.push_back(make_stream(seed, k));
  return streams;
}

// The standard distributions are implementation-defined, so the two draws the
// dynamics needs are spelled out here to keep output identical everywhere.

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform_unit(Engine& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Index in [0, n) by multiply-shift of one 64-bit draw. The bias is below
/// n / 2^64, far under anything a lattice-sized n can resolve.
inline std::size_t uniform_index(Engine& rng, std::size_t n) noexcept {
  return static_cast<std::size_t>(
      (static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n)) >> 64);
}

struct Cell {
  std::size_t row;
  std::size_t col;
};

/// A uniform cell of an L x L lattice together with a uniform variate in
/// [0, 1), all decoded from one 64-bit draw x by mixed-radix multiply-shift:
/// the high word of x * L is the row, the high word of (low word) * L is the
/// column, and what remains, x * L^2 mod 2^64, is the variate. The variate's
/// resolution is L^2 / 2^64 (about 8e-16 for L = 120).
struct CellDraw {
  Cell cell;
  double u;
};

inline CellDraw uniform_cell_and_unit(Engine& rng, std::size_t L) noexcept {
  const auto first = static_cast<unsigned __int128>(rng()) * L;
  const auto second = static_cast<unsigned __int128>(static_cast<std::uint64_t>(first)) * L;
  const auto rest = static_cast<std::uint64_t>(second);
  return {{static_cast<std::size_t>(first >> 64), static_cast<std::size_t>(second >> 64)},
          static_cast<double>(rest >> 11) * 0x1.0p-53};
}

}  // namespace ising_market
