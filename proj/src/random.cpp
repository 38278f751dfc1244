#include "consensus/random.hpp"

namespace consensus {

std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                 std::uint64_t realization_index,
                                 std::uint64_t instrument_count) noexcept {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ realization_index);
  h = splitmix64(h ^ (instrument_count * 0xD1B54A32D192ED03ULL));
  return h;
}

}  // namespace consensus
