#ifndef NRBM_RNG_HPP
#define NRBM_RNG_HPP

#include <cstdint>
#include <random>

namespace nrbm {

// All randomness in the library flows from one master seed. Each consumer
// derives a private stream from (master seed, stream id) so that no two
// modules ever share generator state and results stay bit-reproducible
// regardless of evaluation order or thread count.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamKind : std::uint64_t {
  init_weights = 1,
  shuffle = 2,
  cd_chain = 3,
  bootstrap = 4,
  synthetic = 5,
  generic = 6,
};

inline std::uint64_t combine_stream(std::uint64_t id, std::uint64_t part) {
  return splitmix64(id ^ splitmix64(part + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t stream_id(StreamKind kind) {
  return splitmix64(static_cast<std::uint64_t>(kind));
}

template <class... Parts>
std::uint64_t stream_id(StreamKind kind, Parts... parts) {
  std::uint64_t id = stream_id(kind);
  ((id = combine_stream(id, static_cast<std::uint64_t>(parts))), ...);
  return id;
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream)
      : gen_(splitmix64(splitmix64(master_seed) ^
                        (stream * 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0,1) with 53 bits; avoids distribution objects so the
  // sequence is identical across standard library implementations.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

// Derives child streams by index; handed to parallel kernels so each unit
// of work (row, replicate, ...) draws from its own stream no matter which
// thread runs it.
class StreamFactory {
 public:
  StreamFactory(std::uint64_t master_seed, std::uint64_t base_stream)
      : master_(master_seed), base_(base_stream) {}

  RngStream stream(std::uint64_t index) const {
    return RngStream(master_, combine_stream(base_, index));
  }

  StreamFactory child(std::uint64_t index) const {
    return StreamFactory(master_, combine_stream(base_, index));
  }

  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
  std::uint64_t base_;
};

}  // namespace nrbm

#endif  // NRBM_RNG_HPP
