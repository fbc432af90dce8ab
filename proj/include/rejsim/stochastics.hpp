#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace rejsim {

/// Philox4x32-10 block function: maps a 128-bit counter and 64-bit key to
/// 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// Randomness for one simulation run.
///
/// A generator source is counter-based: value i of stream `stream` under
/// `seed` is philox(counter = (i, stream), key = seed), so sequences are
/// bit-identical across platforms and streams need no coordination.
/// A scripted source replays a fixed list of uniforms instead; it exists so
/// that tests can force exact walkthroughs of the algorithms.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// Uniform draws consume `values` in order; all values must lie in [0,1).
    /// Throws ScriptExhausted once they run out, ProbabilityOutOfRange on a
    /// bad value.
    static RandomSource scripted(std::vector<double> values);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    bool is_scripted() const noexcept { return scripted_; }

    /// Independent source for replication `stream` under the same seed.
    RandomSource child(std::uint64_t stream) const noexcept { return RandomSource(seed_, stream); }

    /// 64 random bits (scripted: u * 2^64).
    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    /// -ln(1 - u) / rate. Throws NonPositiveRate.
    double draw_exp(double rate);
    /// Unbiased index in [0, n). Throws ZeroRange.
    std::uint64_t draw_uniform_index(std::uint64_t n);
    /// Throws ProbabilityOutOfRange unless 0 <= p <= 1.
    bool draw_bernoulli(double p);

private:
    RandomSource() = default;
    void refill() noexcept;
    double next_scripted();

    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    unsigned buffered_ = 0;

    bool scripted_ = false;
    std::vector<double> script_;
    std::size_t script_pos_ = 0;
};

} // namespace rejsim
