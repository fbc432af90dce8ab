#include "rejsim/stochastics.hpp"

#include "rejsim/error.hpp"

#include <cmath>

namespace rejsim {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint32_t philox_m0 = 0xD2511F53u;
constexpr std::uint32_t philox_m1 = 0xCD9E8D57u;
constexpr std::uint32_t philox_w0 = 0x9E3779B9u;
constexpr std::uint32_t philox_w1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) noexcept
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += philox_w0;
            k[1] += philox_w1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(philox_m0, c[0], hi0, lo0);
        mulhilo(philox_m1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream)
{}

RandomSource RandomSource::scripted(std::vector<double> values)
{
    for (double v : values)
        if (!(v >= 0.0 && v < 1.0))
            throw Error(Errc::ProbabilityOutOfRange, "scripted values must lie in [0,1)");
    RandomSource src;
    src.scripted_ = true;
    src.script_ = std::move(values);
    return src;
}

void RandomSource::refill() noexcept
{
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                                           static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32(ctr, key);
    ++block_;
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
}

double RandomSource::next_scripted()
{
    if (script_pos_ >= script_.size())
        throw Error(Errc::ScriptExhausted, "scripted random source has no values left");
    return script_[script_pos_++];
}

std::uint64_t RandomSource::next_u64()
{
    if (scripted_)
        return static_cast<std::uint64_t>(std::ldexp(next_scripted(), 64));
    if (buffered_ == 0)
        refill();
    return buffer_[2 - buffered_--];
}

double RandomSource::uniform()
{
    if (scripted_)
        return next_scripted();
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::draw_exp(double rate)
{
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw Error(Errc::NonPositiveRate, "exponential rate must be positive and finite");
    return -std::log1p(-uniform()) / rate;
}

std::uint64_t RandomSource::draw_uniform_index(std::uint64_t n)
{
    if (n == 0)
        throw Error(Errc::ZeroRange, "cannot draw an index from an empty range");
    if (scripted_) {
        const auto i = static_cast<std::uint64_t>(next_scripted() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }
    // Lemire's multiply-and-reject; exact for every n.
    u128 m = static_cast<u128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = static_cast<u128>(next_u64()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

bool RandomSource::draw_bernoulli(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(Errc::ProbabilityOutOfRange, "Bernoulli probability must lie in [0,1]");
    return uniform() < p;
}

} // namespace rejsim
