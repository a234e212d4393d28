// Counter-based Philox4x32-10 generator. Every (seed, stage, index) triple
// names an independent stream with no warm-up cost, which is what makes
// trajectory batches reproducible regardless of the execution schedule.
#pragma once

#include <cmath>
#include <cstdint>

namespace srncv {

/// Stream stages keep the pipeline's stochastic phases from sharing draws.
enum class RngStage : uint32_t {
    LambdaInit = 1,
    PilotBatch = 2,      // + round index via stream id
    ResampleDraw = 3,    // + round index via stream id
    CovarianceBatch = 4,
    FinalBatch = 5,
    Validation = 6,
    Calibration = 7,
};

class Philox4x32 {
public:
    Philox4x32(uint64_t seed, uint32_t stage, uint64_t stream) {
        key_[0] = static_cast<uint32_t>(seed);
        key_[1] = static_cast<uint32_t>(seed >> 32);
        base_[0] = 0;
        base_[1] = stage;
        base_[2] = static_cast<uint32_t>(stream);
        base_[3] = static_cast<uint32_t>(stream >> 32);
    }

    Philox4x32(uint64_t seed, RngStage stage, uint64_t stream)
        : Philox4x32(seed, static_cast<uint32_t>(stage), stream) {}

    uint32_t next_u32() {
        if (have_ == 0) {
            fill_block();
            have_ = 4;
        }
        return out_[4 - have_--];
    }

    uint64_t next_u64() {
        const uint64_t lo = next_u32();
        const uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Exponential waiting time; safe at u = 0 (returns 0, never infinity).
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Standard normal via Box-Muller (spare value cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 == 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static constexpr uint32_t kMul0 = 0xD2511F53u;
    static constexpr uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

    static void round(uint32_t ctr[4], uint32_t k0, uint32_t k1) {
        const uint64_t p0 = static_cast<uint64_t>(kMul0) * ctr[0];
        const uint64_t p1 = static_cast<uint64_t>(kMul1) * ctr[2];
        const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        ctr[0] = hi1 ^ ctr[1] ^ k0;
        ctr[1] = lo1;
        ctr[2] = hi0 ^ ctr[3] ^ k1;
        ctr[3] = lo0;
    }

    void fill_block() {
        uint32_t ctr[4] = {static_cast<uint32_t>(block_), base_[1] ^ static_cast<uint32_t>(block_ >> 32),
                           base_[2], base_[3]};
        uint32_t k0 = key_[0], k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            round(ctr, k0, k1);
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        out_[0] = ctr[0];
        out_[1] = ctr[1];
        out_[2] = ctr[2];
        out_[3] = ctr[3];
        ++block_;
    }

    uint32_t key_[2];
    uint32_t base_[4];
    uint64_t block_ = 0;
    uint32_t out_[4] = {};
    int have_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace srncv
