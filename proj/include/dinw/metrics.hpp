#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "dinw/frame.hpp"

namespace dinw {

// Peak 99 dB: identical frames would otherwise be +inf, and the cap keeps
// psnr a total function.
inline constexpr double kPsnrCap = 99.0;

// 10*log10(1 / MSE) over all samples of [0,1] frames, capped at 99 dB.
double psnr(const Frame& a, const Frame& b);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range 1.0, evaluated where the window fits entirely.
double ssim(const Frame& a, const Frame& b);

// |a - b| clamped to [0, 1].
Frame diff_image(const Frame& a, const Frame& b);

struct QualityRow {
    std::string sequence;
    std::string method;
    int frame = -1;  // -1 marks a sequence average
    double psnr = 0.0;
    double ssim = 0.0;
};

// Per-frame quality rows plus sequence-average aggregation, emitted as CSV
// and as an aligned method-by-sequence table with "PSNR/SSIM" cells.
struct QualityReport {
    std::vector<QualityRow> rows;

    void add(const std::string& sequence, const std::string& method, int frame, double p,
             double s);
    std::vector<QualityRow> sequence_averages() const;
    void write_csv(std::ostream& os) const;
    void write_table(std::ostream& os) const;
};

struct TimingReport {
    std::string method;
    int width = 0;
    int height = 0;
    int frames = 0;  // measured frames, warmup excluded
    int warmup = 0;
    double mean_seconds = 0.0;
    std::uint64_t macs = 0;  // 0 when not applicable
};

// Runs fn over the supplied frames, cycling if needed: `warmup` calls
// untimed, then `frames` timed calls. Timing is pinned to a single worker
// thread for stability.
TimingReport bench_method(const std::string& method, const std::vector<Frame>& inputs, int frames,
                          int warmup, const std::function<void(const Frame&)>& fn,
                          std::uint64_t macs = 0);

void write_timing_csv(std::ostream& os, const std::vector<TimingReport>& reports);
void write_timing_table(std::ostream& os, const std::vector<TimingReport>& reports);

}  // namespace dinw
