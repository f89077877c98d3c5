#include "dinw/metrics.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "dinw/parallel.hpp"

namespace dinw {

namespace {

void require_frames_match(const Frame& a, const Frame& b, const char* op) {
    if (!a.same_dims(b)) {
        throw ShapeError(std::string(op) + ": frame dimensions differ, " +
                         std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                         std::to_string(a.channels) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + "x" + std::to_string(b.channels));
    }
}

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

const double* gaussian_window() {
    static const auto window = [] {
        std::array<double, kWin> w{};
        double total = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - (kWin - 1) / 2.0;
            w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            total += w[static_cast<std::size_t>(i)];
        }
        for (double& v : w) v /= total;
        return w;
    }();
    return window.data();
}

// Separable valid-region Gaussian filter: in is h x w, out is
// (h - kWin + 1) x (w - kWin + 1).
void gaussian_valid(const std::vector<double>& in, int h, int w, std::vector<double>& tmp,
                    std::vector<double>& out) {
    const double* g = gaussian_window();
    const int ow = w - kWin + 1;
    const int oh = h - kWin + 1;
    tmp.assign(static_cast<std::size_t>(h) * ow, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = in.data() + static_cast<std::size_t>(y) * w;
        double* trow = tmp.data() + static_cast<std::size_t>(y) * ow;
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * row[x + k];
            trow[x] = acc;
        }
    }
    out.assign(static_cast<std::size_t>(oh) * ow, 0.0);
    for (int y = 0; y < oh; ++y) {
        double* orow = out.data() + static_cast<std::size_t>(y) * ow;
        for (int k = 0; k < kWin; ++k) {
            const double* trow = tmp.data() + static_cast<std::size_t>(y + k) * ow;
            const double gk = g[k];
            for (int x = 0; x < ow; ++x) orow[x] += gk * trow[x];
        }
    }
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
    require_frames_match(a, b, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.data.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Frame& a, const Frame& b) {
    require_frames_match(a, b, "ssim");
    if (a.channels != 1) {
        throw ShapeError("ssim: expected single-channel frames, got " +
                         std::to_string(a.channels) + " channels");
    }
    if (a.width < kWin || a.height < kWin) {
        throw ShapeError("ssim: frame " + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " smaller than the 11x11 window");
    }
    const int h = a.height;
    const int w = a.width;
    const std::size_t n = static_cast<std::size_t>(h) * w;
    std::vector<double> pa(n), pb(n), paa(n), pbb(n), pab(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double va = a.data[i];
        const double vb = b.data[i];
        pa[i] = va;
        pb[i] = vb;
        paa[i] = va * va;
        pbb[i] = vb * vb;
        pab[i] = va * vb;
    }
    std::vector<double> tmp, mu_a, mu_b, s_aa, s_bb, s_ab;
    gaussian_valid(pa, h, w, tmp, mu_a);
    gaussian_valid(pb, h, w, tmp, mu_b);
    gaussian_valid(paa, h, w, tmp, s_aa);
    gaussian_valid(pbb, h, w, tmp, s_bb);
    gaussian_valid(pab, h, w, tmp, s_ab);

    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double var_a = s_aa[i] - ma * ma;
        const double var_b = s_bb[i] - mb * mb;
        const double cov = s_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
                 ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
    }
    return total / static_cast<double>(mu_a.size());
}

Frame diff_image(const Frame& a, const Frame& b) {
    require_frames_match(a, b, "diff_image");
    Frame out(a.width, a.height, a.channels);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        out.data[i] = clamp01(std::fabs(a.data[i] - b.data[i]));
    }
    return out;
}

void QualityReport::add(const std::string& sequence, const std::string& method, int frame,
                        double p, double s) {
    rows.push_back(QualityRow{sequence, method, frame, p, s});
}

std::vector<QualityRow> QualityReport::sequence_averages() const {
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, QualityRow>> acc;
    for (const auto& r : rows) {
        if (r.frame < 0) continue;
        auto& slot = acc[{r.sequence, r.method}];
        if (slot.first == 0) slot.second = QualityRow{r.sequence, r.method, -1, 0.0, 0.0};
        slot.second.psnr += r.psnr;
        slot.second.ssim += r.ssim;
        ++slot.first;
    }
    std::vector<QualityRow> out;
    out.reserve(acc.size());
    for (auto& [key, slot] : acc) {
        slot.second.psnr /= static_cast<double>(slot.first);
        slot.second.ssim /= static_cast<double>(slot.first);
        out.push_back(slot.second);
    }
    return out;
}

void QualityReport::write_csv(std::ostream& os) const {
    os << "sequence,method,frame,psnr_db,ssim\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f\n", r.sequence.c_str(),
                      r.method.c_str(), r.frame, r.psnr, r.ssim);
        os << buf;
    }
    for (const auto& r : sequence_averages()) {
        std::snprintf(buf, sizeof buf, "%s,%s,avg,%.6f,%.6f\n", r.sequence.c_str(),
                      r.method.c_str(), r.psnr, r.ssim);
        os << buf;
    }
}

void QualityReport::write_table(std::ostream& os) const {
    const auto avgs = sequence_averages();
    std::set<std::string> seq_set, method_set;
    for (const auto& r : avgs) {
        seq_set.insert(r.sequence);
        method_set.insert(r.method);
    }
    const std::vector<std::string> seqs(seq_set.begin(), seq_set.end());
    const std::vector<std::string> methods(method_set.begin(), method_set.end());

    auto cell = [&](const std::string& m, const std::string& s) -> std::string {
        for (const auto& r : avgs) {
            if (r.method == m && r.sequence == s) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.2f/%.4f", r.psnr, r.ssim);
                return buf;
            }
        }
        return "-";
    };

    std::size_t method_w = std::string("PSNR/SSIM").size();
    for (const auto& m : methods) method_w = std::max(method_w, m.size());
    std::vector<std::size_t> col_w(seqs.size());
    for (std::size_t j = 0; j < seqs.size(); ++j) {
        col_w[j] = seqs[j].size();
        for (const auto& m : methods) col_w[j] = std::max(col_w[j], cell(m, seqs[j]).size());
    }

    auto pad = [&os](const std::string& s, std::size_t w) {
        os << s;
        for (std::size_t i = s.size(); i < w; ++i) os << ' ';
    };
    pad("PSNR/SSIM", method_w);
    for (std::size_t j = 0; j < seqs.size(); ++j) {
        os << "  ";
        pad(seqs[j], col_w[j]);
    }
    os << "\n";
    for (const auto& m : methods) {
        pad(m, method_w);
        for (std::size_t j = 0; j < seqs.size(); ++j) {
            os << "  ";
            pad(cell(m, seqs[j]), col_w[j]);
        }
        os << "\n";
    }
}

TimingReport bench_method(const std::string& method, const std::vector<Frame>& inputs, int frames,
                          int warmup, const std::function<void(const Frame&)>& fn,
                          std::uint64_t macs) {
    if (inputs.empty()) throw Error("bench_method: no input frames");
    if (frames < 1) throw Error("bench_method: need at least one measured frame");

    SingleThreadScope single;  // timing stability: one worker only
    auto next = [&, i = std::size_t{0}]() mutable -> const Frame& {
        const Frame& f = inputs[i % inputs.size()];
        ++i;
        return f;
    };
    for (int i = 0; i < warmup; ++i) fn(next());
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < frames; ++i) fn(next());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    return TimingReport{method,  inputs[0].width,          inputs[0].height, frames,
                        warmup,  secs / static_cast<double>(frames), macs};
}

void write_timing_csv(std::ostream& os, const std::vector<TimingReport>& reports) {
    os << "resolution,method,frames,warmup,mean_seconds,macs\n";
    char buf[160];
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%dx%d,%s,%d,%d,%.6f,%llu\n", r.width, r.height,
                      r.method.c_str(), r.frames, r.warmup, r.mean_seconds,
                      static_cast<unsigned long long>(r.macs));
        os << buf;
    }
}

void write_timing_table(std::ostream& os, const std::vector<TimingReport>& reports) {
    os << "resolution    method                mean (s)      MACs\n";
    char buf[160];
    for (const auto& r : reports) {
        char res[32];
        std::snprintf(res, sizeof res, "%dx%d", r.width, r.height);
        std::snprintf(buf, sizeof buf, "%-12s  %-20s  %10.6f  %12llu\n", res, r.method.c_str(),
                      r.mean_seconds, static_cast<unsigned long long>(r.macs));
        os << buf;
    }
}

}  // namespace dinw
