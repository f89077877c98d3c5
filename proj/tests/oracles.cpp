#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

namespace {

double pad_fetch(const dinw::Tensor& x, std::int64_t n, std::int64_t c, std::int64_t y,
                 std::int64_t ix, bool replicate) {
    if (replicate) {
        y = std::clamp<std::int64_t>(y, 0, x.height() - 1);
        ix = std::clamp<std::int64_t>(ix, 0, x.width() - 1);
    } else if (y < 0 || y >= x.height() || ix < 0 || ix >= x.width()) {
        return 0.0;
    }
    return static_cast<double>(x.at(n, c, y, ix));
}

}  // namespace

dinw::Tensor conv2d(const dinw::Tensor& x, const dinw::Tensor& w, const std::vector<float>& bias,
                    int stride_h, bool replicate_pad) {
    const std::int64_t out_c = w.shape()[0];
    const std::int64_t in_c = w.shape()[1];
    const std::int64_t kh = w.shape()[2];
    const std::int64_t kw = w.shape()[3];
    const std::int64_t out_h = (x.height() + stride_h - 1) / stride_h;
    const std::int64_t out_w = x.width();

    const std::int64_t pad_h = std::max<std::int64_t>(0, (out_h - 1) * stride_h + kh - x.height());
    const std::int64_t pad_w = std::max<std::int64_t>(0, kw - 1);
    const std::int64_t pt = pad_h / 2;
    const std::int64_t pl = pad_w / 2;

    dinw::Tensor out({x.batch(), out_c, out_h, out_w});
    for (std::int64_t n = 0; n < x.batch(); ++n) {
        for (std::int64_t oc = 0; oc < out_c; ++oc) {
            for (std::int64_t oy = 0; oy < out_h; ++oy) {
                for (std::int64_t ox = 0; ox < out_w; ++ox) {
                    double acc = bias[static_cast<std::size_t>(oc)];
                    for (std::int64_t ic = 0; ic < in_c; ++ic) {
                        for (std::int64_t r = 0; r < kh; ++r) {
                            for (std::int64_t s = 0; s < kw; ++s) {
                                acc += static_cast<double>(w.at(oc, ic, r, s)) *
                                       pad_fetch(x, n, ic, oy * stride_h - pt + r, ox - pl + s,
                                                 replicate_pad);
                            }
                        }
                    }
                    out.at(n, oc, oy, ox) = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

double total_variation(const dinw::Tensor& image) {
    double total = 0.0;
    for (std::int64_t n = 0; n < image.batch(); ++n) {
        for (std::int64_t y = 0; y < image.height(); ++y) {
            for (std::int64_t x = 0; x < image.width(); ++x) {
                if (x + 1 < image.width()) {
                    const double d = static_cast<double>(image.at(n, 0, y, x + 1)) -
                                     static_cast<double>(image.at(n, 0, y, x));
                    total += d * d;
                }
                if (y + 1 < image.height()) {
                    const double d = static_cast<double>(image.at(n, 0, y + 1, x)) -
                                     static_cast<double>(image.at(n, 0, y, x));
                    total += d * d;
                }
            }
        }
    }
    return total;
}

double psnr(const dinw::Frame& a, const dinw::Frame& b) {
    double se = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        se += d * d;
    }
    if (se == 0.0) return 99.0;
    const double mse = se / static_cast<double>(a.data.size());
    return std::min(99.0, -10.0 * std::log10(mse));
}

double ssim(const dinw::Frame& a, const dinw::Frame& b) {
    constexpr int win = 11;
    constexpr double sigma = 1.5;
    constexpr double c1 = 0.0001;
    constexpr double c2 = 0.0009;

    double g[win][win];
    double gsum = 0.0;
    for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
            const double dy = i - 5.0;
            const double dx = j - 5.0;
            g[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            gsum += g[i][j];
        }
    }
    for (auto& row : g) {
        for (double& v : row) v /= gsum;
    }

    double total = 0.0;
    std::int64_t count = 0;
    for (int y = 0; y + win <= a.height; ++y) {
        for (int x = 0; x + win <= a.width; ++x) {
            double ma = 0.0, mb = 0.0;
            for (int i = 0; i < win; ++i) {
                for (int j = 0; j < win; ++j) {
                    ma += g[i][j] * a.at(0, y + i, x + j);
                    mb += g[i][j] * b.at(0, y + i, x + j);
                }
            }
            double va = 0.0, vb = 0.0, cov = 0.0;
            for (int i = 0; i < win; ++i) {
                for (int j = 0; j < win; ++j) {
                    const double da = a.at(0, y + i, x + j) - ma;
                    const double db = b.at(0, y + i, x + j) - mb;
                    va += g[i][j] * da * da;
                    vb += g[i][j] * db * db;
                    cov += g[i][j] * da * db;
                }
            }
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

double lab_L(double r, double g, double b) {
    auto lin = [](double c) {
        return c > 0.04045 ? std::pow((c + 0.055) / 1.055, 2.4) : c / 12.92;
    };
    const double y = 0.212671 * lin(r) + 0.715160 * lin(g) + 0.072169 * lin(b);
    const double t = y / 1.0;
    const double f = t > 0.008856 ? std::cbrt(t) : 7.787 * t + 16.0 / 116.0;
    return (116.0 * f - 16.0) / 100.0;
}

dinw::Frame bob_bicubic(const dinw::Field& field) {
    // Catmull-Rom kernel (a = -1/2) evaluated at distances 1.5, 0.5, 0.5, 1.5.
    auto kernel = [](double t) {
        const double a = -0.5;
        t = std::fabs(t);
        if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
        if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
        return 0.0;
    };
    const double w0 = kernel(1.5), w1 = kernel(0.5), w2 = kernel(0.5), w3 = kernel(1.5);

    const int off = dinw::row_offset(field.parity);
    dinw::Frame out(field.width, field.height * 2, field.channels);
    for (int c = 0; c < field.channels; ++c) {
        for (int y = 0; y < out.height; ++y) {
            if ((y - off) % 2 == 0 && y >= off) {
                for (int x = 0; x < field.width; ++x) {
                    out.at(c, y, x) = field.row(c, (y - off) / 2)[x];
                }
                continue;
            }
            const int j = y >= off ? (y - off - 1) / 2 : -1;
            auto tap = [&](int idx) {
                return field.row(c, std::clamp(idx, 0, field.height - 1));
            };
            const float* p0 = tap(j - 1);
            const float* p1 = tap(j);
            const float* p2 = tap(j + 1);
            const float* p3 = tap(j + 2);
            for (int x = 0; x < field.width; ++x) {
                out.at(c, y, x) =
                    static_cast<float>(w0 * p0[x] + w1 * p1[x] + w2 * p2[x] + w3 * p3[x]);
            }
        }
    }
    return out;
}

int ela_direction(const float* up, const float* down, int x, int width) {
    auto col = [width](int v) { return std::clamp(v, 0, width - 1); };
    const double d[3] = {
        std::fabs(static_cast<double>(up[col(x - 1)]) - down[col(x + 1)]),
        std::fabs(static_cast<double>(up[x]) - down[x]),
        std::fabs(static_cast<double>(up[col(x + 1)]) - down[col(x - 1)]),
    };
    if (d[1] <= d[0] && d[1] <= d[2]) return 1;
    return d[0] <= d[2] ? 0 : 2;
}

GradCheck grad_check(const std::function<double()>& f, float* params, std::int64_t count,
                     const float* analytic, double h, double rtol, double atol) {
    GradCheck result;
    for (std::int64_t i = 0; i < count; ++i) {
        const float saved = params[i];
        params[i] = static_cast<float>(saved + h);
        const double fp = f();
        params[i] = static_cast<float>(saved - h);
        const double fm = f();
        params[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double a = analytic[i];
        const double diff = std::fabs(a - fd);
        const double denom = std::max(std::fabs(a), std::fabs(fd));
        result.max_abs_diff = std::max(result.max_abs_diff, diff);
        if (denom > 0.0) result.max_rel = std::max(result.max_rel, diff / denom);
        if (diff > rtol * denom + atol) result.pass = false;
    }
    return result;
}

std::uint64_t next_rand(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

float grid_uniform(std::uint64_t& state, float lo, float hi) {
    const double u = static_cast<double>(next_rand(state) >> 11) * 0x1.0p-53;
    const double v = lo + (hi - lo) * u;
    return static_cast<float>(std::round(v * 64.0) / 64.0);
}

}  // namespace oracle
