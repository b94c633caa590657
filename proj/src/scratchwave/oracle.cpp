#include "scratchwave/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include "scratchwave/bvh.hpp"
#include "scratchwave/error.hpp"

namespace scratchwave {

HeightfieldGrid rasterize(std::span<const ScratchSegment> segments, const GridSpec& spec) {
    if (spec.resolution < 1 || !(spec.extent > 0.0)) fail(ErrorCode::InvalidArgument, "invalid oracle grid");
    const int n = spec.resolution;
    const double cell = spec.cell();
    HeightfieldGrid grid;
    grid.spec = spec;
    grid.heights.assign(static_cast<size_t>(n) * n, 0.0);
    grid.covered.assign(static_cast<size_t>(n) * n, 0);

    auto index_lo = [&](double x) { return std::clamp(static_cast<int>(std::floor((x + 0.5 * spec.extent) / cell - 0.5)), 0, n - 1); };
    auto index_hi = [&](double x) { return std::clamp(static_cast<int>(std::ceil((x + 0.5 * spec.extent) / cell - 0.5)), 0, n - 1); };

    for (const auto& s : segments) {
        validate(s);
        const Vec2 d = s.p1 - s.p0;
        const double len = s.length();
        const Vec2 t = d * (1.0 / len);
        const Vec2 b{-t.y, t.x};
        const Vec2 mid = s.midpoint();
        const double half_w = 0.5 * s.width;
        const double pad = half_w + cell;
        // Cell centers often land exactly on a scratch edge; the tolerance
        // keeps the half-open rule from flipping with rounding.
        const double eps = 1e-9 * cell;
        const int x_lo = index_lo(std::min(s.p0.x, s.p1.x) - pad);
        const int x_hi = index_hi(std::max(s.p0.x, s.p1.x) + pad);
        const int y_lo = index_lo(std::min(s.p0.y, s.p1.y) - pad);
        const int y_hi = index_hi(std::max(s.p0.y, s.p1.y) + pad);
        for (int iy = y_lo; iy <= y_hi; ++iy) {
            for (int ix = x_lo; ix <= x_hi; ++ix) {
                const Vec2 r = Vec2{spec.center(ix), spec.center(iy)} - mid;
                const double tt = dot(r, t);
                const double bb = dot(r, b);
                if (std::abs(tt) > 0.5 * len + eps || bb < -half_w - eps || bb >= half_w - eps) continue;
                double depth = s.depth;
                if (s.profile == ProfileKind::Triangle) depth *= 1.0 - std::abs(bb) / half_w;
                const size_t k = static_cast<size_t>(iy) * n + ix;
                grid.heights[k] = std::min(grid.heights[k], -depth);
                grid.covered[k] = 1;
            }
        }
    }
    return grid;
}

TransferGrid transfer_function(const HeightfieldGrid& hf, double lambda, const MaterialParams& material) {
    if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "wavelength must be positive");
    TransferGrid out;
    out.spec = hf.spec;
    out.values.resize(hf.heights.size());
    for (size_t k = 0; k < hf.heights.size(); ++k) {
        const double a = hf.covered[k] ? material.a_scratch : material.a_base;
        const double phi = 4.0 * kPi * hf.heights[k] / lambda;
        out.values[k] = a * Complex(std::cos(phi), std::sin(phi));
    }
    return out;
}

bool RadianceGrid::evanescent(int kx, int ky) const {
    const double a = lambda * xi_of(kx) - omega_i.alpha;
    const double b = lambda * xi_of(ky) - omega_i.beta;
    return a * a + b * b > 1.0;
}

double RadianceGrid::sample(double xi1, double xi2) const {
    const double u = xi1 / dxi + size / 2;
    const double v = xi2 / dxi + size / 2;
    const int i = static_cast<int>(std::floor(u));
    const int j = static_cast<int>(std::floor(v));
    if (i < 0 || j < 0 || i >= size || j >= size) return 0.0;
    const double fu = u - i;
    const double fv = v - j;
    const int i1 = std::min(i + 1, size - 1);
    const int j1 = std::min(j + 1, size - 1);
    return (1 - fu) * (1 - fv) * at(i, j) + fu * (1 - fv) * at(i1, j) + (1 - fu) * fv * at(i, j1) + fu * fv * at(i1, j1);
}

namespace {

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace

RadianceGrid fft_radiance(const TransferGrid& transfer, const CoherenceKernel& kernel, Vec2 x0,
                          const DirectionCosines& omega_i, double lambda, const FftOptions& options) {
    const GridSpec& spec = transfer.spec;
    const int n = spec.resolution;
    const double cell = spec.cell();
    const double sigma = kernel.sigma();
    if (sigma < 4.0 * cell) fail(ErrorCode::WindowTruncation, "coherence sigma spans fewer than 4 grid cells");
    const double reach = 4.0 * sigma;
    const double half = 0.5 * spec.extent;
    if (std::abs(x0.x) + reach > half || std::abs(x0.y) + reach > half) {
        fail(ErrorCode::WindowTruncation, "coherence window extends past the oracle grid");
    }
    if (options.padding < 1) fail(ErrorCode::InvalidArgument, "padding factor must be at least 1");
    if (!(omega_i.gamma > 0.0)) fail(ErrorCode::BelowHorizon, "incident direction below the horizon");

    const int m = n * options.padding;
    const size_t total = static_cast<size_t>(m) * m;
    std::unique_ptr<fftw_complex[], FftwFree> buf(fftw_alloc_complex(total));
    if (!buf) fail(ErrorCode::Internal, "FFT buffer allocation failed");
    std::fill_n(&buf[0][0], 2 * total, 0.0);

    RadianceGrid out;
    out.size = m;
    out.dxi = 1.0 / (m * cell);
    out.lambda = lambda;
    out.omega_i = omega_i;

    const double inv2s2 = 0.5 / (sigma * sigma);
    double spatial = 0.0;
    for (int iy = 0; iy < n; ++iy) {
        const double dy = spec.center(iy) - x0.y;
        const double gy = std::exp(-dy * dy * inv2s2);
        for (int ix = 0; ix < n; ++ix) {
            const double dx = spec.center(ix) - x0.x;
            const Complex v = transfer.values[static_cast<size_t>(iy) * n + ix] * (gy * std::exp(-dx * dx * inv2s2));
            buf[static_cast<size_t>(iy) * m + ix][0] = v.real();
            buf[static_cast<size_t>(iy) * m + ix][1] = v.imag();
            spatial += std::norm(v);
        }
    }
    out.parseval_spatial = spatial * cell * cell;

    fftw_plan plan = fftw_plan_dft_2d(m, m, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    const double cell2 = cell * cell;
    const double scale = omega_i.gamma * options.fresnel / (kernel.shading_area() * lambda * lambda);
    out.values.resize(total);
    double spectral = 0.0;
    for (int ky = 0; ky < m; ++ky) {
        const int sy = (ky + m / 2) % m;
        for (int kx = 0; kx < m; ++kx) {
            const int sx = (kx + m / 2) % m;
            const auto& c = buf[static_cast<size_t>(ky) * m + kx];
            const double mag2 = (c[0] * c[0] + c[1] * c[1]) * cell2 * cell2;
            spectral += mag2;
            out.values[static_cast<size_t>(sy) * m + sx] = scale * mag2;
        }
    }
    out.parseval_spectral = spectral * out.dxi * out.dxi;
    return out;
}

Slices extract_slices(const RadianceGrid& radiance, Vec2 tangent, const AnalyticEvaluator& analytic) {
    const double len = length(tangent);
    if (!(len > 0.0)) fail(ErrorCode::InvalidArgument, "slice axis must be nonzero");
    const Vec2 t = tangent * (1.0 / len);
    const Vec2 b{-t.y, t.x};
    const int reach = radiance.size / 2 - 1;
    auto fill = [&](Vec2 axis) {
        Slice s;
        for (int k = -reach; k <= reach; ++k) {
            const double x = k * radiance.dxi;
            const double xi1 = x * axis.x;
            const double xi2 = x * axis.y;
            const double a = radiance.lambda * xi1 - radiance.omega_i.alpha;
            const double bb = radiance.lambda * xi2 - radiance.omega_i.beta;
            if (a * a + bb * bb >= 1.0) continue;
            s.xi.push_back(x);
            s.numeric.push_back(radiance.sample(xi1, xi2));
            s.analytic.push_back(analytic ? analytic({xi1, xi2, 0.0}) : 0.0);
        }
        return s;
    };
    return {fill(t), fill(b)};
}

namespace {

// P(X >= k) for X ~ Binomial(n, 1/2).
double binomial_upper_tail(int n, int k) {
    if (k <= 0) return 1.0;
    double p = 0.0;
    for (int j = k; j <= n; ++j) {
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) - n * std::log(2.0));
    }
    return std::min(p, 1.0);
}

}  // namespace

ErrorReport compare(const Slice& slice, double lo, double hi) {
    ErrorReport r;
    double num = 0.0;
    double den = 0.0;
    double peak = 0.0;
    double worst = 0.0;
    for (size_t i = 0; i < slice.xi.size(); ++i) {
        const double x = std::abs(slice.xi[i]);
        if (x < lo || x > hi) continue;
        const double d = slice.analytic[i] - slice.numeric[i];
        num += d * d;
        den += slice.numeric[i] * slice.numeric[i];
        peak = std::max(peak, slice.numeric[i]);
        worst = std::max(worst, std::abs(d));
        if (slice.analytic[i] <= slice.numeric[i]) ++r.analytic_below;
        ++r.samples;
    }
    if (r.samples == 0) return r;
    r.l2_relative = den > 0.0 ? std::sqrt(num / den) : 0.0;
    r.max_relative = peak > 0.0 ? worst / peak : 0.0;
    r.sign_test_p = binomial_upper_tail(r.samples, r.analytic_below);
    return r;
}

double log_parabola_r2(const Slice& slice, double floor) {
    double peak = 0.0;
    for (double v : slice.numeric) peak = std::max(peak, v);
    if (!(peak > 0.0)) return 0.0;
    // Normal equations in a scaled abscissa.
    double scale = 0.0;
    for (size_t i = 0; i < slice.xi.size(); ++i) {
        if (slice.numeric[i] >= floor * peak) scale = std::max(scale, std::abs(slice.xi[i]));
    }
    if (!(scale > 0.0)) return 0.0;
    double s[5] = {};
    double r[3] = {};
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < slice.xi.size(); ++i) {
        if (slice.numeric[i] < floor * peak) continue;
        const double x = slice.xi[i] / scale;
        const double y = std::log(slice.numeric[i]);
        pts.emplace_back(x, y);
        double p = 1.0;
        for (int k = 0; k < 5; ++k, p *= x) s[k] += p;
        r[0] += y;
        r[1] += x * y;
        r[2] += x * x * y;
    }
    if (pts.size() < 4) return 0.0;
    // Solve [[s0 s1 s2][s1 s2 s3][s2 s3 s4]] c = r by Cramer's rule.
    auto det3 = [](double a, double b, double c, double d, double e, double f, double g, double h, double i) {
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    };
    const double d = det3(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
    if (d == 0.0) return 0.0;
    const double c0 = det3(r[0], s[1], s[2], r[1], s[2], s[3], r[2], s[3], s[4]) / d;
    const double c1 = det3(s[0], r[0], s[2], s[1], r[1], s[3], s[2], r[2], s[4]) / d;
    const double c2 = det3(s[0], s[1], r[0], s[1], s[2], r[1], s[2], s[3], r[2]) / d;
    double mean = 0.0;
    for (const auto& p : pts) mean += p.second;
    mean /= static_cast<double>(pts.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (const auto& [x, y] : pts) {
        const double f = c0 + c1 * x + c2 * x * x;
        ss_res += (y - f) * (y - f);
        ss_tot += (y - mean) * (y - mean);
    }
    return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
}

AnalyticEvaluator make_analytic(std::span<const ScratchSegment> candidates, const CoherenceKernel& kernel,
                                const MaterialParams& material, Vec2 x0, const DirectionCosines& omega_i,
                                double lambda) {
    std::vector<ScratchSegment> list(candidates.begin(), candidates.end());
    return [list = std::move(list), kernel, material, x0, omega_i, lambda](const FrequencyVector& xi) {
        const double a = lambda * xi.xi1 - omega_i.alpha;
        const double b = lambda * xi.xi2 - omega_i.beta;
        if (a * a + b * b >= 1.0) return 0.0;
        const auto wo = DirectionCosines::from_alpha_beta(a, b);
        return eval_brdf_candidates(list, x0, omega_i, wo, lambda, kernel, material).f_r;
    };
}

OracleSummary run_oracle(const OracleRequest& req) {
    const CoherenceKernel kernel(req.sigma);
    validate(req.material);
    const SegmentBvh bvh(req.segments);
    std::vector<ScratchSegment> candidates;
    if (!bvh.empty()) {
        for (auto id : bvh.query_disc(req.x0, default_query_radius(kernel))) candidates.push_back(req.segments[id]);
    }

    OracleSummary out;
    double nearest = INFINITY;
    for (const auto& s : candidates) {
        const double d = point_segment_distance(req.x0, s.p0, s.p1);
        if (d < nearest) {
            nearest = d;
            out.tangent = (s.p1 - s.p0) * (1.0 / s.length());
            out.width = s.width;
        }
    }

    const HeightfieldGrid hf = rasterize(req.segments, req.grid);
    const TransferGrid tf = transfer_function(hf, req.lambda, req.material);
    FftOptions options;
    options.fresnel = req.material.fresnel.schlick(req.lambda, req.omega_i.gamma);
    const RadianceGrid rad = fft_radiance(tf, kernel, req.x0, req.omega_i, req.lambda, options);
    out.parseval_relative = std::abs(rad.parseval_spectral - rad.parseval_spatial) / rad.parseval_spatial;

    const auto analytic = make_analytic(candidates, kernel, req.material, req.x0, req.omega_i, req.lambda);
    out.slices = extract_slices(rad, out.tangent, analytic);

    const double lobe = 3.0 / (std::sqrt(8.0) * kPi * req.sigma);
    out.tangential = compare(out.slices.tangential, 0.0, lobe);
    out.tangential_r2 = log_parabola_r2(out.slices.tangential, kTangentialFitFloor);
    if (out.width > 0.0) {
        out.central_lobe = compare(out.slices.bitangential, 0.0, 0.5 / out.width);
        out.side_lobes = compare(out.slices.bitangential, 1.0 / out.width, INFINITY);
    } else {
        out.central_lobe = compare(out.slices.bitangential, 0.0, lobe);
    }
    return out;
}

namespace {

void write_slice(const Slice& s, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
    std::fprintf(f, "xi,numeric,analytic\n");
    for (size_t i = 0; i < s.xi.size(); ++i) std::fprintf(f, "%.10g,%.10g,%.10g\n", s.xi[i], s.numeric[i], s.analytic[i]);
    if (std::fclose(f) != 0) fail(ErrorCode::Io, "cannot write " + path.string());
}

void write_metrics(std::FILE* f, const char* name, const ErrorReport& r) {
    std::fprintf(f, "%s: samples=%d l2_relative=%.6g max_relative=%.6g analytic_below=%d sign_test_p=%.6g\n", name,
                 r.samples, r.l2_relative, r.max_relative, r.analytic_below, r.sign_test_p);
}

}  // namespace

void write_oracle_report(const OracleSummary& s, const OracleRequest& req, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
    const std::filesystem::path root(dir);
    write_slice(s.slices.tangential, root / "slice_tangential.csv");
    write_slice(s.slices.bitangential, root / "slice_bitangential.csv");
    const auto path = root / "summary.txt";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) fail(ErrorCode::Io, "cannot write " + path.string());
    std::fprintf(f, "segments: %zu\n", req.segments.size());
    std::fprintf(f, "sigma: %.6g m\nlambda: %.6g m\nx0: %.6g %.6g m\n", req.sigma, req.lambda, req.x0.x, req.x0.y);
    std::fprintf(f, "grid: %d cells over %.6g m (cell %.6g m)\n", req.grid.resolution, req.grid.extent, req.grid.cell());
    if (req.grid.cell() > 0.25 * req.lambda) std::fprintf(f, "warning: cell exceeds lambda/4, heightfield undersampled\n");
    std::fprintf(f, "slice tangent: %.9f %.9f\nscratch width: %.6g m\n", s.tangent.x, s.tangent.y, s.width);
    std::fprintf(f, "parseval_relative: %.6g\n", s.parseval_relative);
    std::fprintf(f, "tangential_log_parabola_r2: %.9f\n", s.tangential_r2);
    write_metrics(f, "tangential_lobe", s.tangential);
    write_metrics(f, "bitangential_central_lobe", s.central_lobe);
    write_metrics(f, "bitangential_side_lobes", s.side_lobes);
    if (std::fclose(f) != 0) fail(ErrorCode::Io, "cannot write " + path.string());
}

}  // namespace scratchwave
