#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

#include "etchprobe/common.hpp"
#include "etchprobe/curve.hpp"
#include "etchprobe/detail/fft.hpp"

namespace etchprobe {

/// da/dz on a uniform lattice in z = ln t. Sample i sits at z0 + i*dz.
struct DerivativeCurve {
    double z0 = 0.0;
    double dz = 0.0;
    std::vector<double> value;
    std::string device;
    std::string label;

    std::size_t size() const { return value.size(); }
    double z_at(std::size_t i) const { return z0 + static_cast<double>(i) * dz; }

    double max_abs() const {
        double m = 0.0;
        for (double v : value)
            m = std::max(m, std::abs(v));
        return m;
    }
};

/// Time constant spectrum R(z): density of thermal resistance per unit ln tau.
/// mass() integrates to the total resistance of the fitted response.
struct TimeConstantSpectrum {
    double z0 = 0.0;
    double dz = 0.0;
    std::vector<double> density;
    double reconvolution_rms_rel = 0.0; // reconvolution misfit / peak input
    bool degenerate_zero = false;       // input had no usable signal

    double z_at(std::size_t i) const { return z0 + static_cast<double>(i) * dz; }

    double mass() const {
        double m = 0.0;
        for (double v : density)
            m += v;
        return m * dz;
    }

    /// Mass centroid as log10(tau), meaningful only for nonzero mass.
    double centroid_log10_tau() const {
        double m = 0.0, mz = 0.0;
        for (std::size_t i = 0; i < density.size(); ++i) {
            m += density[i];
            mz += density[i] * z_at(i);
        }
        if (!(m > 0.0))
            throw SolverError("spectrum centroid of an empty spectrum");
        return (mz / m) / std::numbers::ln10;
    }
};

/// Smoothed da/dz by local quadratic least squares over `window` lattice
/// points (one sided near the ends). The curve must already sit on a uniform
/// ln t lattice; resample_log provides that.
inline DerivativeCurve smooth_derivative(const TransientCurve& curve, int window = 21) {
    curve.validate();
    if (window < 5 || window % 2 == 0)
        throw ConfigError("smooth_derivative: window must be odd and at least 5");
    const int n = static_cast<int>(curve.size());
    if (n < window)
        throw ConfigError("smooth_derivative: curve shorter than the window");
    const double dz = curve.log_spacing();
    if (dz == 0.0)
        throw ConfigError("smooth_derivative: curve is not on a uniform log-time lattice");

    DerivativeCurve out;
    out.z0 = std::log(curve.samples.front().t);
    out.dz = dz;
    out.device = curve.device;
    out.label = curve.label;
    out.value.resize(n);

    for (int i = 0; i < n; ++i) {
        const int w0 = std::clamp(i - window / 2, 0, n - window);
        // Quadratic fit v(u) = a + b u + c u^2 over offsets u = j - i; the
        // smoothed derivative at the point is b / dz.
        double s[5] = {0, 0, 0, 0, 0};
        double m[3] = {0, 0, 0};
        for (int j = w0; j < w0 + window; ++j) {
            const double u = j - i;
            const double v = curve.samples[j].value;
            double up = 1.0;
            for (int k = 0; k < 5; ++k) {
                s[k] += up;
                if (k < 3)
                    m[k] += up * v;
                up *= u;
            }
        }
        Eigen::Matrix3d A;
        A << s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4];
        const Eigen::Vector3d rhs(m[0], m[1], m[2]);
        const Eigen::Vector3d coef = A.fullPivLu().solve(rhs);
        out.value[i] = coef[1] / dz;
    }
    return out;
}

/// Iterative multiplicative deconvolution of d(z) = R(z) (*) w(z) with the
/// fixed kernel w(z) = exp(z - exp(z)). Nonnegative input is assumed; any
/// negative entries are clipped. The estimate stays nonnegative throughout.
/// An all-zero input short-circuits to a flagged zero spectrum.
inline TimeConstantSpectrum deconvolve_spectrum(const DerivativeCurve& d, int iterations = 500) {
    if (d.size() < 2)
        throw ConfigError("deconvolve_spectrum: need at least 2 derivative samples");
    if (!(d.dz > 0.0))
        throw ConfigError("deconvolve_spectrum: invalid lattice spacing");
    if (iterations < 1)
        throw ConfigError("deconvolve_spectrum: iterations must be positive");

    const int n = static_cast<int>(d.size());
    std::vector<double> data(n);
    double peak = 0.0;
    for (int i = 0; i < n; ++i) {
        data[i] = std::max(d.value[i], 0.0);
        peak = std::max(peak, data[i]);
    }

    // Bins this far below the peak carry no recoverable signal; the FFT noise
    // floor of the convolutions sits around 1e-12 of the peak, so their ratios
    // would be rounding junk that destabilizes the multiplicative updates.
    // Treating them as exact zeros keeps the iteration well behaved.
    const double support_floor = 1e-10 * peak;
    for (int i = 0; i < n; ++i)
        if (data[i] < support_floor)
            data[i] = 0.0;

    TimeConstantSpectrum spec;
    spec.z0 = d.z0;
    spec.dz = d.dz;
    spec.density.assign(n, 0.0);
    if (peak == 0.0) {
        spec.degenerate_zero = true;
        return spec;
    }

    const std::size_t nfft = detail::next_pow2(static_cast<std::size_t>(2 * n));
    detail::Fft fft(nfft);
    using Cv = std::vector<std::complex<double>>;

    Cv kernel(nfft, 0.0);
    for (int mlag = -(n - 1); mlag <= n - 1; ++mlag) {
        const double z = mlag * d.dz;
        const std::size_t idx = static_cast<std::size_t>((mlag + static_cast<int>(nfft)) %
                                                         static_cast<int>(nfft));
        kernel[idx] = std::exp(z - std::exp(z)) * d.dz;
    }
    fft.forward(kernel);

    // Per-bin kernel mass inside the window, for edge-corrected updates.
    Cv norm(nfft, 0.0);
    for (int i = 0; i < n; ++i)
        norm[i] = 1.0;
    fft.forward(norm);
    for (std::size_t i = 0; i < nfft; ++i)
        norm[i] *= std::conj(kernel[i]);
    fft.inverse(norm);

    std::vector<double> density(n), conv(n);
    for (int i = 0; i < n; ++i)
        density[i] = std::max(data[i], 1e-9 * peak);

    Cv buf(nfft);
    auto convolve = [&](const std::vector<double>& src, bool correlate,
                        std::vector<double>& dst) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0));
        for (int i = 0; i < n; ++i)
            buf[i] = src[i];
        fft.forward(buf);
        for (std::size_t i = 0; i < nfft; ++i)
            buf[i] *= correlate ? std::conj(kernel[i]) : kernel[i];
        fft.inverse(buf);
        for (int i = 0; i < n; ++i)
            dst[i] = buf[i].real();
    };

    // Zero-data bins get a zero ratio (they only push density down, which is
    // stable); elsewhere the model value is floored relative to the peak so a
    // conv sample swamped by FFT rounding noise cannot produce a huge ratio.
    const double conv_floor = 1e-12 * peak;
    std::vector<double> ratio(n), corr(n);
    for (int it = 0; it < iterations; ++it) {
        convolve(density, false, conv);
        for (int i = 0; i < n; ++i)
            ratio[i] = data[i] > 0.0 ? data[i] / std::max(conv[i], conv_floor) : 0.0;
        convolve(ratio, true, corr);
        for (int i = 0; i < n; ++i) {
            const double nrm = norm[i].real();
            const double gain = nrm > 0.0 ? std::clamp(corr[i] / nrm, 0.0, 1e3) : 0.0;
            density[i] *= gain;
        }
    }

    convolve(density, false, conv);
    double sq = 0.0;
    for (int i = 0; i < n; ++i)
        sq += (conv[i] - data[i]) * (conv[i] - data[i]);
    spec.reconvolution_rms_rel = std::sqrt(sq / n) / peak;
    spec.density = std::move(density);
    return spec;
}

/// Log-time offset between two transients, in decades, from the normalized
/// cross correlation of their smoothed derivatives. Positive means the
/// candidate's features occur earlier than the reference's. Works across
/// different amplitudes because each derivative is normalized to unit peak.
inline double estimate_shift(const TransientCurve& reference, const TransientCurve& candidate,
                             int window = 21) {
    const DerivativeCurve da = smooth_derivative(reference, window);
    const DerivativeCurve db = smooth_derivative(candidate, window);
    if (!nearly_equal(da.dz, db.dz, 1e-4))
        throw ConfigError("estimate_shift: curves have different lattice densities, "
                          "resample them together first");
    const double dz = da.dz;

    // A derivative counts as flat when its peak is negligible against the
    // curve's own amplitude; a constant input leaves only rounding residue in
    // the fitted slopes, orders of magnitude below any real decay feature.
    const double pa = da.max_abs();
    const double pb = db.max_abs();
    const bool flat_a = pa <= 1e-9 * reference.max_abs_value();
    const bool flat_b = pb <= 1e-9 * candidate.max_abs_value();
    if (flat_a && flat_b)
        return 0.0; // two flat curves coincide by convention
    if (flat_a || flat_b)
        throw ConfigError("estimate_shift: one curve is flat");

    const int na = static_cast<int>(da.size());
    const int nb = static_cast<int>(db.size());
    std::vector<double> sa(na), sb(nb);
    for (int i = 0; i < na; ++i)
        sa[i] = da.value[i] / pa;
    for (int i = 0; i < nb; ++i)
        sb[i] = db.value[i] / pb;

    const int min_overlap = std::max(window, std::min(na, nb) / 4);
    const int lag_lo = -(nb - min_overlap);
    const int lag_hi = na - min_overlap;
    if (lag_lo > lag_hi)
        throw ConfigError("estimate_shift: curves too short to overlap");

    double best_score = -2.0;
    int best_lag = 0;
    std::vector<double> scores(lag_hi - lag_lo + 1, -2.0);
    for (int lag = lag_lo; lag <= lag_hi; ++lag) {
        const int jb0 = std::max(0, -lag);
        const int jb1 = std::min(nb, na - lag);
        double dot = 0.0, qa = 0.0, qb = 0.0;
        for (int j = jb0; j < jb1; ++j) {
            const double va = sa[j + lag];
            const double vb = sb[j];
            dot += va * vb;
            qa += va * va;
            qb += vb * vb;
        }
        if (!(qa > 0.0) || !(qb > 0.0))
            continue;
        const double score = dot / std::sqrt(qa * qb);
        scores[lag - lag_lo] = score;
        if (score > best_score) {
            best_score = score;
            best_lag = lag;
        }
    }
    if (best_score <= -2.0)
        throw ConfigError("estimate_shift: no usable lag overlap");

    // Parabolic refinement between integer lags.
    double frac = 0.0;
    const int k = best_lag - lag_lo;
    if (k > 0 && k + 1 < static_cast<int>(scores.size()) && scores[k - 1] > -2.0 &&
        scores[k + 1] > -2.0) {
        const double denom = scores[k - 1] - 2.0 * scores[k] + scores[k + 1];
        if (denom < 0.0)
            frac = std::clamp(0.5 * (scores[k - 1] - scores[k + 1]) / denom, -0.5, 0.5);
    }

    const double shift_z = (da.z0 - db.z0) + (best_lag + frac) * dz;
    return shift_z / std::numbers::ln10;
}

} // namespace etchprobe
