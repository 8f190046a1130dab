#include "qres/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qres/csv.hpp"
#include "qres/error.hpp"
#include "qres/simd/kernels.hpp"

namespace qres::denoise {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Least-squares fit operator of the window: coefficients = fit * samples,
// with offsets scaled to [-1, 1] for conditioning.
Matrix window_fit_operator(const FilterSpec& spec) {
    const Index h = spec.window / 2;
    const double scale = h > 0 ? 1.0 / static_cast<double>(h) : 1.0;
    Matrix vander(spec.window, spec.poly_order + 1);
    for (Index i = 0; i < spec.window; ++i) {
        const double x = static_cast<double>(i - h) * scale;
        double power = 1.0;
        for (Index k = 0; k <= spec.poly_order; ++k) {
            vander(i, k) = power;
            power *= x;
        }
    }
    return vander.colPivHouseholderQr().solve(Matrix::Identity(spec.window, spec.window));
}

std::string svd_label(const SvdSpec& spec) {
    return std::visit(
        overloaded{[](const FixedRank& s) { return "svd-rank" + std::to_string(s.rank); },
                   [](const EnergyFraction& s) { return "svd-energy" + csv::format_double(s.eta); },
                   [](const NoiseFloor& s) { return "svd-floor" + csv::format_double(s.tau); }},
        spec);
}

}  // namespace

void validate(const SvdSpec& spec) {
    std::visit(overloaded{[](const FixedRank& s) {
                              if (s.rank < 1) throw InvalidInput("svd: rank must be >= 1");
                          },
                          [](const EnergyFraction& s) {
                              if (!(s.eta > 0.0 && s.eta <= 1.0))
                                  throw InvalidInput("svd: energy fraction must lie in (0, 1]");
                          },
                          [](const NoiseFloor& s) {
                              if (!(s.tau > 0.0)) throw InvalidInput("svd: tau must be > 0");
                          }},
               spec);
}

void FilterSpec::validate() const {
    if (window < 3 || window % 2 == 0) throw InvalidInput("filter: window must be odd and >= 3");
    if (poly_order < 0 || poly_order > window - 1) {
        throw InvalidInput("filter: poly_order must lie in [0, window - 1]");
    }
}

Index cutoff_rank(const Vector& sigma, const SvdSpec& spec) {
    validate(spec);
    const Index n = sigma.size();
    if (n == 0) return 0;
    const Index k = std::visit(
        overloaded{[&](const FixedRank& s) { return std::min(s.rank, n); },
                   [&](const EnergyFraction& s) {
                       const double total = sigma.squaredNorm();
                       double acc = 0.0;
                       for (Index i = 0; i < n; ++i) {
                           acc += sigma[i] * sigma[i];
                           if (acc >= s.eta * total) return i + 1;
                       }
                       return n;
                   },
                   [&](const NoiseFloor& s) {
                       std::vector<double> sorted(sigma.data(), sigma.data() + n);
                       std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
                       double median = sorted[static_cast<std::size_t>(n / 2)];
                       if (n % 2 == 0) {
                           const double lower =
                               *std::max_element(sorted.begin(), sorted.begin() + n / 2);
                           median = 0.5 * (median + lower);
                       }
                       const double floor = s.tau * median;
                       Index keep = 0;
                       while (keep < n && sigma[keep] >= floor) ++keep;
                       return keep;
                   }},
        spec);
    return std::max<Index>(k, 1);
}

SvdTruncation svd_truncate(const Matrix& r, const SvdSpec& spec) {
    if (r.size() == 0) throw InvalidInput("svd_truncate: empty matrix");
    if (!r.allFinite()) throw NumericalError("svd_truncate: matrix has non-finite entries");
    Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "svd_truncate: SVD did not converge for a " << r.rows() << "x" << r.cols()
            << " matrix (Frobenius norm " << r.norm() << ", max |entry| "
            << r.cwiseAbs().maxCoeff() << ")";
        throw NumericalError(msg.str());
    }
    SvdTruncation out;
    out.singular_values = svd.singularValues();
    out.rank = cutoff_rank(out.singular_values, spec);
    const Index k = out.rank;
    out.reconstruction = svd.matrixU().leftCols(k) * out.singular_values.head(k).asDiagonal() *
                         svd.matrixV().leftCols(k).transpose();
    return out;
}

reservoir::ReservoirMatrix svd_truncate(const reservoir::ReservoirMatrix& r, const SvdSpec& spec) {
    return r.with_values(svd_truncate(r.values(), spec).reconstruction);
}

Vector savgol_taps(const FilterSpec& spec, Index offset) {
    spec.validate();
    const Index h = spec.window / 2;
    if (offset < -h || offset > h) throw InvalidInput("savgol_taps: offset outside the window");
    const Matrix fit = window_fit_operator(spec);
    const double x = static_cast<double>(offset) / static_cast<double>(h);
    Vector eval(spec.poly_order + 1);
    double power = 1.0;
    for (Index k = 0; k <= spec.poly_order; ++k) {
        eval[k] = power;
        power *= x;
    }
    return fit.transpose() * eval;
}

Vector savgol_smooth(const Vector& signal, const FilterSpec& spec) {
    spec.validate();
    const Index n = signal.size();
    const Index w = spec.window;
    if (n < w) {
        throw InvalidInput("savgol_smooth: signal of length " + std::to_string(n) +
                           " is shorter than the window (" + std::to_string(w) + ")");
    }
    const Index h = w / 2;
    const Matrix fit = window_fit_operator(spec);
    Vector out(n);

    const Vector centre = savgol_taps(spec, 0);
    simd::kernels().centered_correlate(signal.data(), static_cast<std::size_t>(n), centre.data(),
                                       static_cast<std::size_t>(w), out.data() + h);

    // Edges: evaluate the first/last window fit away from its centre, in the
    // same reference-shifted form as the interior.
    for (Index j = 0; j < h; ++j) {
        const double x = static_cast<double>(j - h) / static_cast<double>(h);
        Vector eval(spec.poly_order + 1);
        double power = 1.0;
        for (Index k = 0; k <= spec.poly_order; ++k) {
            eval[k] = power;
            power *= x;
        }
        const Vector taps = fit.transpose() * eval;
        const Index head = j;
        const Index tail = n - 1 - j;
        double acc_head = 0.0, acc_tail = 0.0;
        for (Index i = 0; i < w; ++i) {
            acc_head += taps[i] * (signal[i] - signal[head]);
            // Mirror: position tail sits at offset h - j from the last window's centre.
            acc_tail += taps[w - 1 - i] * (signal[n - w + i] - signal[tail]);
        }
        out[head] = signal[head] + acc_head;
        out[tail] = signal[tail] + acc_tail;
    }
    return out;
}

std::string label(const DenoiseMethod& method) {
    return std::visit(overloaded{[](const SvdMethod& m) { return svd_label(m.spec); },
                                 [](const FilterMethod& m) {
                                     return "savgol-w" + std::to_string(m.spec.window) + "-p" +
                                            std::to_string(m.spec.poly_order);
                                 }},
                      method);
}

Matrix denoise_matrix(const Matrix& r, const DenoiseMethod& method) {
    return std::visit(overloaded{[&](const SvdMethod& m) { return svd_truncate(r, m.spec).reconstruction; },
                                 [&](const FilterMethod& m) {
                                     Matrix out(r.rows(), r.cols());
                                     for (Index i = 0; i < r.rows(); ++i) {
                                         out.row(i) = savgol_smooth(r.row(i).transpose(), m.spec).transpose();
                                     }
                                     return out;
                                 }},
                      method);
}

reservoir::ReservoirMatrix denoise_reservoir(const reservoir::ReservoirMatrix& r,
                                             const DenoiseMethod& method) {
    return r.with_values(denoise_matrix(r.values(), method));
}

}  // namespace qres::denoise
