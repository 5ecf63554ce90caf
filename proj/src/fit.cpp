#include "kbie/analysis.hpp"
#include "kbie/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kbie {

PowerFit fit_slope(const std::vector<Sample>& samples, std::optional<std::pair<double, double>> window) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
    for (const auto& s : samples) {
        if (window && (s.k < window->first || s.k > window->second)) continue;
        if (!(s.k > 0.0) || !std::isfinite(s.k)) throw DomainError("fit_slope: k must be positive and finite");
        if (!(s.value > 0.0) || !std::isfinite(s.value))
            throw DomainError("fit_slope: values must be positive and finite");
        const double x = std::log(s.k), y = std::log(s.value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        kmin = std::min(kmin, s.k);
        kmax = std::max(kmax, s.k);
        ++m;
    }
    if (m < 3) throw DomainError("fit_slope: need at least 3 samples in the window");
    if (!(kmax > kmin)) throw DomainError("fit_slope: samples need distinct k");
    const double n = static_cast<double>(m);
    const double det = n * sxx - sx * sx;
    PowerFit f;
    f.exponent = (n * sxy - sx * sy) / det;
    f.constant = std::exp((sy - f.exponent * sx) / n);
    return f;
}

PowerFit upper_envelope(const std::vector<Sample>& samples, double exponent) {
    PowerFit f{exponent, 0.0};
    bool any = false;
    for (const auto& s : samples) {
        if (!(s.k > 0.0)) throw DomainError("upper_envelope: k must be positive");
        if (!std::isfinite(s.value)) continue;
        f.constant = std::max(f.constant, s.value / std::pow(s.k, exponent));
        any = true;
    }
    if (!any) throw DomainError("upper_envelope: no finite samples");
    return f;
}

double exclusion_measure(const std::vector<Sample>& samples, const PowerFit& envelope) {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].k > samples[i - 1].k)) throw DomainError("exclusion_measure: samples must be sorted in k");
    auto excess = [&](const Sample& s) {
        if (std::isnan(s.value)) throw DomainError("exclusion_measure: NaN value");
        return s.value - envelope.constant * std::pow(s.k, envelope.exponent);
    };
    double measure = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double h = samples[i].k - samples[i - 1].k;
        const double a = excess(samples[i - 1]), b = excess(samples[i]);
        if (a > 0.0 && b > 0.0) {
            measure += h;
        } else if (a > 0.0 || b > 0.0) {
            // One endpoint above: the positive part ends at the linear crossing.
            const double pos = a > 0.0 ? a : b, neg = a > 0.0 ? b : a;
            measure += std::isinf(pos) ? h : h * pos / (pos - neg);
        }
    }
    return measure;
}

}  // namespace kbie
