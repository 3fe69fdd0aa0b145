#pragma once

// Test-only helpers: the central finite-difference oracle and small fixtures.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "versecraft/corpus.hpp"
#include "versecraft/rng.hpp"
#include "versecraft/tensor.hpp"

namespace versecraft::testing {

inline constexpr double kFdStep = 1e-4;
inline constexpr double kGradTolerance = 1e-4;
// Gradients smaller than this are compared in absolute terms: central
// differences carry O(step^2) truncation error that swamps tiny entries.
inline constexpr double kGradFloor = 1e-3;

struct GradCheck {
    double max_rel_error = 0.0;
    std::string worst;
    std::size_t checked = 0;
};

inline double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kGradFloor});
}

/// Compares each param's .grad (already filled by the caller's backward)
/// against central differences of `loss`.
inline GradCheck finite_difference_check(const ParamList& params, const std::function<double()>& loss) {
    GradCheck result;
    for (Param* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + kFdStep;
            const double up = loss();
            p->value[i] = saved - kFdStep;
            const double down = loss();
            p->value[i] = saved;
            const double numeric = (up - down) / (2.0 * kFdStep);
            const double err = rel_error(p->grad[i], numeric);
            ++result.checked;
            if (err > result.max_rel_error) {
                result.max_rel_error = err;
                result.worst = p->name + "[" + std::to_string(i) + "] analytic=" + std::to_string(p->grad[i]) +
                               " numeric=" + std::to_string(numeric);
            }
        }
    }
    return result;
}

/// Finite differences with respect to a plain vector input.
inline GradCheck finite_difference_check(Vec& x, const Vec& analytic, const std::string& name,
                                         const std::function<double()>& loss) {
    GradCheck result;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + kFdStep;
        const double up = loss();
        x[i] = saved - kFdStep;
        const double down = loss();
        x[i] = saved;
        const double numeric = (up - down) / (2.0 * kFdStep);
        const double err = rel_error(analytic[i], numeric);
        ++result.checked;
        if (err > result.max_rel_error) {
            result.max_rel_error = err;
            result.worst = name + "[" + std::to_string(i) + "]";
        }
    }
    return result;
}

inline void randomize(Tensor& t, Rng& rng, double scale = 0.5) {
    for (double& v : t.values()) v = rng.uniform(-scale, scale);
}

inline Vec random_vec(std::size_t n, Rng& rng, double scale = 1.0) {
    Vec v(n);
    for (double& x : v) x = rng.uniform(-scale, scale);
    return v;
}

inline TokenSeq chars(std::string_view s) { return split_chars(s); }

/// Fixture vocab over a few CJK characters plus the separator.
inline Vocab small_vocab(std::string_view text) {
    Vocab v;
    for (const auto& c : split_chars(text)) {
        if (!v.find(c)) v.add(c);
    }
    return v;
}

}  // namespace versecraft::testing
