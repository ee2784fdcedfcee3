#include "chartret/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "chartret/errors.hpp"

namespace chartret {

namespace {

template <class T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                    std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
    }
    if (u.empty()) throw std::invalid_argument("cosine_similarity: empty vectors");

    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i];
        const double b = v[i];
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if (uu == 0.0 || vv == 0.0) throw ZeroNormError("cosine_similarity: zero-norm vector");
    const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
    return std::clamp(c, -1.0, 1.0);
}

} // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    return cosine_impl(u, v);
}

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
    return cosine_impl(u, v);
}

double to_unit_interval(double c) {
    constexpr double slack = 1e-9;
    if (!(c >= -1.0 - slack && c <= 1.0 + slack)) {
        throw std::out_of_range("to_unit_interval: " + std::to_string(c) + " outside [-1, 1]");
    }
    return (std::clamp(c, -1.0, 1.0) + 1.0) / 2.0;
}

double softmax_select(std::span<const double> logits, std::size_t selected) {
    if (logits.empty()) throw std::invalid_argument("softmax_select: empty logits");
    if (selected >= logits.size()) {
        throw std::out_of_range("softmax_select: index " + std::to_string(selected) + " of " +
                                std::to_string(logits.size()));
    }
    const double peak = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (double y : logits) denom += std::exp(y - peak);
    return std::exp(logits[selected] - peak) / denom;
}

void FocalLossParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("focal loss alpha must be in (0, 1]");
    if (!(gamma >= 0.0)) throw std::invalid_argument("focal loss gamma must be >= 0");
}

double focal_loss(double p_t, const FocalLossParams& params) {
    params.validate();
    if (!(p_t > 0.0 && p_t <= 1.0)) {
        throw std::out_of_range("focal_loss: p_t must be in (0, 1], got " + std::to_string(p_t));
    }
    // pow(0, 0) is 1, which keeps gamma = 0 at plain weighted cross entropy.
    return -params.alpha * std::pow(1.0 - p_t, params.gamma) * std::log(p_t);
}

std::vector<double> inverse_frequency_alpha(std::span<const std::size_t> class_counts) {
    if (class_counts.empty()) throw std::invalid_argument("inverse_frequency_alpha: no classes");
    std::vector<double> alpha;
    alpha.reserve(class_counts.size());
    double total = 0.0;
    for (auto n : class_counts) {
        if (n == 0) throw std::invalid_argument("inverse_frequency_alpha: empty class");
        alpha.push_back(1.0 / static_cast<double>(n));
        total += alpha.back();
    }
    for (auto& a : alpha) a /= total;
    return alpha;
}

double f1_score(const ConfusionCounts& c) {
    const auto denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) throw UndefinedF1Error("f1_score: 2tp + fp + fn = 0");
    return static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

} // namespace chartret
