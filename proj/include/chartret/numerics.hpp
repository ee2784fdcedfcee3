#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chartret {

/// u.v / (|u| |v|). Throws std::invalid_argument on dimension mismatch or
/// empty input, ZeroNormError when either vector has zero norm.
double cosine_similarity(std::span<const double> u, std::span<const double> v);
double cosine_similarity(std::span<const float> u, std::span<const float> v);

/// Affine map of a cosine in [-1, 1] onto [0, 1]. Inputs that overshoot the
/// range by rounding (<= 1e-9) are clamped; anything further throws.
double to_unit_interval(double c);

/// exp(y_s) / sum_m exp(y_m), evaluated with max-subtraction.
double softmax_select(std::span<const double> logits, std::size_t selected);

struct FocalLossParams {
    double alpha = 0.25; ///< per-class weight, (0, 1]
    double gamma = 2.0;  ///< modulating factor, >= 0

    void validate() const;
};

/// -alpha (1 - p)^gamma ln(p) for p in (0, 1].
double focal_loss(double p_t, const FocalLossParams& params);

/// Per-class alpha from inverse class frequency, normalized to sum to 1.
/// Every count must be positive.
std::vector<double> inverse_frequency_alpha(std::span<const std::size_t> class_counts);

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& other) {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        tn += other.tn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// 2tp / (2tp + fp + fn). Throws UndefinedF1Error when the denominator is 0.
double f1_score(const ConfusionCounts& c);

} // namespace chartret
