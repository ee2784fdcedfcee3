#pragma once

#include <chrono>
#include <string>

#include "chartret/embedding.hpp"

namespace chartret {

/// Provider backed by an HTTP sidecar speaking the provider wire protocol.
/// Every call opens its own connection, so one instance can be shared
/// across threads. Transport errors, non-2xx replies and malformed bodies
/// become ProviderError.
///
///   POST /embed/image   {"png_base64"}            -> {"dim", "values": [...]}
///   POST /embed/text    {"text"}                  -> {"dim", "values": [...]}
///   POST /zero_shot     {"png_base64", "labels"}  -> {"logits": [...]}
///   POST /classify      {"png_base64", "kind"}    -> {"label", "confidence"}
///   POST /trend_feature {"png_base64"}            -> {"dim", "values": [...]}
///   POST /segment       {"png_base64"}            -> {"width", "height", "mask_rle"}
///   GET  /health                                  -> {"status": "ok", "dim"}
class RemoteProvider final : public Provider {
public:
    RemoteProvider(std::string endpoint, std::size_t dim,
                   std::chrono::milliseconds timeout = std::chrono::seconds(30));

    const std::string& endpoint() const noexcept { return endpoint_; }

    /// Dimension reported by GET /health. Throws ProviderError when unreachable.
    static std::size_t probe_dim(const std::string& endpoint,
                                 std::chrono::milliseconds timeout = std::chrono::seconds(5));

protected:
    std::vector<double> do_embed_image(const RasterImage& img) const override;
    std::vector<double> do_embed_text(const std::string& normalized_text) const override;
    std::vector<double> do_zero_shot(const RasterImage& img, std::span<const std::string> labels) const override;
    Classification do_classify(const RasterImage& img, AttributeKind kind) const override;
    std::vector<double> do_trend_feature(const RasterImage& img) const override;
    ForegroundMask do_segment(const RasterImage& img) const override;

private:
    std::string post(const std::string& path, const std::string& body) const;

    std::string endpoint_;
    std::chrono::milliseconds timeout_;
};

} // namespace chartret
