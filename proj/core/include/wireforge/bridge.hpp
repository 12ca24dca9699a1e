#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wireforge/objectives.hpp"

namespace wireforge {

inline constexpr int kBridgeProtocolVersion = 1;

std::string base64_encode(std::span<const unsigned char> bytes);
/// Throws ContractError on malformed input.
std::vector<unsigned char> base64_decode(const std::string& text);

struct BridgeSettings {
    std::string host = "127.0.0.1";
    int port = 8765;
    double guidance_scale = 100.0;
    std::uint64_t seed = 0;
    double timeout_seconds = 120.0;

    /// Parses "host:port". Throws ConfigError.
    static BridgeSettings from_endpoint(const std::string& endpoint);
    std::string endpoint() const { return host + ":" + std::to_string(port); }
};

/// JSON body for POST /grad. The rendered image travels as an 8-bit PNG.
std::string serialize_request(const GradientRequest& request, const BridgeSettings& settings);

/// Decodes a /grad response. Throws ContractError on version or size
/// mismatch, malformed payloads, or non-finite gradients.
ObjectiveResult parse_response(const std::string& body, int expected_width, int expected_height);

/// Gradient provider that forwards every request to an external SDS server.
/// Transport failures and 5xx replies raise TransportError (retriable); 4xx
/// replies, 5xx replies marked "retriable": false, and protocol violations
/// raise ContractError.
class BridgeProvider : public GradientProvider {
public:
    explicit BridgeProvider(BridgeSettings settings) : settings_(std::move(settings)) {}

    ObjectiveResult evaluate(const GradientRequest& request) override;
    /// GET /healthz body, or TransportError.
    std::string health() const;

    const BridgeSettings& settings() const { return settings_; }

private:
    BridgeSettings settings_;
};

}  // namespace wireforge
