#include "wireforge/bridge.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <httplib.h>
#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include "wireforge/errors.hpp"

namespace wireforge {

using nlohmann::json;

std::string base64_encode(std::span<const unsigned char> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    if (text.size() % 4 != 0) throw ContractError("base64 payload length is not a multiple of 4");
    std::vector<unsigned char> out(3 * (text.size() / 4));
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw ContractError("malformed base64 payload");
    std::size_t size = static_cast<std::size_t>(n);
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    if (!text.empty() && text.back() == '=') --size;
    if (text.size() >= 2 && text[text.size() - 2] == '=') --size;
    out.resize(size);
    return out;
}

BridgeSettings BridgeSettings::from_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size())
        throw ConfigError("bridge endpoint must look like host:port, got '" + endpoint + "'");
    BridgeSettings s;
    s.host = endpoint.substr(0, colon);
    try {
        std::size_t used = 0;
        s.port = std::stoi(endpoint.substr(colon + 1), &used);
        if (used != endpoint.size() - colon - 1) throw std::invalid_argument("port");
    } catch (const std::exception&) {
        throw ConfigError("bridge endpoint has an invalid port: '" + endpoint + "'");
    }
    if (s.port <= 0 || s.port > 65535) throw ConfigError("bridge port out of range: " + std::to_string(s.port));
    return s;
}

std::string serialize_request(const GradientRequest& request, const BridgeSettings& settings) {
    const auto png = encode_png(request.rendered);
    json j{
        {"version", kBridgeProtocolVersion},
        {"view", view_name(request.view)},
        {"width", request.rendered.width},
        {"height", request.rendered.height},
        {"image", base64_encode(png)},
        {"prompt", request.prompt.value_or("")},
        {"condition", nullptr},
        {"guidance_scale", settings.guidance_scale},
        {"iteration", request.iteration},
        {"total_iterations", request.total_iterations},
        {"seed", settings.seed},
    };
    if (request.condition) j["condition"] = base64_encode(encode_png(*request.condition));
    return j.dump();
}

ObjectiveResult parse_response(const std::string& body, int expected_width, int expected_height) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ContractError(std::string("bridge response is not JSON: ") + e.what());
    }
    try {
        const int version = j.at("version").get<int>();
        if (version != kBridgeProtocolVersion)
            throw ContractError("bridge protocol version " + std::to_string(version) + ", expected " +
                                std::to_string(kBridgeProtocolVersion));
        const int w = j.at("width").get<int>(), h = j.at("height").get<int>();
        if (w != expected_width || h != expected_height)
            throw ContractError("bridge gradient is " + std::to_string(w) + "x" + std::to_string(h) + ", expected " +
                                std::to_string(expected_width) + "x" + std::to_string(expected_height));
        const auto raw = base64_decode(j.at("grad").get<std::string>());
        const std::size_t n = static_cast<std::size_t>(w) * h;
        if (raw.size() != 4 * n) throw ContractError("bridge gradient payload has the wrong byte length");
        ObjectiveResult out{j.at("loss_proxy").get<double>(), Image(w, h)};
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) | static_cast<std::uint32_t>(raw[4 * i + 1]) << 8 |
                                 static_cast<std::uint32_t>(raw[4 * i + 2]) << 16 |
                                 static_cast<std::uint32_t>(raw[4 * i + 3]) << 24;
            const float v = std::bit_cast<float>(bits);
            if (!std::isfinite(v)) throw ContractError("bridge gradient contains non-finite values");
            out.grad.data[i] = v;
        }
        if (!std::isfinite(out.loss)) throw ContractError("bridge loss_proxy is not finite");
        return out;
    } catch (const json::exception& e) {
        throw ContractError(std::string("bridge response violates the protocol: ") + e.what());
    }
}

ObjectiveResult BridgeProvider::evaluate(const GradientRequest& request) {
    httplib::Client client(settings_.host, settings_.port);
    const auto seconds = static_cast<time_t>(settings_.timeout_seconds);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);
    auto res = client.Post("/grad", serialize_request(request, settings_), "application/json");
    if (!res) throw TransportError("bridge at " + settings_.endpoint() + " unreachable: " + httplib::to_string(res.error()));
    if (res->status >= 500) {
        // Server failures are retried unless the server marks them permanent.
        const auto body = json::parse(res->body, nullptr, false);
        if (body.is_object() && body.value("retriable", true) == false)
            throw ContractError("bridge failed permanently with HTTP " + std::to_string(res->status) + ": " + res->body);
        throw TransportError("bridge returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    if (res->status != 200)
        throw ContractError("bridge rejected request with HTTP " + std::to_string(res->status) + ": " + res->body);
    auto out = parse_response(res->body, request.rendered.width, request.rendered.height);
    out.grad.view = request.view;
    return out;
}

std::string BridgeProvider::health() const {
    httplib::Client client(settings_.host, settings_.port);
    client.set_connection_timeout(5, 0);
    auto res = client.Get("/healthz");
    if (!res) throw TransportError("bridge at " + settings_.endpoint() + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("bridge health check returned HTTP " + std::to_string(res->status));
    return res->body;
}

}  // namespace wireforge
