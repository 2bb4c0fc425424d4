#include "membench/backend.hpp"
#include "membench/error.hpp"
#include "membench/util.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>

namespace membench {

using nlohmann::json;

HttpChatBackend::HttpChatBackend(HttpBackendConfig config) : config_(std::move(config)) {}

JudgeResponse HttpChatBackend::complete(const JudgeRequest& request) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint, m, url_re)) {
        throw Error("bad judge endpoint '" + config_.endpoint + "'");
    }
    const std::string origin = m[1].str();
    std::string path = m[2].matched ? m[2].str() : std::string{};
    while (!path.empty() && path.back() == '/') path.pop_back();
    path += "/chat/completions";

    json content = json::array({{{"type", "text"}, {"text", request.user_text}}});
    for (const CompositeImage* img : request.images) {
        const Bytes png = encode_png(img->pixels);
        content.push_back({{"type", "image_url"},
                           {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
    }
    const json body = {{"model", config_.model},
                       {"temperature", 0},
                       {"messages", json::array({{{"role", "system"}, {"content", request.system_text}},
                                                 {{"role", "user"}, {"content", content}}})}};

    httplib::Client client(origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key) throw Error("credential variable " + config_.api_key_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw BackendError("judge transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
        throw BackendError("judge backend returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error("judge backend rejected request: HTTP " + std::to_string(res->status) + " " + res->body);
    }

    JudgeResponse out;
    try {
        const json reply = json::parse(res->body);
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage")) {
            out.tokens_in = reply["usage"].value("prompt_tokens", std::int64_t{0});
            out.tokens_out = reply["usage"].value("completion_tokens", std::int64_t{0});
        }
    } catch (const json::exception& e) {
        throw BackendError(std::string("unreadable judge response: ") + e.what());
    }
    out.cost = static_cast<double>(out.tokens_in) / 1000.0 * config_.price_per_1k_input +
               static_cast<double>(out.tokens_out) / 1000.0 * config_.price_per_1k_output;
    return out;
}

}  // namespace membench
