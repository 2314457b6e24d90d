#include "evosig/error.hpp"
#include "evosig/mutation.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

namespace evosig {

namespace {

[[noreturn]] void transport(const std::string& what) { throw Error(ErrorKind::Transport, what); }

struct Url {
    std::string base; // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) transport("malformed endpoint url '" + url + "'");
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

void set_timeout(httplib::Client& cli, double seconds) {
    const auto s = static_cast<time_t>(seconds);
    const auto us = static_cast<time_t>((seconds - static_cast<double>(s)) * 1e6);
    cli.set_connection_timeout(s, us);
    cli.set_read_timeout(s, us);
    cli.set_write_timeout(s, us);
}

std::string content_of(const std::string& body) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error&) {
        transport("response is not JSON");
    }
    const Json* content = nullptr;
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content")) content = &c["message"]["content"];
    }
    if (!content || !content->is_string()) transport("response has no choices[0].message.content");
    auto text = content->get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) transport("empty response");
    return text;
}

} // namespace

std::string request_mutation(const PromptBundle& prompt, const ModelEndpoint& model, const EnsembleConfig& config) {
    if (!config.network) throw Error(ErrorKind::Mode, "network requests are disabled (offline mode)");
    const auto url = split_url(model.url);

    httplib::Headers headers;
    if (!model.auth_env.empty()) {
        const char* token = std::getenv(model.auth_env.c_str());
        if (!token || !*token) throw Error(ErrorKind::Config, "environment variable " + model.auth_env + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    const auto body = chat_request(prompt, model, config.temperature).dump();

    httplib::Client cli(url.base);
    if (!cli.is_valid()) transport("cannot open a client for '" + url.base + "' (https needs OpenSSL support)");
    set_timeout(cli, config.timeout);

    std::string last_error;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0) {
            const double wait = config.backoff * std::ldexp(1.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
        auto res = cli.Post(url.path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) transport("HTTP " + std::to_string(res->status) + " from " + model.url);
        return content_of(res->body);
    }
    transport(model.url + ": " + last_error + " after " + std::to_string(config.max_retries + 1) + " attempts");
}

} // namespace evosig
