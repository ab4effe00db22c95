#pragma once

// Chat-completions transport for OpenAI-compatible endpoints.
//
//   TRI_API_KEY   bearer token (required)
//   TRI_API_BASE  scheme://host[:port] (default https://api.openai.com)
//   TRI_API_PATH  request path (default /v1/chat/completions)

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <string>

#include "tri/error.hpp"
#include "tri/gateway.hpp"

namespace tri::llm {

class HttpTransport : public Transport {
 public:
  HttpTransport() {
    const char* key = std::getenv("TRI_API_KEY");
    if (!key || !*key) throw GatewayError("TRI_API_KEY is not set");
    key_ = key;
    if (const char* b = std::getenv("TRI_API_BASE"); b && *b) base_ = b;
    if (const char* p = std::getenv("TRI_API_PATH"); p && *p) path_ = p;
  }

  std::string complete(const Request& r) override {
    httplib::Client cli(base_);
    cli.set_read_timeout(120, 0);
    cli.set_bearer_token_auth(key_);
    json body{{"model", r.model},
              {"temperature", r.temperature},
              {"messages", json::array({json{{"role", "user"}, {"content", r.text}}})}};
    auto res = cli.Post(path_, body.dump(), "application/json");
    if (!res) throw GatewayError("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw GatewayError("provider answered HTTP " + std::to_string(res->status));
    try {
      auto j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw GatewayError(std::string("unexpected provider response: ") + e.what());
    }
  }

 private:
  std::string key_;
  std::string base_ = "https://api.openai.com";
  std::string path_ = "/v1/chat/completions";
};

}  // namespace tri::llm
