// Copyright 2026 The ctxguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Remote provider clients. Request/response documents mirror the in-process
// provider contracts; schema-invalid responses are retried a bounded number
// of times before the caller-facing failure mode kicks in.

#include <stdexcept>
#include <string>

#include <httplib.h>

#include "ctxguard/intent.hpp"
#include "ctxguard/toolchain.hpp"

namespace ctxguard {

namespace {

struct Endpoint {
  std::string host;  // scheme://host:port
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& request) {
  Endpoint ep = split_url(url);
  httplib::Client client(ep.host);
  client.set_connection_timeout(5);
  client.set_read_timeout(30);
  auto res = client.Post(ep.path, request.dump(), "application/json");
  if (!res || res->status != 200)
    throw std::runtime_error("provider request to " + url + " failed");
  nlohmann::json doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw std::runtime_error("provider returned malformed JSON");
  return doc;
}

class HttpExtractor : public IntentExtractor {
 public:
  HttpExtractor(std::string url, int retries) : url_(std::move(url)), retries_(retries) {}

  nlohmann::json extract_raw(const std::string& instruction,
                             const IntentCatalog& catalog) override {
    nlohmann::json request = {{"instruction", instruction}, {"catalog", catalog.to_json()}};
    std::string last_error = "no attempts";
    for (int attempt = 0; attempt <= retries_; ++attempt) {
      try {
        nlohmann::json doc = post_json(url_, request);
        if (doc.is_object() && doc.contains("selections")) return doc;
        last_error = "schema-invalid response";
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw std::runtime_error("extractor provider exhausted retries: " + last_error);
  }

 private:
  std::string url_;
  int retries_;
};

class HttpEmbedder : public Embedder {
 public:
  HttpEmbedder(std::string url, int retries) : url_(std::move(url)), retries_(retries) {}

  EmbeddingVector embed(const std::string& text) override {
    nlohmann::json request = {{"text", text}};
    std::string last_error = "no attempts";
    for (int attempt = 0; attempt <= retries_; ++attempt) {
      try {
        nlohmann::json doc = post_json(url_, request);
        auto it = doc.find("embedding");
        if (it != doc.end() && it->is_array()) {
          EmbeddingVector v;
          v.reserve(it->size());
          bool ok = true;
          for (const auto& x : *it) {
            if (!x.is_number()) {
              ok = false;
              break;
            }
            v.push_back(x.get<double>());
          }
          if (ok && !v.empty()) return v;
        }
        last_error = "schema-invalid response";
      } catch (const std::exception& e) {
        last_error = e.what();
      }
    }
    throw std::runtime_error("embedder provider exhausted retries: " + last_error);
  }

 private:
  std::string url_;
  int retries_;
};

}  // namespace

std::unique_ptr<IntentExtractor> make_http_extractor(const std::string& url, int retries) {
  return std::make_unique<HttpExtractor>(url, retries);
}

std::unique_ptr<Embedder> make_http_embedder(const std::string& url, int retries) {
  return std::make_unique<HttpEmbedder>(url, retries);
}

std::unique_ptr<ReasoningProvider> make_http_reasoning_provider(const std::string& url,
                                                                int retries) {
  class HttpReasoning : public ReasoningProvider {
   public:
    HttpReasoning(std::string url, int retries) : url_(std::move(url)), retries_(retries) {}
    nlohmann::json reason(const std::string& stage, const nlohmann::json& input) override {
      nlohmann::json request = {{"stage", stage}, {"input", input}};
      std::string last_error = "no attempts";
      for (int attempt = 0; attempt <= retries_; ++attempt) {
        try {
          nlohmann::json doc = post_json(url_, request);
          if (doc.is_object()) return doc;
          last_error = "schema-invalid response";
        } catch (const std::exception& e) {
          last_error = e.what();
        }
      }
      throw std::runtime_error("reasoning provider exhausted retries: " + last_error);
    }

   private:
    std::string url_;
    int retries_;
  };
  return std::make_unique<HttpReasoning>(url, retries);
}

}  // namespace ctxguard
