// Copyright 2026 The crowdbench Authors.
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

// Tests for fetch_embeddings_remote against an in-process endpoint.

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "crowdbench/embeddings.hpp"

namespace crowdbench {
namespace {

// Serves the versioned embedding contract. Each text maps to a 3-d vector
// derived from its length; `drop_last` and `fail_first` inject faults.
class FakeEmbeddingServer {
 public:
  FakeEmbeddingServer() {
    server_.Post("/embed", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      const int call = ++requests_;
      if (call <= fail_first_) {
        res.status = 503;
        return;
      }
      if (reject_) {
        res.status = 400;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply;
      reply["version"] = 1;
      reply["vectors"] = nlohmann::json::array();
      const auto& texts = body.at("texts");
      std::size_t count = texts.size();
      if (drop_last_ && count > 0) --count;
      for (std::size_t i = 0; i < count; ++i) {
        const auto len = static_cast<double>(
            texts[i].at("text").get<std::string>().size());
        reply["vectors"].push_back(
            {{"id", texts[i].at("id")}, {"vector", {len + 1.0, 2.0, 0.0}}});
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeEmbeddingServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/embed";
  }
  int requests() const { return requests_; }

  bool drop_last_ = false;
  bool reject_ = false;
  int fail_first_ = 0;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
};

std::vector<std::pair<std::string, std::string>> texts(std::size_t n) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back("t" + std::to_string(i), std::string(i % 7, 'x'));
  }
  return out;
}

RemoteOptions fast_options(std::size_t batch) {
  RemoteOptions opts;
  opts.batch = batch;
  opts.initial_backoff = std::chrono::milliseconds(1);
  opts.timeout = std::chrono::seconds(5);
  return opts;
}

TEST(RemoteFetchTest, EmptyInputSendsNoRequest) {
  FakeEmbeddingServer server;
  const EmbeddingTable table =
      fetch_embeddings_remote(server.url(), {}, fast_options(10));
  EXPECT_TRUE(table.empty());
  EXPECT_EQ(server.requests(), 0);
}

TEST(RemoteFetchTest, BatchesByCeilingDivision) {
  FakeEmbeddingServer server;
  const EmbeddingTable table =
      fetch_embeddings_remote(server.url(), texts(250), fast_options(100));
  EXPECT_EQ(server.requests(), 3);
  ASSERT_EQ(table.size(), 250u);
  EXPECT_EQ(table.ids().front(), "t0");
  EXPECT_EQ(table.ids().back(), "t249");
  // Vectors are normalized exactly as on file load: (1, 2, 0) / sqrt(5).
  EXPECT_NEAR(table.at("t0")[0], 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_FALSE(table.warnings().empty());
}

TEST(RemoteFetchTest, ParallelBatchesKeepOrder) {
  FakeEmbeddingServer server;
  RemoteOptions opts = fast_options(7);
  opts.parallelism = 4;
  const EmbeddingTable table =
      fetch_embeddings_remote(server.url(), texts(50), opts);
  ASSERT_EQ(table.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(table.ids()[i], "t" + std::to_string(i));
  }
}

TEST(RemoteFetchTest, CountMismatchIsAnError) {
  FakeEmbeddingServer server;
  server.drop_last_ = true;
  try {
    fetch_embeddings_remote(server.url(), texts(250), fast_options(250));
    FAIL() << "expected count mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRemote);
    EXPECT_NE(std::string(e.what()).find("count mismatch"), std::string::npos);
  }
}

TEST(RemoteFetchTest, RetriesTransientFailures) {
  FakeEmbeddingServer server;
  server.fail_first_ = 2;
  const EmbeddingTable table =
      fetch_embeddings_remote(server.url(), texts(5), fast_options(10));
  EXPECT_EQ(table.size(), 5u);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteFetchTest, GivesUpAfterThreeAttempts) {
  FakeEmbeddingServer server;
  server.fail_first_ = 10;
  EXPECT_THROW(fetch_embeddings_remote(server.url(), texts(5), fast_options(10)),
               Error);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteFetchTest, ClientErrorIsNotRetried) {
  FakeEmbeddingServer server;
  server.reject_ = true;
  EXPECT_THROW(fetch_embeddings_remote(server.url(), texts(5), fast_options(10)),
               Error);
  EXPECT_EQ(server.requests(), 1);
}

TEST(RemoteFetchTest, UnreachableEndpoint) {
  RemoteOptions opts = fast_options(10);
  opts.timeout = std::chrono::seconds(1);
  // Port 9 (discard) on loopback is closed in the test environment.
  EXPECT_THROW(fetch_embeddings_remote("http://127.0.0.1:9/embed", texts(3), opts),
               Error);
}

TEST(RemoteFetchTest, ZeroBatchRejected) {
  EXPECT_THROW(fetch_embeddings_remote("http://127.0.0.1:9/", texts(1),
                                       fast_options(0)),
               Error);
}

}  // namespace
}  // namespace crowdbench
