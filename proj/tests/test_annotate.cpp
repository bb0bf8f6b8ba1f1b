#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "memestat/annotate.hpp"
#include "memestat/rng.hpp"
#include "test_util.hpp"

using namespace memestat;

namespace {

std::vector<Post> make_posts(std::size_t n) {
    std::vector<Post> posts;
    for (std::size_t i = 0; i < n; ++i) {
        posts.push_back({"p" + std::to_string(i), 1609718400 + static_cast<std::int64_t>(i), "post " + std::to_string(i)});
    }
    return posts;
}

SentimentLabel truth_for(const std::string& text) {
    return static_cast<SentimentLabel>(std::hash<std::string>{}(text) % 3);
}

std::string render_answer(const std::vector<BatchItem>& items, const std::function<bool(const BatchItem&)>& keep) {
    std::string out;
    for (const auto& item : items) {
        if (!keep(item)) continue;
        out += std::to_string(item.id) + ": " + std::string(label_name(truth_for(item.text))) + "\n";
    }
    return out;
}

/// Answers every entry with its ground-truth label unless `drop` says otherwise.
class MockClient : public ChatClient {
public:
    std::function<bool(const std::string& text, std::size_t seen_before)> drop = [](const auto&, auto) {
        return false;
    };
    std::function<bool(std::size_t call)> fail = [](std::size_t) { return false; };

    std::string complete(const std::string& prompt) override {
        const std::size_t call = calls_.fetch_add(1);
        const int now = ++in_flight_;
        int peak = peak_in_flight_.load();
        while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight_;
        if (fail(call)) throw TransportError("mock failure");

        const auto items = parse_prompt_entries(prompt);
        std::lock_guard lock(mutex_);
        return render_answer(items, [&](const BatchItem& item) { return !drop(item.text, seen_[item.text]++); });
    }

    std::size_t calls() const { return calls_.load(); }
    int peak_in_flight() const { return peak_in_flight_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_in_flight_{0};
    std::mutex mutex_;
    std::map<std::string, std::size_t> seen_;
};

ClientConfig fast_config() {
    ClientConfig c;
    c.backoff_base = std::chrono::milliseconds(0);
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompts
// ---------------------------------------------------------------------------

TEST(AnnotationPrompt, SingleItem) {
    const std::string prompt = build_annotation_prompt(number_batch({"to the moon"}));
    EXPECT_NE(prompt.find("\n—\n1: to the moon\n—\n"), std::string::npos);
    EXPECT_EQ(prompt.find("2: "), std::string::npos);
    EXPECT_EQ(parse_prompt_entries(prompt), number_batch({"to the moon"}));
}

TEST(AnnotationPrompt, HundredItemsMatchFrozenTemplate) {
    std::vector<std::string> texts;
    for (int i = 1; i <= 100; ++i) texts.push_back("comment " + std::to_string(i) + " 💎🙌");
    const std::string prompt = build_annotation_prompt(number_batch(texts));
    EXPECT_EQ(prompt, read_text_file(testutil::data_path("prompts/annotation_100.txt")));
    EXPECT_TRUE(prompt.ends_with("100: comment 100 💎🙌\n—\n"));
    EXPECT_EQ(build_annotation_prompt(number_batch(texts)), prompt);
}

TEST(AnnotationPrompt, RejectsBadBatches) {
    EXPECT_THROW(build_annotation_prompt({}), Error);
    EXPECT_THROW(build_annotation_prompt(number_batch(std::vector<std::string>(101, "x"))), Error);
    EXPECT_THROW(build_annotation_prompt({{2, "x"}}), Error);
}

TEST(AnnotationPrompt, SeparatorInsideBodyIsEscaped) {
    const std::vector<std::string> texts{"first\n—\nsecond", "  —  ", "\\—", "a — b", "1: fake\n—\n2: fake", ""};
    const std::string prompt = build_annotation_prompt(number_batch(texts));
    // Only the structural separators appear as bare lines.
    std::size_t bare = 0;
    for (std::size_t pos = 0; (pos = prompt.find("\n—\n", pos)) != std::string::npos; ++pos) ++bare;
    EXPECT_EQ(bare, texts.size() + 1);
    EXPECT_EQ(parse_prompt_entries(prompt), number_batch(texts));
}

TEST(AnnotationPrompt, RandomBodiesRecoverExactly) {
    const std::vector<std::string> pieces{"—", "\\", "\n", " ", "1: ", "🚀", "positive", "—\n", "\\—", "x", "\r"};
    Xoshiro256StarStar rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> texts(1 + rng.below(100));
        for (auto& t : texts) {
            const std::size_t n = rng.below(8);
            for (std::size_t k = 0; k < n; ++k) t += pieces[rng.below(pieces.size())];
        }
        ASSERT_EQ(parse_prompt_entries(build_annotation_prompt(number_batch(texts))), number_batch(texts))
            << "trial " << trial;
    }
}

TEST(AugmentationPrompt, MatchesFrozenTemplate) {
    const std::string prompt = build_augmentation_prompt(number_batch({"so bad 🤡", "down again 📉", "sold"}));
    EXPECT_EQ(prompt, read_text_file(testutil::data_path("prompts/augmentation_3x50.txt")));
    EXPECT_NE(prompt.find("\n1: so bad 🤡\n"), std::string::npos);
    EXPECT_NE(build_augmentation_prompt(number_batch({"x"}), 7).find("Respond with 7 new comments"),
              std::string::npos);
    EXPECT_THROW(build_augmentation_prompt({}), Error);
    EXPECT_THROW(build_augmentation_prompt(number_batch({"x"}), 0), Error);
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

TEST(AnnotationResponse, Examples) {
    const auto both = parse_annotation_response("1: positive\n2: negative", {1, 2});
    EXPECT_EQ(both.labels, (std::map<std::size_t, SentimentLabel>{{1, SentimentLabel::Positive},
                                                                  {2, SentimentLabel::Negative}}));
    EXPECT_TRUE(both.missing.empty());

    const auto decorated = parse_annotation_response("1: POSITIVE.", {1});
    EXPECT_EQ(decorated.labels.at(1), SentimentLabel::Positive);

    const auto garbage = parse_annotation_response("I cannot help with that.", {1, 2, 3});
    EXPECT_TRUE(garbage.labels.empty());
    EXPECT_EQ(garbage.missing, (std::set<std::size_t>{1, 2, 3}));
}

TEST(AnnotationResponse, TolerancesAndRules) {
    const auto r = parse_annotation_response("1: positive 2: positive\n"
                                             " 3 : Neutral! \r\n"
                                             "**4: negative**\n"
                                             "5: bullish\n"
                                             "9: negative\n"
                                             "1: negative\n",
                                             {1, 2, 3, 4, 5});
    EXPECT_EQ(r.labels.at(1), SentimentLabel::Positive);  // first answer wins
    EXPECT_EQ(r.labels.at(2), SentimentLabel::Positive);
    EXPECT_EQ(r.labels.at(3), SentimentLabel::Neutral);
    EXPECT_FALSE(r.labels.contains(9));
    EXPECT_EQ(r.missing, (std::set<std::size_t>{4, 5}));
}

TEST(AnnotationResponse, RandomRoundTrip) {
    Xoshiro256StarStar rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(100);
        std::map<std::size_t, SentimentLabel> injected;
        std::set<std::size_t> expected;
        std::string answer;
        for (std::size_t id = 1; id <= n; ++id) {
            const auto label = static_cast<SentimentLabel>(rng.below(3));
            injected[id] = label;
            expected.insert(id);
            answer += std::to_string(id) + ": " + std::string(label_name(label)) + "\n";
        }
        const auto parsed = parse_annotation_response(answer, expected);
        ASSERT_EQ(parsed.labels, injected);
        ASSERT_TRUE(parsed.missing.empty());
    }
}

TEST(AugmentationResponse, Examples) {
    EXPECT_TRUE(parse_augmentation_response("").empty());
    EXPECT_EQ(parse_augmentation_response("1: a\n2: b, c 🤡\n3: d\n"),
              (std::vector<std::string>{"a", "b, c 🤡", "d"}));
    EXPECT_EQ(parse_augmentation_response("3: c\n—\n1: a\nnoise\n2: b\n1: dup\n"),
              (std::vector<std::string>{"a", "b", "c"}));
}

// ---------------------------------------------------------------------------
// Chat wire format
// ---------------------------------------------------------------------------

TEST(ChatWire, RequestAndResponse) {
    const auto body = nlohmann::json::parse(build_chat_request("m1", "hi — 🚀"));
    EXPECT_EQ(body["model"], "m1");
    EXPECT_EQ(body["messages"][0]["role"], "user");
    EXPECT_EQ(body["messages"][0]["content"], "hi — 🚀");
    EXPECT_EQ(parse_chat_response(R"({"choices":[{"message":{"role":"assistant","content":"1: neutral"}}]})"),
              "1: neutral");
    EXPECT_THROW(parse_chat_response("not json"), TransportError);
    EXPECT_THROW(parse_chat_response(R"({"choices":[]})"), TransportError);
}

TEST(ClientConfig, Validation) {
    ClientConfig c;
    c.max_in_flight = 0;
    EXPECT_THROW(c.validate(), Error);
    c = ClientConfig{};
    c.model.clear();
    EXPECT_THROW(c.validate(), Error);
}

// ---------------------------------------------------------------------------
// Corpus annotation
// ---------------------------------------------------------------------------

TEST(Partition, Arithmetic) {
    EXPECT_EQ(partition_batches(250),
              (std::vector<std::pair<std::size_t, std::size_t>>{{0, 100}, {100, 200}, {200, 250}}));
    EXPECT_TRUE(partition_batches(0).empty());
    EXPECT_EQ(partition_batches(100).size(), 1u);
}

TEST(AnnotateCorpus, CompliantClientLabelsEverything) {
    const auto posts = make_posts(250);
    MockClient client;
    const auto out = annotate_corpus(posts, client, fast_config());
    EXPECT_TRUE(out.rejects.empty());
    ASSERT_EQ(out.labels.size(), posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        EXPECT_EQ(out.labels[i].post_id, posts[i].id);
        EXPECT_EQ(out.labels[i].label, truth_for(posts[i].text));
    }
    EXPECT_EQ(out.requests, 3u);
    EXPECT_EQ(client.calls(), 3u);
}

TEST(AnnotateCorpus, DroppedIdRecoveredOnRetry) {
    const auto posts = make_posts(10);
    MockClient client;
    client.drop = [](const std::string& text, std::size_t seen) { return text == "post 6" && seen < 2; };
    const auto out = annotate_corpus(posts, client, fast_config());
    EXPECT_TRUE(out.rejects.empty());
    EXPECT_EQ(out.labels.size(), 10u);
    EXPECT_EQ(out.labels[6].label, truth_for("post 6"));
    EXPECT_EQ(out.requests, 3u);
}

TEST(AnnotateCorpus, RetriesResendOnlyMissingPosts) {
    const auto posts = make_posts(10);
    std::vector<std::vector<BatchItem>> sent;
    std::mutex m;
    struct Recorder : ChatClient {
        std::function<std::string(const std::string&)> fn;
        std::string complete(const std::string& p) override { return fn(p); }
    } client;
    client.fn = [&](const std::string& prompt) {
        const auto items = parse_prompt_entries(prompt);
        std::lock_guard lock(m);
        sent.push_back(items);
        return render_answer(items, [&](const BatchItem& it) { return sent.size() > 1 || it.id % 3 != 0; });
    };
    const auto out = annotate_corpus(posts, client, fast_config());
    ASSERT_EQ(sent.size(), 2u);
    EXPECT_EQ(sent[1], number_batch({"post 2", "post 5", "post 8"}));
    EXPECT_TRUE(out.rejects.empty());
}

TEST(AnnotateCorpus, ExhaustedRetriesProduceRejects) {
    const auto posts = make_posts(120);
    MockClient client;
    client.drop = [](const std::string& text, std::size_t) { return text == "post 7" || text == "post 110"; };
    ClientConfig config = fast_config();
    config.retry_limit = 2;
    const auto out = annotate_corpus(posts, client, config);
    EXPECT_EQ(out.rejects, (std::vector<std::string>{"p7", "p110"}));
    EXPECT_EQ(out.labels.size() + out.rejects.size(), posts.size());
    EXPECT_EQ(out.requests, 6u);  // two batches, 1 + 2 requests each
}

TEST(AnnotateCorpus, TransportFailuresRetried) {
    const auto posts = make_posts(50);
    MockClient client;
    client.fail = [](std::size_t call) { return call < 2; };
    const auto out = annotate_corpus(posts, client, fast_config());
    EXPECT_TRUE(out.rejects.empty());
    EXPECT_EQ(out.transport_failures, 2u);
    EXPECT_EQ(out.requests, 3u);

    MockClient dead;
    dead.fail = [](std::size_t) { return true; };
    ClientConfig config = fast_config();
    config.retry_limit = 1;
    const auto none = annotate_corpus(posts, dead, config);
    EXPECT_TRUE(none.labels.empty());
    EXPECT_EQ(none.rejects.size(), posts.size());
}

TEST(AnnotateCorpus, BoundedConcurrency) {
    const auto posts = make_posts(1000);
    MockClient client;
    ClientConfig config = fast_config();
    config.max_in_flight = 3;
    const auto out = annotate_corpus(posts, client, config);
    EXPECT_EQ(out.labels.size(), posts.size());
    EXPECT_LE(client.peak_in_flight(), 3);
    EXPECT_GE(client.peak_in_flight(), 1);
}

TEST(AnnotateCorpus, PartitionPropertyUnderRandomDrops) {
    Xoshiro256StarStar rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto posts = make_posts(1 + rng.below(400));
        const std::uint64_t salt = rng();
        MockClient client;
        client.drop = [salt](const std::string& text, std::size_t seen) {
            return (std::hash<std::string>{}(text) ^ salt ^ seen) % 4 == 0;
        };
        ClientConfig config = fast_config();
        config.retry_limit = rng.below(3);
        const auto out = annotate_corpus(posts, client, config);
        std::set<std::string> ids;
        for (const auto& l : out.labels) ids.insert(l.post_id);
        for (const auto& r : out.rejects) ids.insert(r);
        EXPECT_EQ(ids.size(), posts.size());
        EXPECT_EQ(out.labels.size() + out.rejects.size(), posts.size());
    }
}

TEST(AugmentCorpus, CollectsAndReportsShortfall) {
    struct Gen : ChatClient {
        std::string complete(const std::string&) override { return "1: meh 🙄\n2: nope\n"; }
    } client;
    std::vector<std::string> seeds(150, "bad");
    const auto out = augment_corpus(seeds, client, fast_config(), 3);
    ASSERT_EQ(out.batches.size(), 2u);
    EXPECT_EQ(out.batches[0].seeds.size(), 100u);
    EXPECT_EQ(out.batches[1].generated, (std::vector<std::string>{"meh 🙄", "nope"}));
    EXPECT_EQ(out.shortfall, 2u);
}

// ---------------------------------------------------------------------------
// HTTP client against a loopback server
// ---------------------------------------------------------------------------

class LoopbackServer : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_auth_ = req.get_header_value("Authorization");
            const auto body = nlohmann::json::parse(req.body);
            if (status_ != 200) {
                res.status = status_;
                return;
            }
            const auto items = parse_prompt_entries(body["messages"][0]["content"].get<std::string>());
            nlohmann::json reply;
            reply["choices"] = nlohmann::json::array(
                {{{"message", {{"role", "assistant"}, {"content", render_answer(items, [](auto&) { return true; })}}}}});
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }
    ClientConfig config() const {
        ClientConfig c = fast_config();
        c.base_url = "http://127.0.0.1:" + std::to_string(port_);
        c.token_env = "MEMESTAT_TEST_TOKEN";
        c.timeout = std::chrono::milliseconds(5000);
        return c;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
    std::atomic<int> status_{200};
    std::string last_auth_;
};

TEST_F(LoopbackServer, AnnotatesOverHttpWithBearerToken) {
    ::setenv("MEMESTAT_TEST_TOKEN", "secret-token", 1);
    HttpChatClient client(config());
    ::unsetenv("MEMESTAT_TEST_TOKEN");
    const auto posts = make_posts(120);
    const auto out = annotate_corpus(posts, client, config());
    EXPECT_TRUE(out.rejects.empty());
    EXPECT_EQ(out.labels[119].label, truth_for("post 119"));
    EXPECT_EQ(hits_.load(), 2);
    EXPECT_EQ(last_auth_, "Bearer secret-token");
}

TEST_F(LoopbackServer, HttpErrorsAreTransportErrors) {
    status_ = 500;
    HttpChatClient client(config());
    EXPECT_THROW(client.complete(build_annotation_prompt(number_batch({"x"}))), TransportError);
    ClientConfig unreachable = config();
    unreachable.base_url = "http://127.0.0.1:1";
    HttpChatClient dead(unreachable);
    EXPECT_THROW(dead.complete("x"), TransportError);
}

TEST_F(LoopbackServer, TranscriptReplayAndRedaction) {
    const auto dir = testutil::scratch_dir("transcript");
    const std::string full = (dir / "full.jsonl").string();
    const std::string redacted = (dir / "redacted.jsonl").string();
    const auto posts = make_posts(30);
    {
        HttpChatClient client(config(), std::make_shared<TranscriptLog>(full, false));
        annotate_corpus(posts, client, config());
    }
    {
        HttpChatClient client(config(), std::make_shared<TranscriptLog>(redacted, true));
        annotate_corpus(posts, client, config());
    }
    const std::string redacted_text = read_text_file(redacted);
    EXPECT_EQ(redacted_text.find("post 1"), std::string::npos);
    EXPECT_NE(redacted_text.find("[redacted"), std::string::npos);

    const int hits_before = hits_.load();
    ReplayChatClient replay(full);
    const auto out = annotate_corpus(posts, replay, config());
    EXPECT_EQ(hits_.load(), hits_before);
    EXPECT_TRUE(out.rejects.empty());
    EXPECT_EQ(out.labels[3].label, truth_for("post 3"));
    EXPECT_THROW(replay.complete("unknown prompt"), TransportError);
}
