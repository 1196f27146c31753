#include "doctest.h"
#include "lifebench/llm/backend.hpp"

using namespace lifebench::llm;

TEST_CASE("scripted backend replays by transcript hash") {
    std::vector<ChatMessage> t1{{"system", "s"}, {"user", "what is 3+4?"}};
    std::vector<ChatMessage> t2{{"system", "s"}, {"user", "what is 3+5?"}};

    ScriptedBackend b;
    b.add(t1, "ANSWER: 7");
    b.add(t2, "ANSWER: 8");

    CHECK(b.complete(t1) == "ANSWER: 7");
    CHECK(b.complete(t2) == "ANSWER: 8");
    // identical transcript, identical response
    CHECK(b.complete(t1) == "ANSWER: 7");
    CHECK(b.call_count() == 3);

    std::vector<ChatMessage> unknown{{"user", "something else"}};
    CHECK_THROWS_AS(b.complete(unknown), ScriptMiss);
}

TEST_CASE("transcript hash is order- and boundary-sensitive") {
    std::vector<ChatMessage> a{{"user", "ab"}, {"user", "c"}};
    std::vector<ChatMessage> b{{"user", "a"}, {"user", "bc"}};
    std::vector<ChatMessage> c{{"user", "c"}, {"user", "ab"}};
    CHECK(transcript_hash(a) != transcript_hash(b));
    CHECK(transcript_hash(a) != transcript_hash(c));
    CHECK(transcript_hash(a) == transcript_hash(a));
    // role participates too
    std::vector<ChatMessage> d{{"assistant", "ab"}, {"user", "c"}};
    CHECK(transcript_hash(a) != transcript_hash(d));
}

TEST_CASE("replay files round-trip") {
    ScriptedBackend b;
    std::vector<ChatMessage> t{{"user", "hello\nwith \"quotes\""}};
    b.add(t, "multi\nline reply");
    b.add_hash(12345, "other");

    auto restored = ScriptedBackend::from_jsonl_text(b.to_jsonl());
    CHECK(restored.size() == 2);
    CHECK(restored.complete(t) == "multi\nline reply");
}

TEST_CASE("session log records every exchange") {
    std::vector<ChatMessage> t{{"user", "q"}};
    ScriptedBackend b;
    b.add(t, "r");
    b.complete(t);
    b.complete(t);
    REQUIRE(b.session_log().size() == 2);
    CHECK(b.session_log()[0].response == "r");
    CHECK(b.session_log()[1].messages.size() == 1);
    CHECK(b.session_log()[1].messages[0].content == "q");
}

TEST_CASE("remote backend refuses to run without an API key") {
    RemoteConfig cfg;
    cfg.base_url = "http://127.0.0.1:9";  // would fail if contacted
    cfg.model = "test-model";
    cfg.api_key_env = "LIFEBENCH_TEST_KEY_THAT_IS_NOT_SET";
    RemoteBackend backend(cfg);
    // AuthError comes from the key check, before any network activity
    CHECK_THROWS_AS(backend.complete({{"user", "hi"}}), AuthError);

    RemoteConfig bad;
    CHECK_THROWS_AS(RemoteBackend{bad}, BackendError);
}
