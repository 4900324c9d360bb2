#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "smpcfl/audit.hpp"
#include "smpcfl/simnet.hpp"

using namespace smpcfl;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<std::uint8_t> b) { return b; }

} // namespace

TEST_CASE("link cost formula: 1000 bytes at 1 MB/s with 1 ms latency = 2 ms") {
    LinkModel link{1e6, 1e-3, "test"};
    CHECK(link.cost_ns(1000) == 2'000'000);
}

TEST_CASE("link presets") {
    CHECK(link_preset("6g").name == "6g");
    CHECK(link_preset("4g").latency_s == doctest::Approx(0.05));
    CHECK_THROWS_AS(link_preset("5g"), ConfigError);
}

TEST_CASE("FIFO order per sender pair") {
    std::vector<int> got;
    auto sender = [](PartyCtx& ctx) {
        ctx.send(1, std::vector<std::uint8_t>{1}, tag::kShare);
        ctx.send(1, std::vector<std::uint8_t>{2}, tag::kShare);
        ctx.send(1, std::vector<std::uint8_t>{3}, tag::kShare);
    };
    auto receiver = [&](PartyCtx& ctx) {
        for (int i = 0; i < 3; ++i) got.push_back(ctx.recv(0)[0]);
    };
    run_parties({sender, receiver}, link_preset("6g"), 1);
    CHECK(got == std::vector<int>{1, 2, 3});
}

TEST_CASE("simulated clock advances by message cost") {
    LinkModel link{1e6, 1e-3, "test"};
    std::uint64_t recv_clock = 0;
    auto sender = [](PartyCtx& ctx) { ctx.send(1, std::vector<std::uint8_t>(1000, 0), tag::kShare); };
    auto receiver = [&](PartyCtx& ctx) {
        (void)ctx.recv(0);
        recv_clock = ctx.now_ns();
    };
    run_parties({sender, receiver}, link, 1);
    CHECK(recv_clock == 2'000'000);
}

TEST_CASE("open-style exchange produces exactly 2 messages") {
    auto prog = [](int self, int peer) {
        return [self, peer](PartyCtx& ctx) {
            if (self == 0) {
                ctx.send(peer, std::vector<std::uint8_t>{42}, tag::kOpenE);
                (void)ctx.recv(peer);
            } else {
                (void)ctx.recv(peer);
                ctx.send(peer, std::vector<std::uint8_t>{24}, tag::kOpenE);
            }
        };
    };
    const Transcript t = run_parties({prog(0, 1), prog(1, 0)}, link_preset("6g"), 2);
    CHECK(t.log.size() == 2);
    CHECK(t.sent_bytes[0] == 1);
    CHECK(t.sent_bytes[1] == 1);
}

TEST_CASE("same seed gives identical transcript hash; different seed differs") {
    auto mk = [] {
        std::vector<PartyProgram> p;
        p.push_back([](PartyCtx& ctx) {
            std::vector<std::uint8_t> payload{static_cast<std::uint8_t>(ctx.rng().u64() & 0xff)};
            ctx.send(1, payload, tag::kShare);
        });
        p.push_back([](PartyCtx& ctx) { (void)ctx.recv(0); });
        return p;
    };
    const auto t1 = run_parties(mk(), link_preset("6g"), 77);
    const auto t2 = run_parties(mk(), link_preset("6g"), 77);
    const auto t3 = run_parties(mk(), link_preset("6g"), 78);
    CHECK(t1.hash() == t2.hash());
    CHECK(t1.hash() != t3.hash());
}

TEST_CASE("byte conservation: sent equals received when all messages consumed") {
    auto ping = [](PartyCtx& ctx) {
        ctx.send(1, std::vector<std::uint8_t>(100, 1), tag::kShare);
        (void)ctx.recv(1);
    };
    auto pong = [](PartyCtx& ctx) {
        (void)ctx.recv(0);
        ctx.send(0, std::vector<std::uint8_t>(50, 2), tag::kShare);
    };
    const Transcript t = run_parties({ping, pong}, link_preset("6g"), 3);
    std::uint64_t sent = 0, recvd = 0;
    for (auto b : t.sent_bytes) sent += b;
    for (auto b : t.recv_bytes) recvd += b;
    CHECK(sent == recvd);
    CHECK(sent == 150);
}

TEST_CASE("swapping 6g and 4g changes clocks, not contents") {
    auto mk = [] {
        std::vector<PartyProgram> p;
        p.push_back([](PartyCtx& ctx) {
            ctx.send(1, std::vector<std::uint8_t>{9, 9, 9}, tag::kShare);
        });
        p.push_back([](PartyCtx& ctx) { (void)ctx.recv(0); });
        return p;
    };
    const auto fast = run_parties(mk(), link_preset("6g"), 5);
    const auto slow = run_parties(mk(), link_preset("4g"), 5);
    REQUIRE(fast.log.size() == slow.log.size());
    for (std::size_t i = 0; i < fast.log.size(); ++i)
        CHECK(fast.log[i].payload == slow.log[i].payload);
    CHECK(slow.max_clock_ns() > fast.max_clock_ns());
}

TEST_CASE("deadlock is detected and reported with wait states") {
    auto a = [](PartyCtx& ctx) { (void)ctx.recv(1); };
    auto b = [](PartyCtx& ctx) { (void)ctx.recv(0); };
    try {
        run_parties({a, b}, link_preset("6g"), 6);
        FAIL("expected deadlock abort");
    } catch (const ProtocolError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("deadlock") != std::string::npos);
        CHECK(msg.find("waiting on") != std::string::npos);
    }
}

TEST_CASE("recv from a finished sender aborts with a closed-session error") {
    auto a = [](PartyCtx&) {};
    auto b = [](PartyCtx& ctx) { (void)ctx.recv(0); };
    CHECK_THROWS_AS(run_parties({a, b}, link_preset("6g"), 7), ProtocolError);
}

TEST_CASE("compute ticks scale inversely with ops-per-second") {
    SimOptions fast;
    fast.compute_ops_per_s = 2e6;
    SimOptions slow;
    slow.compute_ops_per_s = 1e6;
    auto prog = [](PartyCtx& ctx) { ctx.tick(1'000'000); };
    const auto tf = run_parties({prog}, link_preset("6g"), 8, fast);
    const auto ts = run_parties({prog}, link_preset("6g"), 8, slow);
    CHECK(ts.clock_ns[0] == 2 * tf.clock_ns[0]);
}

TEST_CASE("transcript export emits one line per message") {
    auto sender = [](PartyCtx& ctx) { ctx.send(1, bytes({1, 2}), tag::kShare); };
    auto receiver = [](PartyCtx& ctx) { (void)ctx.recv(0); };
    const Transcript t = run_parties({sender, receiver}, link_preset("6g"), 9);
    std::ostringstream os;
    t.export_lines(os);
    CHECK(os.str() == "0 0 0 1 2 100002\n"); // session round from to bytes deliver_ns
    CHECK(t.prg_name == std::string("chacha20"));
}

TEST_CASE("audit: allowlisted tags pass, rogue tags are flagged") {
    auto good = [](PartyCtx& ctx) {
        ctx.send(1, bytes({1}), tag::kOpenX);
        ctx.send(1, bytes({2}), tag::kRevealOutput);
    };
    auto sink = [](PartyCtx& ctx) {
        (void)ctx.recv(0);
        (void)ctx.recv(0);
    };
    const Transcript ok = run_parties({good, sink}, link_preset("6g"), 10);
    CHECK(audit_transcript(ok).ok);
    CHECK(audit_transcript(ok).opened_masked == 1);
    CHECK(audit_transcript(ok).reveals == 1);

    auto rogue = [](PartyCtx& ctx) { ctx.send(1, bytes({9}), "raw-secret"); };
    auto sink1 = [](PartyCtx& ctx) { (void)ctx.recv(0); };
    const Transcript bad = run_parties({rogue, sink1}, link_preset("6g"), 11);
    const auto rep = audit_transcript(bad);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("raw-secret") != std::string::npos);
}
