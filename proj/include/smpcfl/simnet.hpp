#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "smpcfl/rng.hpp"

namespace smpcfl {

// Link cost model standing in for the transport assumptions: cost(msg) =
// latency + length / bandwidth. Affects simulated clocks only.
struct LinkModel {
    double bandwidth_bytes_per_s = 1e9;
    double latency_s = 1e-4;
    std::string name = "6g";

    std::uint64_t cost_ns(std::size_t bytes) const;
};

// Presets: "6g" (1 GB/s, 0.1 ms) and "4g" (12.5 MB/s, 50 ms). Declared
// modeling assumptions, not measurements.
LinkModel link_preset(const std::string& name);

// Transcript message tags; the audit allowlist keys off these.
namespace tag {
inline constexpr const char* kShare = "share";         // fresh additive shares in transit
inline constexpr const char* kOpenE = "open.e";        // Beaver masked difference x - a
inline constexpr const char* kOpenD = "open.d";        // Beaver masked difference y - b
inline constexpr const char* kOpenX = "open.x";        // comparison masked input y + a
inline constexpr const char* kRevealOutput = "reveal.output"; // final public result
inline constexpr const char* kRevealGlobal = "reveal.global"; // global model back to hospitals
} // namespace tag

struct MessageRecord {
    std::uint32_t session = 0;
    std::uint32_t round = 0;
    int from = -1;
    int to = -1;
    std::uint32_t bytes = 0;
    std::uint64_t send_time_ns = 0;
    std::uint64_t deliver_time_ns = 0;
    std::string tag;
    std::vector<std::uint8_t> payload;
};

// Ordered message log plus per-party accounting. Append-only during a run.
struct Transcript {
    std::string prg_name;
    std::uint64_t seed = 0;
    std::string link_name;
    std::vector<MessageRecord> log;
    std::vector<std::uint64_t> sent_bytes;
    std::vector<std::uint64_t> recv_bytes;
    std::vector<std::uint64_t> clock_ns;

    std::uint64_t total_bytes() const;
    std::uint64_t max_clock_ns() const;
    // FNV-1a over headers and payloads; byte-identical runs hash equal.
    std::uint64_t hash() const;
    // Line-delimited "session round from to bytes sim_time_ns".
    void export_lines(std::ostream& os) const;
};

struct SimOptions {
    // Simulated compute throughput per party, in abstract ops per second.
    double compute_ops_per_s = 1e6;
    std::uint32_t session = 0;
};

class Network;

// Handle given to each party program. send() never blocks; recv() blocks
// until the matching FIFO has a message and advances the simulated clock.
class PartyCtx {
public:
    int id() const { return id_; }
    int n_parties() const;
    Rng& rng() { return rng_; }

    void send(int to, std::span<const std::uint8_t> payload, const char* tag);
    std::vector<std::uint8_t> recv(int from);

    // Charge deterministic compute time to this party's simulated clock.
    void tick(std::uint64_t ops);
    std::uint64_t now_ns() const { return clock_ns_; }

    void set_session(std::uint32_t session) { session_ = session; }
    std::uint32_t session() const { return session_; }

private:
    friend class Network;
    PartyCtx(Network& net, int id, std::uint64_t seed)
        : net_(net), id_(id), rng_(seed) {}

    Network& net_;
    int id_;
    Rng rng_;
    std::uint64_t clock_ns_ = 0;
    std::uint32_t session_ = 0;
    std::uint32_t send_round_ = 0;
};

using PartyProgram = std::function<void(PartyCtx&)>;

// Executes the programs under a cooperative deterministic scheduler: one
// party runs at a time; control moves round-robin at recv wait points. Same
// (programs, link, seed) always yields a byte-identical transcript.
Transcript run_parties(std::vector<PartyProgram> programs, const LinkModel& link,
                       std::uint64_t seed, const SimOptions& opts = {});

} // namespace smpcfl
