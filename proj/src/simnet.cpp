#include "smpcfl/simnet.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "smpcfl/errors.hpp"
#include "smpcfl/prg.hpp"

namespace smpcfl {

std::uint64_t LinkModel::cost_ns(std::size_t bytes) const {
    const double ns = latency_s * 1e9 + static_cast<double>(bytes) * 1e9 / bandwidth_bytes_per_s;
    return static_cast<std::uint64_t>(std::llround(ns));
}

LinkModel link_preset(const std::string& name) {
    if (name == "6g") return LinkModel{1e9, 1e-4, "6g"};
    if (name == "4g") return LinkModel{12.5e6, 50e-3, "4g"};
    throw ConfigError("unknown link preset: " + name + " (expected 6g or 4g)");
}

std::uint64_t Transcript::total_bytes() const {
    std::uint64_t n = 0;
    for (auto b : sent_bytes) n += b;
    return n;
}

std::uint64_t Transcript::max_clock_ns() const {
    std::uint64_t m = 0;
    for (auto c : clock_ns) m = std::max(m, c);
    return m;
}

std::uint64_t Transcript::hash() const {
    auto mix = [](std::uint64_t h, std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
        return h;
    };
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& m : log) {
        h = mix(h, m.session);
        h = mix(h, m.round);
        h = mix(h, static_cast<std::uint64_t>(m.from));
        h = mix(h, static_cast<std::uint64_t>(m.to));
        h = mix(h, m.bytes);
        h = mix(h, m.deliver_time_ns);
        for (std::uint8_t b : m.payload) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void Transcript::export_lines(std::ostream& os) const {
    for (const auto& m : log)
        os << m.session << ' ' << m.round << ' ' << m.from << ' ' << m.to << ' ' << m.bytes
           << ' ' << m.deliver_time_ns << '\n';
}

namespace {

struct InFlight {
    std::vector<std::uint8_t> payload;
    std::uint64_t deliver_time_ns = 0;
};

enum class PartyState { Runnable, Waiting, Done };

} // namespace

// Cooperative scheduler: party threads take turns holding a run token, so
// exactly one program executes at a time and the transcript is a pure
// function of (programs, link, seed). The token moves round-robin whenever
// the holder blocks on an empty queue or finishes.
class Network {
public:
    Network(std::size_t n, const LinkModel& link, std::uint64_t seed, const SimOptions& opts)
        : link_(link), opts_(opts), states_(n, PartyState::Runnable), waiting_from_(n, -1) {
        transcript_.prg_name = kPrgName;
        transcript_.seed = seed;
        transcript_.link_name = link.name;
        transcript_.sent_bytes.assign(n, 0);
        transcript_.recv_bytes.assign(n, 0);
        transcript_.clock_ns.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ctxs_.emplace_back(new PartyCtx(*this, static_cast<int>(i),
                                            derive_seed(seed, "party", i)));
            ctxs_.back()->session_ = opts.session;
        }
    }

    int n_parties() const { return static_cast<int>(ctxs_.size()); }

    void run(const std::vector<PartyProgram>& programs) {
        std::vector<std::thread> threads;
        threads.reserve(programs.size());
        for (std::size_t i = 0; i < programs.size(); ++i)
            threads.emplace_back([this, i, &programs] { party_main(static_cast<int>(i), programs[i]); });
        for (auto& t : threads) t.join();
        for (auto& c : ctxs_) transcript_.clock_ns[c->id_] = c->clock_ns_;
        if (first_error_) std::rethrow_exception(first_error_);
    }

    Transcript take_transcript() { return std::move(transcript_); }

    void send(PartyCtx& from, int to, std::span<const std::uint8_t> payload, const char* tag) {
        std::unique_lock<std::mutex> lk(mu_);
        if (to < 0 || to >= n_parties()) throw ProtocolError("send: unknown party");
        const std::uint64_t cost = link_.cost_ns(payload.size());
        MessageRecord rec;
        rec.session = from.session_;
        rec.round = from.send_round_++;
        rec.from = from.id_;
        rec.to = to;
        rec.bytes = static_cast<std::uint32_t>(payload.size());
        rec.send_time_ns = from.clock_ns_;
        rec.deliver_time_ns = from.clock_ns_ + cost;
        rec.tag = tag;
        rec.payload.assign(payload.begin(), payload.end());
        transcript_.sent_bytes[from.id_] += payload.size();
        queues_[key(from.id_, to)].push_back(InFlight{rec.payload, rec.deliver_time_ns});
        transcript_.log.push_back(std::move(rec));
        if (states_[to] == PartyState::Waiting && waiting_from_[to] == from.id_)
            states_[to] = PartyState::Runnable;
    }

    std::vector<std::uint8_t> recv(PartyCtx& self, int from) {
        std::unique_lock<std::mutex> lk(mu_);
        if (from < 0 || from >= n_parties()) throw ProtocolError("recv: unknown party");
        auto& q = queues_[key(from, self.id_)];
        while (q.empty()) {
            if (abort_) throw ProtocolError("protocol abort: " + abort_reason_);
            if (states_[from] == PartyState::Done)
                throw ProtocolError("recv from party " + std::to_string(from) +
                                    ": sender finished with no message queued (closed session)");
            states_[self.id_] = PartyState::Waiting;
            waiting_from_[self.id_] = from;
            pass_token(lk, self.id_);
            wait_for_token(lk, self.id_);
        }
        InFlight msg = std::move(q.front());
        q.pop_front();
        transcript_.recv_bytes[self.id_] += msg.payload.size();
        self.clock_ns_ = std::max(self.clock_ns_, msg.deliver_time_ns);
        return std::move(msg.payload);
    }

    void tick(PartyCtx& self, std::uint64_t ops) {
        const double ns = static_cast<double>(ops) * 1e9 / opts_.compute_ops_per_s;
        self.clock_ns_ += static_cast<std::uint64_t>(std::llround(ns));
    }

private:
    static std::uint64_t key(int from, int to) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
               static_cast<std::uint32_t>(to);
    }

    void party_main(int id, const PartyProgram& prog) {
        try {
            {
                std::unique_lock<std::mutex> lk(mu_);
                wait_for_token(lk, id);
            }
            prog(*ctxs_[id]);
            std::unique_lock<std::mutex> lk(mu_);
            mark_done(id);
            pass_token(lk, id);
        } catch (...) {
            std::unique_lock<std::mutex> lk(mu_);
            if (!first_error_) first_error_ = std::current_exception();
            if (!abort_) {
                abort_ = true;
                abort_reason_ = "party " + std::to_string(id) + " failed";
            }
            mark_done(id);
            cv_.notify_all();
        }
    }

    // Caller holds mu_. Parties blocked on a finished sender become runnable
    // again so they can observe the closed session and abort cleanly.
    void mark_done(int id) {
        states_[id] = PartyState::Done;
        for (std::size_t i = 0; i < states_.size(); ++i)
            if (states_[i] == PartyState::Waiting && waiting_from_[i] == id)
                states_[i] = PartyState::Runnable;
    }

    // Caller holds mu_. Hand the token to the next runnable party after
    // `self` in cyclic order. Throws in the caller's thread when nobody can
    // make progress (deadlock).
    void pass_token(std::unique_lock<std::mutex>&, int self) {
        const int n = n_parties();
        for (int step = 1; step <= n; ++step) {
            const int p = (self + step) % n;
            if (states_[p] == PartyState::Runnable) {
                token_ = p;
                cv_.notify_all();
                return;
            }
        }
        bool all_done = true;
        for (auto s : states_)
            if (s != PartyState::Done) all_done = false;
        if (all_done) {
            cv_.notify_all();
            return;
        }
        std::ostringstream msg;
        msg << "deadlock:";
        for (std::size_t i = 0; i < states_.size(); ++i)
            if (states_[i] == PartyState::Waiting)
                msg << " party " << i << " waiting on " << waiting_from_[i] << ";";
        abort_ = true;
        abort_reason_ = msg.str();
        cv_.notify_all();
        throw ProtocolError("protocol abort: " + abort_reason_);
    }

    // Caller holds mu_. Blocks until this party holds the token (and is
    // runnable) or the run aborted.
    void wait_for_token(std::unique_lock<std::mutex>& lk, int id) {
        cv_.wait(lk, [&] {
            return abort_ || (token_ == id && states_[id] == PartyState::Runnable);
        });
        if (abort_) throw ProtocolError("protocol abort: " + abort_reason_);
        waiting_from_[id] = -1;
    }

    LinkModel link_;
    SimOptions opts_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::uint64_t, std::deque<InFlight>> queues_;
    std::vector<PartyState> states_;
    std::vector<int> waiting_from_;
    std::vector<std::unique_ptr<PartyCtx>> ctxs_;
    Transcript transcript_;
    int token_ = 0;
    bool abort_ = false;
    std::string abort_reason_;
    std::exception_ptr first_error_;
};

int PartyCtx::n_parties() const { return net_.n_parties(); }

void PartyCtx::send(int to, std::span<const std::uint8_t> payload, const char* tag) {
    net_.send(*this, to, payload, tag);
}

std::vector<std::uint8_t> PartyCtx::recv(int from) { return net_.recv(*this, from); }

void PartyCtx::tick(std::uint64_t ops) { net_.tick(*this, ops); }

Transcript run_parties(std::vector<PartyProgram> programs, const LinkModel& link,
                       std::uint64_t seed, const SimOptions& opts) {
    if (programs.empty()) throw ConfigError("run_parties: no programs");
    Network net(programs.size(), link, seed, opts);
    net.run(programs);
    return net.take_transcript();
}

} // namespace smpcfl
