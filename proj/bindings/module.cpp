#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>

#include "smpcfl/dealer.hpp"
#include "smpcfl/fedavg.hpp"
#include "smpcfl/mpc_ops.hpp"
#include "smpcfl/nn.hpp"
#include "smpcfl/ring.hpp"
#include "smpcfl/secure_nn.hpp"
#include "smpcfl/selftest.hpp"
#include "smpcfl/sharing.hpp"

namespace py = pybind11;
using namespace smpcfl;

namespace {

std::vector<RingElement> to_ring(const std::vector<std::uint64_t>& vals,
                                 const FixedPointConfig& cfg) {
    std::vector<RingElement> out(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) out[i] = ring_reduce(vals[i], cfg);
    return out;
}

std::vector<std::uint64_t> from_ring(const std::vector<RingElement>& vals) {
    std::vector<std::uint64_t> out(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) out[i] = vals[i].v;
    return out;
}

// Full online multiplication of two encoded reals inside a 2-party simnet run.
double secure_multiply(double x, double y, std::uint64_t seed, const FixedPointConfig& cfg) {
    Rng rng(seed);
    auto [t0, t1] = gen_beaver(1, 1, rng, cfg);
    const RingElement enc[2] = {encode_fixed(x, cfg), encode_fixed(y, cfg)};
    auto xs = share(std::span<const RingElement>(enc, 1), 2, rng, cfg);
    auto ys = share(std::span<const RingElement>(enc + 1, 1), 2, rng, cfg);

    std::vector<RingElement> out_shares(2);
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            RandomnessPool pool;
            std::vector<BeaverTriple> ts;
            ts.push_back(std::move(party == 0 ? t0[0] : t1[0]));
            pool.add(std::move(ts), {});
            MpcSession sess(ctx, 1 - party, std::move(pool));
            sess.set_cfg(cfg);
            const ShareVector z = beaver_mul_pooled(sess, party == 0 ? xs[0] : xs[1],
                                                    party == 0 ? ys[0] : ys[1]);
            out_shares[party] = truncate(z).values[0];
        };
    };
    run_parties({program(0), program(1)}, link_preset("6g"), seed);
    return decode_fixed(ring_add(out_shares[0], out_shares[1], cfg), cfg);
}

// Secure comparison 1{y <= 0} through the full mask/open/eval path.
int secure_leq_zero(double y, std::uint64_t seed, const FixedPointConfig& cfg) {
    Rng rng(seed);
    auto [k0, k1] = gen_comparison_key(rng, cfg);
    const RingElement enc[1] = {encode_fixed(y, cfg)};
    auto ys = share(std::span<const RingElement>(enc, 1), 2, rng, cfg);
    std::vector<RingElement> out_shares(2);
    auto program = [&](int party) {
        return [&, party](PartyCtx& ctx) {
            RandomnessPool pool;
            std::vector<ComparisonKey> ks;
            ks.push_back(std::move(party == 0 ? k0 : k1));
            pool.add({}, std::move(ks));
            MpcSession sess(ctx, 1 - party, std::move(pool));
            sess.set_cfg(cfg);
            out_shares[party] = compare_leq_zero_pooled(sess, party == 0 ? ys[0] : ys[1]).values[0];
        };
    };
    run_parties({program(0), program(1)}, link_preset("6g"), seed);
    return static_cast<int>(ring_add(out_shares[0], out_shares[1], cfg).v);
}

std::vector<double> secure_aggregate_values(const std::vector<std::vector<double>>& models,
                                            std::uint64_t seed, const FixedPointConfig& cfg) {
    if (models.empty()) throw ConfigError("secure_aggregate: no models");
    // Wrap each flat vector in a single dense layer so the fedavg protocol
    // machinery applies unchanged.
    std::vector<ModelParams> wrapped;
    for (const auto& m : models) {
        ModelParams p;
        Layer l;
        l.spec = {LayerKind::Dense, {1, static_cast<std::uint32_t>(m.size())}};
        l.weights = m;
        p.layers.push_back(std::move(l));
        wrapped.push_back(std::move(p));
    }
    const auto agg = secure_aggregate(wrapped, cfg, link_preset("6g"), seed);
    return decrypt_model(agg.p0, agg.p1).layers[0].weights;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Secret-sharing MPC primitives and federated-learning protocols";

    py::register_exception<Error>(m, "SmpcError");

    py::class_<FixedPointConfig>(m, "FixedPointConfig")
        .def(py::init([](int k, int f) {
                 FixedPointConfig c{k, f};
                 c.validate();
                 return c;
             }),
             py::arg("k") = 32, py::arg("f") = 16)
        .def_readonly("k", &FixedPointConfig::ring_bits)
        .def_readonly("f", &FixedPointConfig::frac_bits)
        .def("__repr__", [](const FixedPointConfig& c) {
            return "FixedPointConfig(k=" + std::to_string(c.ring_bits) +
                   ", f=" + std::to_string(c.frac_bits) + ")";
        });

    m.def("encode", [](double r, const FixedPointConfig& cfg) { return encode_fixed(r, cfg).v; },
          py::arg("value"), py::arg("cfg"));
    m.def("decode", [](std::uint64_t v, const FixedPointConfig& cfg) {
              return decode_fixed(ring_reduce(v, cfg), cfg);
          },
          py::arg("value"), py::arg("cfg"));
    m.def("ring_add", [](std::uint64_t a, std::uint64_t b, const FixedPointConfig& cfg) {
        return ring_add(ring_reduce(a, cfg), ring_reduce(b, cfg), cfg).v;
    });
    m.def("ring_mul", [](std::uint64_t a, std::uint64_t b, const FixedPointConfig& cfg) {
        return ring_mul(ring_reduce(a, cfg), ring_reduce(b, cfg), cfg).v;
    });

    m.def("share",
          [](const std::vector<std::uint64_t>& secret, int n, std::uint64_t seed,
             const FixedPointConfig& cfg) {
              Rng rng(seed);
              const auto shares = share(to_ring(secret, cfg), n, rng, cfg);
              std::vector<std::vector<std::uint64_t>> out;
              for (const auto& s : shares) out.push_back(from_ring(s.values));
              return out;
          },
          py::arg("secret"), py::arg("n"), py::arg("seed"), py::arg("cfg"));
    m.def("reconstruct",
          [](const std::vector<std::vector<std::uint64_t>>& shares, const FixedPointConfig& cfg) {
              std::vector<ShareVector> sv;
              for (std::size_t p = 0; p < shares.size(); ++p) {
                  ShareVector s;
                  s.party = static_cast<int>(p);
                  s.n_parties = static_cast<int>(shares.size());
                  s.cfg = cfg;
                  s.values = to_ring(shares[p], cfg);
                  sv.push_back(std::move(s));
              }
              return from_ring(reconstruct(sv));
          },
          py::arg("shares"), py::arg("cfg"));

    m.def("secure_multiply", &secure_multiply, py::arg("x"), py::arg("y"), py::arg("seed"),
          py::arg("cfg"), "Beaver multiplication of two reals under the 2-party protocol");
    m.def("secure_leq_zero", &secure_leq_zero, py::arg("y"), py::arg("seed"), py::arg("cfg"),
          "FSS comparison 1{y <= 0} under the 2-party protocol");
    m.def("secure_aggregate", &secure_aggregate_values, py::arg("models"), py::arg("seed"),
          py::arg("cfg"), "FedAvg of parameter vectors under secret sharing");

    m.def("selftest", [] {
        const auto results = run_selftest();
        bool ok = true;
        for (const auto& r : results) ok = ok && r.passed;
        return ok;
    });
}
