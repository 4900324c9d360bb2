#include "smpcfl/selftest.hpp"

#include <cmath>
#include <ostream>
#include <span>
#include <sstream>

#include "smpcfl/dealer.hpp"
#include "smpcfl/errors.hpp"
#include "smpcfl/fedavg.hpp"
#include "smpcfl/nn.hpp"
#include "smpcfl/ring.hpp"
#include "smpcfl/rng.hpp"
#include "smpcfl/sharing.hpp"

namespace smpcfl {

namespace {

SuiteResult fss_exhaustive_suite() {
    SuiteResult r{"fss-comparison-exhaustive-k8", true, ""};
    const FixedPointConfig cfg{8, 2};
    Rng rng(101);
    std::size_t checked = 0;
    for (int trial = 0; trial < 256; ++trial) {
        auto [k0, k1] = gen_comparison_key(rng, cfg);
        const RingElement a = ring_add(k0.mask_share, k1.mask_share, cfg);
        for (std::uint64_t yv = 0; yv < 256; ++yv) {
            const RingElement y{yv};
            const RingElement x = ring_add(y, a, cfg);
            const RingElement got =
                ring_add(fss_eval(0, k0, x, cfg), fss_eval(1, k1, x, cfg), cfg);
            const std::uint64_t want = signed_value(y, cfg) <= 0 ? 1 : 0;
            ++checked;
            if (got.v != want) {
                r.passed = false;
                std::ostringstream os;
                os << "mismatch at mask=" << a.v << " y=" << signed_value(y, cfg) << ": got "
                   << got.v << " want " << want;
                r.detail = os.str();
                return r;
            }
        }
    }
    r.detail = std::to_string(checked) + " (mask, input) pairs";
    return r;
}

SuiteResult beaver_suite(const std::string& p0_path, const std::string& p1_path) {
    SuiteResult r{"beaver-triple-identity", true, ""};
    const FixedPointConfig cfg{32, 16};
    auto check = [&](const BeaverTriple& t0, const BeaverTriple& t1,
                     const FixedPointConfig& c) -> bool {
        for (std::size_t j = 0; j < t0.size(); ++j) {
            const RingElement a = ring_add(t0.a.values[j], t1.a.values[j], c);
            const RingElement b = ring_add(t0.b.values[j], t1.b.values[j], c);
            const RingElement cc = ring_add(t0.c.values[j], t1.c.values[j], c);
            if (ring_mul(a, b, c).v != cc.v) return false;
        }
        return true;
    };
    if (!p0_path.empty()) {
        const RandomnessFile f0 = read_randomness_file(p0_path);
        const RandomnessFile f1 = read_randomness_file(p1_path);
        if (f0.triples.size() != f1.triples.size()) {
            r.passed = false;
            r.detail = "party files hold different triple counts";
            return r;
        }
        for (std::size_t i = 0; i < f0.triples.size(); ++i) {
            if (!check(f0.triples[i], f1.triples[i], f0.cfg)) {
                r.passed = false;
                r.detail = "identity violation: triple " + std::to_string(i) +
                           " fails c = a*b mod N";
                return r;
            }
        }
        r.detail = std::to_string(f0.triples.size()) + " file triples";
        return r;
    }
    Rng rng(202);
    auto [t0, t1] = gen_beaver(10000, 1, rng, cfg);
    for (std::size_t i = 0; i < t0.size(); ++i) {
        if (!check(t0[i], t1[i], cfg)) {
            r.passed = false;
            r.detail = "identity violation: triple " + std::to_string(i) + " fails c = a*b mod N";
            return r;
        }
    }
    r.detail = "10000 fresh triples";
    return r;
}

SuiteResult sharing_suite() {
    SuiteResult r{"share-reconstruct-roundtrip", true, ""};
    Rng rng(303);
    const FixedPointConfig cfg{32, 16};
    for (int n : {2, 3, 5}) {
        for (int trial = 0; trial < 3000; ++trial) {
            const RingElement secret = rng.ring(cfg);
            const RingElement arr[1] = {secret};
            const auto shares = share(std::span<const RingElement>(arr, 1), n, rng, cfg);
            const auto back = reconstruct(shares);
            if (back[0].v != secret.v) {
                r.passed = false;
                r.detail = "round-trip failed at n=" + std::to_string(n);
                return r;
            }
        }
    }
    r.detail = "9000 round-trips, n in {2,3,5}";
    return r;
}

SuiteResult aggregation_suite() {
    SuiteResult r{"aggregation-exactness", true, ""};
    const FixedPointConfig cfg{64, 16};
    Rng rng(404);
    for (int n : {3, 5}) {
        std::vector<ModelParams> models;
        for (int i = 0; i < n; ++i) {
            Rng mr(derive_seed(404, "model", static_cast<std::uint64_t>(n) * 100 + i));
            models.push_back(make_reference_model(2, mr));
        }
        const auto plain = fedavg_plain(models);
        const auto agg = secure_aggregate(models, cfg, link_preset("6g"), 405 + n);
        const auto got = decrypt_model(agg.p0, agg.p1);
        const double tol = 2.0 * std::ldexp(1.0, -cfg.frac_bits);
        const auto flat_plain = [&] {
            std::vector<double> v;
            for (const auto& l : plain.layers) {
                v.insert(v.end(), l.weights.begin(), l.weights.end());
                v.insert(v.end(), l.bias.begin(), l.bias.end());
            }
            return v;
        }();
        const auto flat_got = [&] {
            std::vector<double> v;
            for (const auto& l : got.layers) {
                v.insert(v.end(), l.weights.begin(), l.weights.end());
                v.insert(v.end(), l.bias.begin(), l.bias.end());
            }
            return v;
        }();
        for (std::size_t i = 0; i < flat_plain.size(); ++i) {
            if (std::abs(flat_plain[i] - flat_got[i]) > tol) {
                r.passed = false;
                r.detail = "secure aggregate differs from plain mean beyond 2 LSB at n=" +
                           std::to_string(n);
                return r;
            }
        }
    }
    r.detail = "n in {3,5}, reference model, |delta| <= 2 LSB";
    return r;
}

} // namespace

std::vector<SuiteResult> run_selftest(const std::string& randomness_p0,
                                      const std::string& randomness_p1) {
    std::vector<SuiteResult> out;
    out.push_back(fss_exhaustive_suite());
    out.push_back(beaver_suite(randomness_p0, randomness_p1));
    out.push_back(sharing_suite());
    out.push_back(aggregation_suite());
    return out;
}

bool report_selftest(const std::vector<SuiteResult>& results, std::ostream& os) {
    bool all = true;
    for (const auto& r : results) {
        os << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) os << ": " << r.detail;
        os << '\n';
        all = all && r.passed;
    }
    return all;
}

} // namespace smpcfl
