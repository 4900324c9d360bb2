#pragma once

#include <string>
#include <vector>

#include "smpcfl/simnet.hpp"

namespace smpcfl {

// Transcript privacy scan: every message must carry an allowlisted tag, i.e.
// be a fresh additive share in transit, a masked opening, or a deliberate
// final reveal. Anything else means a secret-dependent value crossed the
// wire unmasked.
struct AuditReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::size_t opened_masked = 0;
    std::size_t reveals = 0;
    std::size_t share_deliveries = 0;
};

AuditReport audit_transcript(const Transcript& t);

} // namespace smpcfl
