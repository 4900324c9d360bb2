#include "smpcfl/audit.hpp"

#include <cstring>

namespace smpcfl {

AuditReport audit_transcript(const Transcript& t) {
    AuditReport rep;
    for (std::size_t i = 0; i < t.log.size(); ++i) {
        const auto& m = t.log[i];
        if (m.tag == tag::kShare) {
            ++rep.share_deliveries;
        } else if (m.tag == tag::kOpenE || m.tag == tag::kOpenD || m.tag == tag::kOpenX) {
            ++rep.opened_masked;
        } else if (m.tag == tag::kRevealOutput || m.tag == tag::kRevealGlobal) {
            ++rep.reveals;
        } else {
            rep.ok = false;
            rep.violations.push_back("message " + std::to_string(i) + " (" +
                                     std::to_string(m.from) + "->" + std::to_string(m.to) +
                                     ") has non-allowlisted tag '" + m.tag + "'");
        }
    }
    return rep;
}

} // namespace smpcfl
