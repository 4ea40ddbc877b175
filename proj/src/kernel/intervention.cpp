#include "kernel/intervention.hpp"

#include "kernel/errors.hpp"

namespace hare {

std::string_view to_string(InterventionKind kind) {
    return kind == InterventionKind::TollChange ? "toll-change" : "price-change";
}

std::string_view to_string(InterventionSource source) {
    return source == InterventionSource::Human ? "human" : "scripted-policy";
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "";
        case RejectReason::Power: return "power";
        case RejectReason::Budget: return "budget";
        case RejectReason::Quota: return "quota";
        case RejectReason::Bounds: return "bounds";
        case RejectReason::Increment: return "increment";
        case RejectReason::Phase: return "phase";
        case RejectReason::UnknownTarget: return "unknown-target";
    }
    return "?";
}

InterventionKind parse_intervention_kind(std::string_view text) {
    if (text == "toll-change" || text == "toll") return InterventionKind::TollChange;
    if (text == "price-change" || text == "price") return InterventionKind::PriceChange;
    throw ProtocolError("unknown intervention kind '" + std::string(text) + "'");
}

}  // namespace hare
