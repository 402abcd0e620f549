#pragma once

#include <string>

#include "afrelay/channel.hpp"
#include "afrelay/downlink.hpp"
#include "afrelay/uplink.hpp"

namespace afrelay {

enum class BaselineKind { direct_af, per_hop_equalization, separate_lmmse, no_source_precoder };

const char* to_string(BaselineKind kind);
BaselineKind parse_baseline(const std::string& text);

/// How each scheme meets its power budgets; written next to results so the
/// comparison can be audited.
const char* normalization_note(BaselineKind kind);

/// direct_af: scaled identities, Wiener equalizer.
/// per_hop_equalization: hop-1 Wiener filter as the first L relay rows, scaled to P_r.
/// separate_lmmse: the Algorithm-1 initializer.
/// no_source_precoder: Algorithm 1 with T held at the scaled identity.
DownlinkDesign design_downlink_baseline(BaselineKind kind, const Scenario& scenario,
                                        const DownlinkOptions& options = {});

/// direct_af and per_hop_equalization as in the downlink;
/// separate_lmmse: multiuser hop-1 design (5 alternations of Wiener F_1 and
/// precoder QP), water-filling hop 2, F = F_2 F_1 scaled to P_r;
/// no_source_precoder: scaled-identity P, closed-form F, Wiener B.
UplinkDesign design_uplink_baseline(BaselineKind kind, const Scenario& scenario);

}  // namespace afrelay
