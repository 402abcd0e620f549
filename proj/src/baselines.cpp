#include "afrelay/baselines.hpp"

#include <cmath>

namespace afrelay {

const char* to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::direct_af:
      return "direct_af";
    case BaselineKind::per_hop_equalization:
      return "per_hop";
    case BaselineKind::separate_lmmse:
      return "separate_lmmse";
    case BaselineKind::no_source_precoder:
      return "no_source_precoder";
  }
  return "unknown";
}

BaselineKind parse_baseline(const std::string& text) {
  if (text == "direct_af") return BaselineKind::direct_af;
  if (text == "per_hop" || text == "per_hop_equalization") return BaselineKind::per_hop_equalization;
  if (text == "separate_lmmse") return BaselineKind::separate_lmmse;
  if (text == "no_source_precoder") return BaselineKind::no_source_precoder;
  throw InvalidInput("unknown baseline '" + text + "'");
}

const char* normalization_note(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::direct_af:
      return "source and relay matrices are scaled truncated identities meeting both budgets with equality";
    case BaselineKind::per_hop_equalization:
      return "source scaled identity; relay = alpha*[hop-1 Wiener filter; 0] with alpha meeting P_r with equality";
    case BaselineKind::separate_lmmse:
      return "per-hop designs at full budget; relay product rescaled to meet P_r with equality";
    case BaselineKind::no_source_precoder:
      return "source scaled identity meeting the source budget; relay designed under P_r";
  }
  return "";
}

namespace {

ComplexMatrix stack_relay_filter(const ComplexMatrix& filter, Eigen::Index n_relay) {
  ComplexMatrix w = ComplexMatrix::Zero(n_relay, n_relay);
  w.topRows(filter.rows()) = filter;
  return w;
}

}  // namespace

DownlinkDesign design_downlink_baseline(BaselineKind kind, const Scenario& s, const DownlinkOptions& options) {
  switch (kind) {
    case BaselineKind::direct_af:
      return identity_init(s);
    case BaselineKind::per_hop_equalization: {
      DownlinkDesign d = identity_init(s);
      const ComplexMatrix& h_br = s.channels.first_hop.front();
      const HermitianMatrix r_r = received_covariance(d.precoder, s.channels, s.noise);
      const ComplexMatrix w1 = lmmse_receiver(h_br * d.precoder, r_r);
      d.forwarding = stack_relay_filter(w1, h_br.rows());
      const double p = downlink_relay_power(d.forwarding, d.precoder, s.channels, s.noise);
      d.forwarding *= std::sqrt(s.budget.relay / p);
      d.equalizers = update_equalizers(d.forwarding, d.precoder, s.channels, s.noise, s.dims);
      return d;
    }
    case BaselineKind::separate_lmmse:
      return separate_lmmse_init(s);
    case BaselineKind::no_source_precoder: {
      DownlinkOptions o = options;
      o.init = DownlinkInit::identity;
      o.optimize_precoder = false;
      return run_algorithm1(s, o).design;
    }
  }
  throw InvalidInput("design_downlink_baseline: unknown kind");
}

UplinkDesign design_uplink_baseline(BaselineKind kind, const Scenario& s) {
  switch (kind) {
    case BaselineKind::direct_af:
      return uplink_identity_init(s);
    case BaselineKind::per_hop_equalization: {
      UplinkDesign d = uplink_identity_init(s);
      const ComplexMatrix h_mr = s.channels.stacked_user_channels();
      const ComplexMatrix f1 =
          lmmse_receiver(h_mr * d.stacked_precoder(), relay_received_covariance(d.precoders, s.channels, s.noise));
      d.forwarding = stack_relay_filter(f1, h_mr.rows());
      const double p = uplink_relay_power(d.forwarding, d.precoders, s.channels, s.noise);
      d.forwarding *= std::sqrt(s.budget.relay / p);
      d.equalizer = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
      return d;
    }
    case BaselineKind::separate_lmmse: {
      UplinkDesign d = uplink_identity_init(s);
      const ComplexMatrix h_mr = s.channels.stacked_user_channels();
      const int streams = s.dims.total_streams();
      ComplexMatrix f1;
      // Hop 1: multiuser uplink to an L-output Wiener receiver.
      for (int inner = 0; inner < 5; ++inner) {
        f1 = lmmse_receiver(h_mr * d.stacked_precoder(), relay_received_covariance(d.precoders, s.channels, s.noise));
        std::vector<ComplexMatrix> obj;
        ComplexVector linear(0);
        std::vector<Eigen::Index> offsets;
        Eigen::Index m = 0;
        Eigen::Index stream_off = 0;
        for (int k = 0; k < s.dims.num_users(); ++k) {
          const ComplexMatrix& h = s.channels.first_hop[static_cast<std::size_t>(k)];
          const Eigen::Index lk = s.dims.users[static_cast<std::size_t>(k)].streams;
          const ComplexMatrix a = f1 * h;
          obj.push_back(kron(ComplexMatrix::Identity(lk, lk), a));
          const ComplexMatrix dt = a.middleRows(stream_off, lk).transpose();
          const ComplexVector g = vec(dt);
          ComplexVector grown(linear.size() + g.size());
          grown << linear, g;
          linear = grown;
          offsets.push_back(m);
          m += h.cols() * lk;
          stream_off += lk;
        }
        std::vector<QuadraticConstraint> cons;
        for (int k = 0; k < s.dims.num_users(); ++k) {
          const auto uk = static_cast<std::size_t>(k);
          const Eigen::Index sz = s.channels.first_hop[uk].cols() * s.dims.users[uk].streams;
          ComplexMatrix sel = ComplexMatrix::Zero(sz, m);
          sel.middleCols(offsets[uk], sz).setIdentity();
          cons.push_back({sel, s.budget.source[uk]});
        }
        const SdpSolution sol = solve_sdp(quadratic_program_sdp(block_diag(obj), linear, cons));
        if (sol.status != SdpStatus::optimal) break;
        const ComplexVector v = complex_block(sol.x, m);
        for (int k = 0; k < s.dims.num_users(); ++k) {
          const auto uk = static_cast<std::size_t>(k);
          const Eigen::Index rows = s.channels.first_hop[uk].cols();
          const Eigen::Index cols = s.dims.users[uk].streams;
          ComplexMatrix pk = unvec(v.segment(offsets[uk], rows * cols), rows, cols);
          const double tr = pk.squaredNorm();
          if (tr > s.budget.source[uk]) pk *= std::sqrt(s.budget.source[uk] / tr);
          d.precoders[uk] = pk;
        }
      }
      f1 = lmmse_receiver(h_mr * d.stacked_precoder(), relay_received_covariance(d.precoders, s.channels, s.noise));
      // Hop 2: point-to-point water-filling of L streams towards the base station.
      const ComplexMatrix f2 = point_to_point_precoder(s.channels.second_hop.front(), s.noise.destination.front(),
                                                       s.budget.relay, streams);
      d.forwarding = f2 * f1;
      const double p = uplink_relay_power(d.forwarding, d.precoders, s.channels, s.noise);
      if (p > 0.0) d.forwarding *= std::sqrt(s.budget.relay / p);
      d.equalizer = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
      return d;
    }
    case BaselineKind::no_source_precoder: {
      UplinkDesign d = uplink_identity_init(s);
      const ForwardingSolution fs =
          forwarding_closed_form(d.precoders, s.channels, s.noise, s.budget.relay, s.dims.total_streams());
      d.forwarding = fs.forwarding;
      d.mu_f = fs.mu_f;
      d.equalizer = equalizer_b(d.forwarding, d.precoders, s.channels, s.noise);
      return d;
    }
  }
  throw InvalidInput("design_uplink_baseline: unknown kind");
}

}  // namespace afrelay
