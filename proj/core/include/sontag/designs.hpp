#pragma once

#include <optional>
#include <string_view>

#include "sontag/clf.hpp"
#include "sontag/control.hpp"
#include "sontag/model.hpp"
#include "sontag/riccati.hpp"

namespace sontag {

// The four locally optimal designs compared on a feedback-linearizable plant:
//   i   Sontag-type law with the LQR value function 1/2 x^T P x as CLF
//   ii  Sontag-type law with the transformed CLF 1/2 T(x)^T P~ T(x)
//   iii feedback linearization with v = -K_fbl z matched to the LQR at 0
//   iv  LQR on the linearization
enum class Design { kSontagLocal, kSontagGlobal, kFeedbackLinearizing, kLqr };

std::string_view design_label(Design d);
std::optional<Design> parse_design(std::string_view label);

struct DesignSet {
  Linearization linearization;
  LqrDesign lqr;
  QuadraticClf local_clf;
  TransformedClf global_clf;
  SontagController sontag_local;
  SontagController sontag_global;
  FblController fbl;
  LqrController lqr_controller;

  Controller controller(Design d) const;
  /// CLF used to record V and lambda for a design (the transformed one for ii).
  Clf clf(Design d) const;
};

/// Linearize, gate on stabilizability, solve the Riccati equation, build the
/// CLFs and all four controllers. Throws NotStabilizable at the gate and
/// BadWeights for non-SPD weights.
DesignSet synthesize_designs(const Plant& plant, const Matrix& q, const Matrix& r);

}  // namespace sontag
