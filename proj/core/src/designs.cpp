#include "sontag/designs.hpp"

#include "sontag/errors.hpp"

namespace sontag {

std::string_view design_label(Design d) {
  switch (d) {
    case Design::kSontagLocal:
      return "i";
    case Design::kSontagGlobal:
      return "ii";
    case Design::kFeedbackLinearizing:
      return "iii";
    case Design::kLqr:
      return "iv";
  }
  return "?";
}

std::optional<Design> parse_design(std::string_view label) {
  for (Design d : {Design::kSontagLocal, Design::kSontagGlobal, Design::kFeedbackLinearizing,
                   Design::kLqr}) {
    if (design_label(d) == label) return d;
  }
  return std::nullopt;
}

Controller DesignSet::controller(Design d) const {
  switch (d) {
    case Design::kSontagLocal:
      return sontag_local;
    case Design::kSontagGlobal:
      return sontag_global;
    case Design::kFeedbackLinearizing:
      return fbl;
    case Design::kLqr:
      return lqr_controller;
  }
  return ZeroController{static_cast<int>(lqr.b.cols())};
}

Clf DesignSet::clf(Design d) const {
  if (d == Design::kSontagGlobal) return global_clf;
  return local_clf;
}

DesignSet synthesize_designs(const Plant& plant, const Matrix& q, const Matrix& r) {
  Linearization lin = linearize(plant.system);
  if (!stabilizability_check(lin.a, lin.b)) {
    throw NotStabilizable("not stabilizable: linearization (A, B) fails the Riccati gate");
  }
  LqrDesign lqr = solve_care(lin.a, lin.b, q, r);
  QuadraticClf local = build_lqr_clf(lqr);
  TransformedClf global = build_global_clf(lqr, plant.fbl);
  SontagController sontag_local(local, plant.system, lqr.q, lqr.r);
  SontagController sontag_global(global, plant.system, lqr.q, lqr.r);
  FblController fbl{plant.fbl, fbl_gain_design(plant.fbl, lqr)};
  LqrController lqr_ctrl{lqr.k};
  return DesignSet{std::move(lin),           std::move(lqr),           std::move(local),
                   std::move(global),        std::move(sontag_local),  std::move(sontag_global),
                   std::move(fbl),           std::move(lqr_ctrl)};
}

}  // namespace sontag
