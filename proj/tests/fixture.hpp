#pragma once

#include <cmath>
#include <memory>

#include "dsslab/galerkin.hpp"
#include "dsslab/orbit.hpp"
#include "dsslab/swirl.hpp"

namespace dsslab::testing {

// Small self-similar MHD problem shared across tests: canonical swirl W, one swirl D about e_1.
struct SmallProblem {
  Grid grid{6.0, 48};
  Spectral sp{grid};
  double period = std::log(2.0);
  GalerkinBasis basis;
  std::unique_ptr<CutoffBackground> W, D, Z;
  CoeffTables tab;
  EnergyBudget budget;

  explicit SmallProblem(int k = 8) {
    BasisOptions bo;
    bo.k = k;
    basis = build_basis(sp, bo, 0.5);
    HeatBackground hw(std::make_shared<SwirlBackground>(SwirlData::canonical(0.05)), grid, period, 1);
    W = std::make_unique<CutoffBackground>(CutoffBackground::build(hw, CutoffOptions{}));
    SwirlData sd;
    sd.terms.push_back({{1, 0, 0}, 0.04, 0, 0});
    HeatBackground hd(std::make_shared<SwirlBackground>(sd), grid, period, 1);
    D = std::make_unique<CutoffBackground>(CutoffBackground::build(hd, CutoffOptions{}));
    Z = std::make_unique<CutoffBackground>(CutoffBackground::zero(grid, period, 1));
    tab = assemble_tables(basis, *W, {D.get()}, System::MHD);
    budget = EnergyBudget::make(forcing_norm_c2(*W, {D.get()}, System::MHD), System::MHD, period);
  }

  static const SmallProblem& get() {
    static const SmallProblem p;
    return p;
  }
};

}  // namespace dsslab::testing
