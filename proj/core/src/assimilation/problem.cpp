#include "varmeta/assimilation/problem.hpp"

#include <stdexcept>

namespace varmeta {

std::string_view to_string(ObsOperatorKind k) {
  return k == ObsOperatorKind::full_grid ? "full_grid" : "idw";
}

AssimilationProblem::AssimilationProblem(Grid grid, ModelParams params, StateVector background,
                                         BackgroundCovariance b_cov, ObservationSet obs,
                                         ObsOperatorKind kind, IdwOptions idw,
                                         SolverSettings inner)
    : grid_(grid),
      params_(params),
      background_(std::move(background)),
      b_cov_(std::move(b_cov)),
      obs_(std::move(obs)),
      kind_(kind),
      idw_(idw),
      inner_(std::move(inner)) {
  grid_.validate();
  params_.validate();
  if (background_.q() != grid_.q) throw std::invalid_argument("background does not match grid");
  if (!background_.all_finite()) throw std::invalid_argument("background is not finite");
  if (b_cov_.q() != grid_.q) throw std::invalid_argument("covariance does not match grid");
  obs_.validate(grid_);
  if (kind_ == ObsOperatorKind::full_grid && obs_.cart_count() > 0)
    throw std::invalid_argument("full-grid operator cannot take Cartesian observations");
  op_ = ObservationOperator(obs_, grid_, idw_);
}

AssimilationProblem AssimilationProblem::with_observations(ObservationSet obs) const {
  return AssimilationProblem(grid_, params_, background_, b_cov_, std::move(obs), kind_, idw_,
                             inner_);
}

AssimilationProblem AssimilationProblem::with_inner(SolverSettings inner) const {
  AssimilationProblem p = *this;
  p.inner_ = std::move(inner);
  return p;
}

AssimilationProblem AssimilationProblem::with_background(StateVector background) const {
  return AssimilationProblem(grid_, params_, std::move(background), b_cov_, obs_, kind_, idw_,
                             inner_);
}

}  // namespace varmeta
