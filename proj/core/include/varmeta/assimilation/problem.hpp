#pragma once

#include "varmeta/assimilation/covariance.hpp"
#include "varmeta/assimilation/idw.hpp"
#include "varmeta/assimilation/observations.hpp"
#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"
#include "varmeta/model/swe_model.hpp"
#include "varmeta/optim/lbfgs.hpp"

namespace varmeta {

enum class ObsOperatorKind { full_grid, idw };

std::string_view to_string(ObsOperatorKind k);

/// Everything that defines one 4D-Var cost function. Immutable once built;
/// the observation operator is assembled in the constructor.
class AssimilationProblem {
 public:
  AssimilationProblem(Grid grid, ModelParams params, StateVector background,
                      BackgroundCovariance b_cov, ObservationSet obs, ObsOperatorKind kind,
                      IdwOptions idw = {}, SolverSettings inner = {});

  const Grid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }
  const StateVector& background() const { return background_; }
  const BackgroundCovariance& b_cov() const { return b_cov_; }
  const ObservationSet& obs() const { return obs_; }
  ObsOperatorKind operator_kind() const { return kind_; }
  const IdwOptions& idw() const { return idw_; }
  const SolverSettings& inner() const { return inner_; }
  const ObservationOperator& op() const { return op_; }

  /// Same problem with a different observation set (operator rebuilt).
  AssimilationProblem with_observations(ObservationSet obs) const;
  AssimilationProblem with_inner(SolverSettings inner) const;
  AssimilationProblem with_background(StateVector background) const;

 private:
  Grid grid_;
  ModelParams params_;
  StateVector background_;
  BackgroundCovariance b_cov_;
  ObservationSet obs_;
  ObsOperatorKind kind_;
  IdwOptions idw_;
  SolverSettings inner_;
  ObservationOperator op_;
};

}  // namespace varmeta
