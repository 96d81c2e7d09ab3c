#include "varmeta/metaopt/metaoptimize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "varmeta/errors.hpp"

namespace varmeta {

std::string_view to_string(MetaStatus s) {
  switch (s) {
    case MetaStatus::completed:
      return "completed";
    case MetaStatus::converged:
      return "converged";
    case MetaStatus::broke_down:
      return "broke_down";
  }
  return "?";
}

OuterEvaluation evaluate_outer(const MetaProblem& meta, const Eigen::VectorXd& parameters) {
  MetaProblem installed = meta;
  installed.inner = install_parameters(meta, parameters);
  OuterEvaluation ev;
  ev.analysis = solve_4dvar(installed.inner);
  ev.supersensitivity = compute_supersensitivity(installed, ev.analysis.analysis);
  ev.psi = ev.supersensitivity.psi;
  ev.gradient = outer_gradient(installed, ev.analysis.analysis, ev.supersensitivity.mu);
  return ev;
}

std::optional<Bounds> outer_bounds(const MetaProblem& meta) {
  const Eigen::VectorXd p = pack_parameters(meta);
  const double inf = std::numeric_limits<double>::infinity();
  switch (meta.parameter_kind) {
    case ParameterKind::obs_values:
      return std::nullopt;
    case ParameterKind::obs_weights:
      return Bounds{Eigen::VectorXd::Constant(p.size(), kMinInverseVariance),
                    Eigen::VectorXd::Constant(p.size(), inf)};
    case ParameterKind::obs_locations: {
      const Grid& g = meta.inner.grid();
      return Bounds{Eigen::VectorXd::Constant(p.size(), g.lower),
                    Eigen::VectorXd::Constant(p.size(), g.upper)};
    }
  }
  return std::nullopt;
}

namespace {

struct VectorLess {
  bool operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                        b.data() + b.size());
  }
};

std::string format_warning(int iter, double residual) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "outer iteration %d: inner optimality residual %.3g exceeds the warning level",
                iter, residual);
  return buf;
}

}  // namespace

MetaResult metaoptimize(const MetaProblem& meta, const OuterCallback& on_iteration) {
  meta.validate();
  MetaResult result;

  // Every successful evaluation is kept so accepted iterates can report
  // their inner diagnostics.
  std::map<Eigen::VectorXd, OuterEvaluation, VectorLess> evaluations;

  const Objective objective = [&](const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
    ++result.evaluations;
    try {
      OuterEvaluation ev = evaluate_outer(meta, p);
      if (!std::isfinite(ev.psi) || !ev.gradient.allFinite())
        return std::numeric_limits<double>::infinity();
      grad = ev.gradient;
      const double psi = ev.psi;
      evaluations.insert_or_assign(p, std::move(ev));
      return psi;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const auto record_for = [&](const IterationRecord& rec, const Eigen::VectorXd& p) {
    OuterRecord out;
    out.outer_iter = rec.iteration;
    out.psi = rec.value;
    out.step_norm = rec.step_norm;
    out.parameters = p;
    if (const auto it = evaluations.find(p); it != evaluations.end()) {
      out.inner_grad_residual = it->second.analysis.optimality_residual();
      out.cg_iters = it->second.supersensitivity.cg_iterations;
      out.cg_residual = it->second.supersensitivity.cg_residual;
    }
    return out;
  };

  SolverSettings settings = meta.outer;
  settings.bounds = outer_bounds(meta);

  const IterationCallback cb = [&](const IterationRecord& rec, const Eigen::VectorXd& p) {
    OuterRecord r = record_for(rec, p);
    if (r.inner_grad_residual > meta.inner_residual_warning)
      result.warnings.push_back(format_warning(r.outer_iter, r.inner_grad_residual));
    result.history.push_back(r);
    if (on_iteration) on_iteration(r);
  };

  const Eigen::VectorXd p0 = pack_parameters(meta);
  MinimizeResult r;
  try {
    r = lbfgs_minimize(objective, p0, settings, cb);
  } catch (const NonFiniteError& e) {
    result.status = MetaStatus::broke_down;
    result.warnings.push_back(std::string("starting point failed: ") + e.what());
    result.parameters = p0;
    result.psi_initial = result.psi_final = std::numeric_limits<double>::infinity();
    return result;
  }

  result.parameters = r.x;
  result.psi_initial = result.history.front().psi;
  result.psi_final = r.value;
  switch (r.status) {
    case OptimizerStatus::max_iterations:
      result.status = MetaStatus::completed;
      break;
    case OptimizerStatus::converged:
      result.status = MetaStatus::converged;
      break;
    case OptimizerStatus::line_search_failed:
      result.status = MetaStatus::broke_down;
      result.warnings.push_back("outer line search failed; returning the best iterate");
      break;
  }
  if (const auto it = evaluations.find(r.x); it != evaluations.end())
    result.final_analysis = it->second.analysis;
  else
    result.final_analysis = solve_4dvar(install_parameters(meta, r.x));
  return result;
}

}  // namespace varmeta
