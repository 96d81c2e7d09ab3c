#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "varmeta/assimilation/idw.hpp"
#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"

namespace varmeta {

/// Observed quantity; u and v denote the stored momentum components hu, hv.
enum class ObsVariable { h = 0, u = 1, v = 2 };
enum class LocationKind { grid, cart };

Component component_of(ObsVariable v);
std::string_view to_string(ObsVariable v);
std::string_view to_string(LocationKind k);

struct ObservationEntry {
  int k = 0;
  ObsVariable variable = ObsVariable::h;
  LocationKind kind = LocationKind::grid;
  /// Grid node for kind == grid.
  int ix = 0;
  int iy = 0;
  /// Cartesian position for kind == cart.
  Location location;
  double value = 0.0;
  /// Observation weight 1 / sigma^2.
  double inv_variance = 1.0;
};

/// Observations in canonical order: sorted by (time, variable, row-major
/// node index), with Cartesian entries keeping their insertion order within
/// each (time, variable) group. Every packed parameter vector follows this
/// order.
class ObservationSet {
 public:
  ObservationSet() = default;
  explicit ObservationSet(std::vector<ObservationEntry> entries);

  std::span<const ObservationEntry> entries() const { return entries_; }
  const ObservationEntry& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Distinct observation times, ascending.
  std::vector<int> times() const;

  Eigen::VectorXd values() const;
  Eigen::VectorXd inv_variances() const;
  /// (x, y) pairs for Cartesian entries, in set order.
  Eigen::VectorXd locations() const;
  std::size_t cart_count() const;

  ObservationSet with_values(const Eigen::VectorXd& values) const;
  ObservationSet with_inv_variances(const Eigen::VectorXd& inv_variances) const;
  ObservationSet with_locations(const Eigen::VectorXd& xy) const;

  /// Throws std::invalid_argument if an entry violates the grid, window or
  /// weight invariants.
  void validate(const Grid& grid) const;

 private:
  std::vector<ObservationEntry> entries_;
};

/// CSV `k,kind,ix_or_lx,iy_or_ly,variable,value,inv_variance`.
void write_observations_csv(std::ostream& out, const ObservationSet& obs);
void write_observations_csv(const std::filesystem::path& path, const ObservationSet& obs);
ObservationSet read_observations_csv(std::istream& in);
ObservationSet read_observations_csv(const std::filesystem::path& path);

/// Full-grid observation operator: identity onto (h, hu, hv) row-major.
Eigen::VectorXd obs_operator_full(const StateVector& state);
StateVector unpack_full(int q, const Eigen::VectorXd& obs_space);

/// Linear observation operator assembled from an ObservationSet. Each entry
/// maps to a sparse stencil over the packed state vector (a single node for
/// grid entries, IDW weights for Cartesian ones).
class ObservationOperator {
 public:
  ObservationOperator() = default;
  ObservationOperator(const ObservationSet& obs, const Grid& grid, const IdwOptions& idw);

  std::size_t size() const { return stencils_.size(); }
  const std::vector<int>& times() const { return times_; }
  /// Entry index range [first, last) observed at time k (empty if none).
  std::pair<std::size_t, std::size_t> range_at(int k) const;

  /// H applied to a packed state vector for entries in [first, last).
  Eigen::VectorXd apply(std::size_t first, std::size_t last, const Eigen::VectorXd& fields) const;
  /// out += H^T w for entries in [first, last); w has last - first components.
  void apply_transpose_add(std::size_t first, std::size_t last, const Eigen::VectorXd& w,
                           Eigen::VectorXd& out) const;

  double apply_entry(std::size_t e, const Eigen::VectorXd& fields) const;
  /// d/dx and d/dy of the interpolated value for a Cartesian entry.
  LocationGradient location_derivative(std::size_t e, const Eigen::VectorXd& fields) const;
  bool exact_hit(std::size_t e) const { return stencils_[e].exact_hit; }
  double min_distance(std::size_t e) const { return stencils_[e].min_distance; }

 private:
  struct Stencil {
    std::vector<int> index;  // into the packed 3 q^2 vector
    std::vector<double> weight;
    std::vector<double> dweight_dx;
    std::vector<double> dweight_dy;
    bool exact_hit = false;
    double min_distance = 0.0;
  };
  std::vector<Stencil> stencils_;
  std::vector<int> times_;
  std::vector<int> entry_time_;
};

}  // namespace varmeta
