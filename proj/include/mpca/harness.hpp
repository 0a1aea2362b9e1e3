#pragma once

// Method comparison sweeps and population-level checks of the subspace relations
// between MPCA, (2D)²PCA and the generative model's target subspace.

#include "mpca/baselines.hpp"
#include "mpca/glram.hpp"
#include "mpca/simulator.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace mpca {

enum class Method { mpca, pca, twod2pca };

Method parse_method(const std::string& name);
std::string method_name(Method m);
std::vector<Method> parse_methods(const std::string& list);

struct GridPoint {
  Index pdim = 1;
  Index qdim = 1;
};

/// "1x1,2x2,3x4" → {(1,1),(2,2),(3,4)}.
std::vector<GridPoint> parse_grid(const std::string& text);

struct ReportRow {
  std::string method;
  Index pdim = 0;
  Index qdim = 0;
  Index components = 0;  // p̃q̃ for every method; PCA uses k = p̃q̃
  std::int64_t free_parameters = 0;  // per basis element
  double train_error = 0;  // mean ‖Xᵢ − X̂ᵢ‖²_F
  double test_error = 0;
  double test_rmse = 0;  // per-pixel
  double explained_variance = 0;  // on the training set
  int iterations = 0;
  double wall_time_s = 0;
};

/// Fits every method at every grid point on `train` and scores reconstruction of
/// both sets. The test set is centered with the training mean. `base` supplies the
/// GLRAM settings; its pdim/qdim are overridden per grid point.
std::vector<ReportRow> compare(const MatrixDataset<double>& train,
                               const MatrixDataset<double>& test,
                               const std::vector<GridPoint>& grid,
                               const std::vector<Method>& methods, const MpcaConfig& base = {});

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// Mean squared Frobenius distance between matched samples.
double mean_squared_error(const MatrixDataset<double>& a, const MatrixDataset<double>& b);

struct VerifyCheck {
  std::string name;
  Index pdim = 0;
  Index qdim = 0;
  double residual = 0;
  double tolerance = 0;
  bool passed = false;
  bool skipped = false;
  std::string note;
};

struct VerifyReport {
  Index p = 0, q = 0, p0 = 0, q0 = 0;
  double sigma2 = 0;
  bool degenerate_spectrum = false;
  std::vector<VerifyCheck> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  double containment_tol = 1e-6;
  double shift_tol = 1e-8;
  double vector_tol = 1e-6;
  double simple_root_gap = 1e-6;
  MpcaConfig glram{};  // pdim/qdim overridden per regime
};

/// Runs the nesting regimes (dimensionality under/over/exactly specified on each
/// side) and the (2D)²PCA eigenvalue-shift identities on the model's exact Σ.
VerifyReport verify(const ModelSpec<double>& spec, const VerifyOptions& opt = {});

}  // namespace mpca
