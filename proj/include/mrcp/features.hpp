#pragma once

#include <span>
#include <string>
#include <vector>

#include "mrcp/numerics.hpp"

namespace mrcp {

enum class RhoType { Rho1 = 1, Rho2 = 2, Rho3 = 3 };

/// Where a feature column came from.
struct FeatureTag {
  int bank = 0;        ///< 1-based filter-bank index
  int class_label = 0;
  RhoType rho = RhoType::Rho1;

  std::string to_string() const;
  bool operator==(const FeatureTag&) const = default;
};

struct CcpVector {
  std::vector<double> values;
  std::vector<FeatureTag> tags;
};

/// Elementwise mean of equally shaped trials.
Matrix grand_average(std::span<const Matrix> trials);

/// Per-class grand averages for one filter bank.
struct TemplateBank {
  std::vector<Matrix> templates;  ///< indexed like `labels`
  std::vector<int> labels;
  int bank = 0;

  /// (1/K) * sum of the templates.
  Matrix mean() const;
  std::size_t size() const { return templates.size(); }
};

struct CenteredInputs {
  Matrix trial;
  std::vector<Matrix> templates;
};

/// Removes the mean template from the trial and from every template.
CenteredInputs center_for_multiclass(const Matrix& X, const TemplateBank& bank);

/// rho_1, rho_2, rho_3 of one trial against one class template. The contrast
/// is the matrix the residual X - template is compared with.
struct CcpTriplet {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double rho3 = 0.0;
};

CcpTriplet ccp_triplet(const Matrix& X, const Matrix& class_template, const Matrix& contrast,
                       const Matrix& W);

/// Same quantities on already projected data: trial^T W, template^T W, contrast^T W.
CcpTriplet ccp_triplet_projected(const Matrix& trial_proj, const Matrix& template_proj,
                                 const Matrix& contrast_proj);

/// Projected template and contrast with their CCA sides prepared once per class.
struct PreparedClass {
  Matrix template_proj;
  Matrix contrast_proj;
  CcaSide template_side;
  CcaSide contrast_side;
};

PreparedClass prepare_class(const Matrix& template_proj, const Matrix& contrast_proj);
CcpTriplet ccp_triplet_projected(const Matrix& trial_proj, const PreparedClass& cls);

/// Six coefficients ordered (rho1, rho2, rho3) for the first class, then the second.
CcpVector ccp_binary(const Matrix& X, const Matrix& first, const Matrix& second, const Matrix& W,
                     int bank = 0, int first_label = 0, int second_label = 1);

/// 3K coefficients on inputs already centered by center_for_multiclass.
CcpVector ccp_multiclass(const Matrix& X_centered, std::span<const Matrix> centered_templates,
                         const Matrix& W, std::span<const int> labels = {}, int bank = 0);

/// Contrast for class k: mean of the other templates minus template k.
Matrix multiclass_contrast(std::span<const Matrix> templates, std::size_t k);

}  // namespace mrcp
