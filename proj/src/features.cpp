#include "mrcp/features.hpp"

#include <stdexcept>

#include "mrcp/errors.hpp"

namespace mrcp {

namespace {

// A CCA block or projected pair with no variance carries no similarity.
double safe_corr2(const Matrix& a, const Matrix& b) {
  try {
    return corr2(a, b);
  } catch (const NumericError&) {
    return 0.0;
  }
}

}  // namespace

std::string FeatureTag::to_string() const {
  return "b" + std::to_string(bank) + ":c" + std::to_string(class_label) + ":rho" +
         std::to_string(static_cast<int>(rho));
}

Matrix grand_average(std::span<const Matrix> trials) {
  if (trials.empty()) throw DataError("grand average of an empty class");
  Matrix acc = trials.front();
  for (std::size_t i = 1; i < trials.size(); ++i) {
    if (trials[i].rows() != acc.rows() || trials[i].cols() != acc.cols()) {
      throw DataError("trials differ in shape");
    }
    acc += trials[i];
  }
  return acc / static_cast<double>(trials.size());
}

Matrix TemplateBank::mean() const {
  if (templates.empty()) throw DataError("template bank is empty");
  Matrix acc = templates.front();
  for (std::size_t k = 1; k < templates.size(); ++k) acc += templates[k];
  return acc / static_cast<double>(templates.size());
}

CenteredInputs center_for_multiclass(const Matrix& X, const TemplateBank& bank) {
  if (bank.size() < 2) throw DataError("centering needs at least 2 class templates");
  const Matrix m = bank.mean();
  if (X.rows() != m.rows() || X.cols() != m.cols()) {
    throw std::invalid_argument("center_for_multiclass: shape mismatch");
  }
  CenteredInputs out;
  out.trial = X - m;
  out.templates.reserve(bank.size());
  for (const auto& t : bank.templates) out.templates.push_back(t - m);
  return out;
}

Matrix multiclass_contrast(std::span<const Matrix> templates, std::size_t k) {
  const auto K = templates.size();
  if (K < 2 || k >= K) throw std::invalid_argument("multiclass_contrast: bad class index");
  Matrix others = Matrix::Zero(templates[k].rows(), templates[k].cols());
  for (std::size_t j = 0; j < K; ++j) {
    if (j != k) others += templates[j];
  }
  return others / static_cast<double>(K - 1) - templates[k];
}

PreparedClass prepare_class(const Matrix& template_proj, const Matrix& contrast_proj) {
  if (template_proj.rows() != contrast_proj.rows() || template_proj.cols() != contrast_proj.cols()) {
    throw std::invalid_argument("prepare_class: shape mismatch");
  }
  return {template_proj, contrast_proj, cca_side(template_proj), cca_side(contrast_proj)};
}

CcpTriplet ccp_triplet_projected(const Matrix& trial_proj, const PreparedClass& cls) {
  if (trial_proj.rows() != cls.template_proj.rows() || trial_proj.cols() != cls.template_proj.cols()) {
    throw std::invalid_argument("ccp_triplet_projected: shape mismatch");
  }
  CcpTriplet out;
  out.rho1 = safe_corr2(trial_proj, cls.template_proj);

  // rho_2: both sides projected by the template-side coefficients.
  try {
    const auto r = cca(cca_side(trial_proj), cls.template_side);
    out.rho2 = safe_corr2(trial_proj * r.coeffs_b, cls.template_proj * r.coeffs_b);
  } catch (const NumericError&) {
    out.rho2 = 0.0;
  }

  // rho_3: both sides projected by the residual-side coefficients.
  const Matrix residual = trial_proj - cls.template_proj;
  try {
    const auto r = cca(cca_side(residual), cls.contrast_side);
    out.rho3 = safe_corr2(residual * r.coeffs_a, cls.contrast_proj * r.coeffs_a);
  } catch (const NumericError&) {
    out.rho3 = 0.0;
  }
  return out;
}

CcpTriplet ccp_triplet_projected(const Matrix& trial_proj, const Matrix& template_proj,
                                 const Matrix& contrast_proj) {
  return ccp_triplet_projected(trial_proj, prepare_class(template_proj, contrast_proj));
}

CcpTriplet ccp_triplet(const Matrix& X, const Matrix& class_template, const Matrix& contrast,
                       const Matrix& W) {
  if (X.rows() != W.rows() || class_template.rows() != X.rows() || contrast.rows() != X.rows() ||
      class_template.cols() != X.cols() || contrast.cols() != X.cols()) {
    throw std::invalid_argument("ccp_triplet: shape mismatch");
  }
  return ccp_triplet_projected(X.transpose() * W, class_template.transpose() * W,
                               contrast.transpose() * W);
}

CcpVector ccp_binary(const Matrix& X, const Matrix& first, const Matrix& second, const Matrix& W,
                     int bank, int first_label, int second_label) {
  CcpVector out;
  const Matrix templates[2] = {first, second};
  const int labels[2] = {first_label, second_label};
  for (int k = 0; k < 2; ++k) {
    const Matrix contrast = templates[1 - k] - templates[k];
    const auto t = ccp_triplet(X, templates[k], contrast, W);
    out.values.insert(out.values.end(), {t.rho1, t.rho2, t.rho3});
    for (auto rho : {RhoType::Rho1, RhoType::Rho2, RhoType::Rho3}) {
      out.tags.push_back({bank, labels[k], rho});
    }
  }
  return out;
}

CcpVector ccp_multiclass(const Matrix& X_centered, std::span<const Matrix> centered_templates,
                         const Matrix& W, std::span<const int> labels, int bank) {
  const auto K = centered_templates.size();
  if (K < 2) throw DataError("multiclass features need at least 2 classes");
  if (!labels.empty() && labels.size() != K) throw std::invalid_argument("ccp_multiclass: label count");
  CcpVector out;
  out.values.reserve(3 * K);
  for (std::size_t k = 0; k < K; ++k) {
    const Matrix contrast = multiclass_contrast(centered_templates, k);
    const auto t = ccp_triplet(X_centered, centered_templates[k], contrast, W);
    out.values.insert(out.values.end(), {t.rho1, t.rho2, t.rho3});
    const int label = labels.empty() ? static_cast<int>(k) : labels[k];
    for (auto rho : {RhoType::Rho1, RhoType::Rho2, RhoType::Rho3}) out.tags.push_back({bank, label, rho});
  }
  return out;
}

}  // namespace mrcp
