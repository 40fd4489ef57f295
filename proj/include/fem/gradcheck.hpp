#ifndef FEM_GRADCHECK_HPP
#define FEM_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fem/common.hpp"
#include "fem/optimizer.hpp"

namespace fem::nn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central finite differences against the analytic gradients already stored in
// the param views. Meant to run on the double instantiation of a model.
inline GradCheckResult grad_check(const std::function<double()>& f,
                                  std::vector<ParamView<double>>& params, double h = 1e-4) {
  GradCheckResult res;
  for (auto& p : params) {
    for (Index i = 0; i < p.size; ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + h;
      const double fp = f();
      p.value[i] = saved - h;
      const double fm = f();
      p.value[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw ValueError("grad_check: non-finite objective at parameter '" + p.name + "'");
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = p.grad[i];
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst_param = p.name;
        res.worst_index = i;
        res.analytic = analytic;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace fem::nn

#endif
