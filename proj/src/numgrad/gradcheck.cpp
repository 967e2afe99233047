#include "driftids/numgrad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftids/rng.hpp"

namespace driftids::numgrad {

GradCheckResult finite_difference_check(const LossAndGrad& loss_fn, const ParamSet& params,
                                        const GradCheckOptions& options) {
    require(options.step > 0.0, ErrorKind::parameter, "gradient check: step must be > 0");
    const auto [base_loss, analytic] = loss_fn(params);
    (void)base_loss;
    require(analytic.flat_size() == params.flat_size(), ErrorKind::contract,
            "gradient check: gradient layout mismatch");

    std::vector<std::size_t> coords(params.flat_size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (options.samples < coords.size()) {
        Rng rng(derive_seed({options.seed, 0x67726164ULL}));
        rng.shuffle(coords);
        coords.resize(options.samples);
        std::sort(coords.begin(), coords.end());
    }

    const std::vector<double> grad_flat = analytic.to_flat();
    GradCheckResult result;
    ParamSet probe = params;
    for (std::size_t k : coords) {
        const double original = params.flat(k);
        probe.set_flat(k, original + options.step);
        const double up = loss_fn(probe).first;
        probe.set_flat(k, original - options.step);
        const double down = loss_fn(probe).first;
        probe.set_flat(k, original);
        const double numeric = (up - down) / (2.0 * options.step);
        const double err = std::abs(grad_flat[k] - numeric) /
                           std::max(std::abs(numeric), options.denominator_floor);
        if (err > result.max_relative_error || result.coordinates_checked == 0) {
            result.max_relative_error = std::max(err, result.max_relative_error);
            result.worst_index = k;
        }
        ++result.coordinates_checked;
    }
    return result;
}

}  // namespace driftids::numgrad
