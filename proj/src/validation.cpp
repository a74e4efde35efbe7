#include "bayessum/validation.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "bayessum/embeddings.hpp"
#include "bayessum/errors.hpp"
#include "bayessum/kernels.hpp"

namespace bayessum {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double rel_gap(double closed, double brute) { return std::abs(closed - brute) / (1.0 + std::abs(closed)); }

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int int_in(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); }

State random_state(Rng& rng, const Distribution& dist) {
  const auto alphabet = site_alphabet(dist);
  State y(num_sites(dist));
  for (int i = 0; i < y.size(); ++i) y(i) = alphabet->value_at(static_cast<int>(rng.below(alphabet->size)));
  return y;
}

struct Draw {
  EmbeddingPair pair;
  State y;
};

struct RowSpec {
  std::string name;
  std::function<Draw(Rng&)> draw;
  int ie_budget = 200;
};

std::vector<RowSpec> row_specs() {
  std::vector<RowSpec> rows;
  rows.push_back({"poisson/brownian", [](Rng& r) {
                    return Draw{{Poisson{uniform_in(r, 0.5, 30.0)}, {BrownianMin{}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, 0, 60))};
                  }});
  rows.push_back({"negbinomial/brownian", [](Rng& r) {
                    return Draw{{NegBinomial{uniform_in(r, 0.5, 5.0), uniform_in(r, 0.3, 0.9)},
                                 {BrownianMin{}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, 0, 60))};
                  }});
  rows.push_back({"logarithmic/brownian", [](Rng& r) {
                    return Draw{{Logarithmic{uniform_in(r, 0.05, 0.9)}, {BrownianMin{}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, 1, 40))};
                  }});
  rows.push_back({"poisson/polynomial", [](Rng& r) {
                    return Draw{{Poisson{uniform_in(r, 0.5, 10.0)}, {Polynomial{int_in(r, 1, 8)}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, 0, 20))};
                  }});
  rows.push_back({"negbinomial/polynomial", [](Rng& r) {
                    return Draw{{NegBinomial{uniform_in(r, 0.5, 5.0), uniform_in(r, 0.3, 0.9)},
                                 {Polynomial{int_in(r, 1, 6)}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, 0, 20))};
                  }});
  rows.push_back({"skellam/polynomial", [](Rng& r) {
                    return Draw{{Skellam{uniform_in(r, 0.5, 5.0), uniform_in(r, 0.5, 5.0)},
                                 {Polynomial{int_in(r, 1, 6)}, uniform_in(r, 0.5, 3.0)}},
                                scalar_state(int_in(r, -10, 10))};
                  }});
  rows.push_back({"ising/exphamming", [](Rng& r) {
                    const Distribution d = UniformIsing{int_in(r, 1, 8)};
                    return Draw{{d, {ExpHamming{uniform_in(r, 0.0, 3.0)}, uniform_in(r, 0.5, 3.0)}}, random_state(r, d)};
                  }});
  rows.push_back({"categorical/exphamming", [](Rng& r) {
                    const Distribution d = UniformCategorical{int_in(r, 1, 3), int_in(r, 1, 4)};
                    return Draw{{d, {ExpHamming{uniform_in(r, 0.0, 3.0)}, uniform_in(r, 0.5, 3.0)}}, random_state(r, d)};
                  }});
  rows.push_back({"binary/tanimoto", [](Rng& r) {
                    const Distribution d = UniformCategorical{1, int_in(r, 1, 8)};
                    return Draw{{d, {Tanimoto{}, uniform_in(r, 0.5, 3.0)}}, random_state(r, d)};
                  }});
  return rows;
}

}  // namespace

std::vector<RowCheck> validate_kme(std::uint64_t seed, int draws, double tolerance) {
  std::vector<RowCheck> out;
  Rng root(seed);
  std::uint64_t stream = 0;
  for (const auto& spec : row_specs()) {
    Rng rng = root.split(stream++);
    RowCheck check;
    check.row = spec.name;
    check.draws = draws;
    for (int i = 0; i < draws; ++i) {
      const Draw d = spec.draw(rng);
      const double closed = kme(d.pair, d.y);
      const double brute = brute_force_kme(d.pair.dist, d.pair.kernel, d.y).value;
      check.max_kme_error = std::max(check.max_kme_error, rel_gap(closed, brute));
      if (has_closed_form_initial_error(d.pair)) {
        const double ie = initial_error(d.pair);
        const double ie_brute = brute_force_initial_error(d.pair.dist, d.pair.kernel, spec.ie_budget).value;
        check.max_ie_error = std::max(check.max_ie_error, rel_gap(ie, ie_brute));
      } else {
        check.ie_available = false;
        check.max_ie_error = kNaN;
        try {
          (void)initial_error(d.pair);
        } catch (const CapabilityError&) {
          check.ie_unavailable_reported = true;
        }
      }
    }
    check.passed = check.max_kme_error <= tolerance &&
                   (check.ie_available ? check.max_ie_error <= tolerance : check.ie_unavailable_reported);
    out.push_back(check);
  }
  return out;
}

std::vector<SteinCheck> validate_stein(std::uint64_t seed, int num_y, double tolerance) {
  std::vector<SteinCheck> out;
  Rng rng(seed);
  for (int length : {2, 3}) {
    SteinCheck check;
    check.length = length;
    Eigen::VectorXd field(length);
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(length, length);
    for (int i = 0; i < length; ++i) {
      field(i) = rng.normal();
      for (int j = i + 1; j < length; ++j) coupling(i, j) = rng.normal();
    }
    const Distribution model = Potts::fully_connected(length, check.num_states, 1.0 / 2.269, field, coupling);
    const SteinKernel k{DiscreteKernel{ExpHamming{uniform_in(rng, 0.1, 2.0)}, 1.0}, model};
    const std::vector<State> support = enumerate_support(model);
    double z = 0.0;
    std::vector<double> p;
    for (const auto& x : support) {
      p.push_back(pmf(model, x));
      z += p.back();
    }
    for (int t = 0; t < num_y; ++t) {
      const State y = random_state(rng, model);
      double mean = 0.0;
      for (std::size_t i = 0; i < support.size(); ++i) mean += p[i] / z * eval(k, support[i], y);
      check.max_abs_mean = std::max(check.max_abs_mean, std::abs(mean));
    }
    check.passed = check.max_abs_mean <= tolerance;
    out.push_back(check);
  }
  return out;
}

}  // namespace bayessum
