// Simulate one sample from the mean model, run both checks and print the
// reports.

#include <iostream>

#include "simcheck/simcheck.hpp"

int main() {
  using namespace simcheck;
  Rng rng(2024);
  const Dataset mean_data = generate_mean_model({100, 2, 0.0, NoiseKind::HomoscedasticNormal, 0.3}, rng);
  const Dataset law_data = generate_law_model({200, 0.0, false}, rng);

  TestConfig cfg;
  cfg.B = 99;
  cfg.seed = 7;
  std::cout << "# mean check, data from the null model\n" << format_report(run_mean_test(mean_data, cfg));
  std::cout << "\n# law check, data from the null model\n" << format_report(run_law_test(law_data, cfg));
}
