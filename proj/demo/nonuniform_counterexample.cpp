// With bins chosen with probabilities 5/6 and 1/6, the allocation of six balls
// proportional to the weights, (5,1), is beaten by (4,2). Prints both values,
// the best allocation, and a Monte Carlo cross-check.

#include <iostream>

#include "ballsbins/ballsbins.hpp"

int main() {
  using namespace ballsbins;
  const auto weights = WeightVector::parse("5/6,1/6");
  ExactSolver solver(weights);

  for (const Allocation a : {Allocation{5, 1}, Allocation{4, 2}}) {
    const Rational f = solver.expected_remaining(a);
    const auto mc = simulate(a, weights, {200'000, 7, SimMode::discrete});
    std::cout << "f(" << a.to_string() << ") = " << to_string(f) << " ~ " << to_decimal(f)
              << "   simulated " << mc.mean_x << " +/- " << mc.stderr_x << '\n';
  }

  const auto best = optimal_allocations(solver, 6, 2);
  std::cout << "optimal for n=6:";
  for (const auto& m : best.minimizers) std::cout << " (" << m.to_string() << ')';
  std::cout << " with f = " << to_string(best.min_value) << '\n';
  std::cout << "proportional allocation: (" << proportional_allocation(6, weights).to_string()
            << ")\n";
}
