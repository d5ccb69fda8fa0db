// Builds the 1D-Tree and 3-DAG over 16 unit-spaced points, answers two range
// queries with both, and prints the exact level-difference distribution for
// one query length next to its closed form.

#include <iostream>
#include <memory>

#include "rcb/rcb.hpp"

int main() {
  auto data = std::make_shared<const rcb::Dataset>(rcb::synth_uniform(16, 16));
  auto tree = rcb::build_tree(data);
  auto dag = rcb::build_cdag(data, rcb::DagConfig(3));

  for (rcb::QueryRange q : {rcb::QueryRange{2, 4}, rcb::QueryRange{11, 4}}) {
    auto t = rcb::src_search(tree, q);
    auto g = rcb::src_search(dag, q);
    std::cout << "query [" << q.start << ", " << q.start + q.length << "): tree level " << t.level << " ["
              << t.interval.lo << ", " << t.interval.hi << "), 3-DAG level " << g.level << " [" << g.interval.lo
              << ", " << g.interval.hi << ")\n";
  }

  auto exact = rcb::exact_level_measure(tree, dag, 4);
  auto theory = rcb::theoretical_ldd(16, 3, 4);
  std::cout << "s=4 exact  " << rcb::to_string(exact.distribution) << "\n"
            << "s=4 theory " << rcb::to_string(theory) << "\n"
            << "E[2^k] = " << rcb::to_string(rcb::expected_fp_ratio(theory)) << "\n";
  return exact.distribution == theory ? 0 : 1;
}
