#pragma once

#include <vector>

#include "sgmc/generator.hpp"
#include "sgmc/stratified.hpp"

// Reference structures used by the tests, the synthetic harness and the CLI.
// Nodes are 0-based: node i is variable X_{i+1}.
namespace sgmc::catalog {

// Five nodes: cliques {X1,X2,X3}, {X2,X3,X4}, {X4,X5}.
UndirectedGraph figure1_graph();

// figure1_graph with strata X2=1 on {X1,X3}, X3=0 on {X2,X4}, X2=0 on {X3,X4}.
StratifiedGraph figure1_sg();

// figure1_graph with only the two strata of the {X2,X3,X4} CPT example:
// X2=0 on {X3,X4} and X3=0 on {X2,X4}.
StratifiedGraph table3_sg();

// Hand-set conditionals for table3_sg with clearly separated distributions,
// so the strata are identifiable from moderate samples.
GeneratingModel table3_generating_model();

// Five five-node class structures of increasing stratum density, standing in
// for the synthetic experiment's class graphs.
std::vector<StratifiedGraph> synthetic_class_structures();

}  // namespace sgmc::catalog
