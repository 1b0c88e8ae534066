#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace rca::eval {

struct Prf {
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 1.0;
};

// Standard precision/recall/F1; both sets empty gives (1,1,1).
Prf localization_prf(const std::set<std::string>& predicted, const std::set<std::string>& truth);

struct TypeF1 {
    double macro = 1.0;
    double micro = 1.0;
};

// Paired labels (predicted[i] is the guess for truth[i]). Macro averages
// per-class F1 over classes present in truth or prediction; micro pools the
// counts. Empty input gives (1,1). Labels outside `classes` are rejected.
TypeF1 type_f1(const std::vector<std::string>& predicted, const std::vector<std::string>& truth,
               const std::vector<std::string>& classes);

using EdgeSet = std::set<std::pair<std::string, std::string>>;

// F1 over directed (source, target) pairs, time ignored; both empty gives 1.
double causal_chain_accuracy(const EdgeSet& predicted, const EdgeSet& truth);

// Mean over annotated entities of |top-k ∩ annotated| / |annotated|.
// Entities with an empty annotation are skipped; none left -> nullopt.
std::optional<double> feature_importance_accuracy(const std::map<std::string, std::vector<std::string>>& top_k,
                                                  const std::map<std::string, std::vector<std::string>>& annotated);

} // namespace rca::eval
