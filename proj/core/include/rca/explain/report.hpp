#pragma once

#include "rca/causal/pagerank.hpp"
#include "rca/explain/chain.hpp"
#include "rca/explain/importance.hpp"
#include "rca/graph/gat.hpp"

#include <string>
#include <vector>

namespace rca::explain {

struct ReportPayload {
    std::string run_id;
    graph::Prediction prediction;
    std::vector<causal::RankedEntity> ranking;
    ImportanceTable importance;
    CausalChain chain;
};

struct DiagnosticReport {
    std::string text;
    std::string jsonl;
};

inline constexpr std::string_view kReportSections[] = {"Fault overview", "Root cause location", "Propagation path",
                                                       "Repair suggestions"};

// Root cause location names the highest-ranked flagged entity. With nothing
// flagged the overview reads "no fault detected" and the other sections are
// left empty.
DiagnosticReport render_report(const ReportPayload& payload);

// Inverse of the JSONL half of render_report.
ReportPayload parse_report_payload(std::string_view jsonl);

// Chain plot data: time on the horizontal axis, entity level on the vertical.
std::string chain_plot_csv(const ReportPayload& payload);
std::string chain_plot_vegalite(const ReportPayload& payload);

} // namespace rca::explain
