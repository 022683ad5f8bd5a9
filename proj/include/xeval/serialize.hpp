#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xeval/annotation.hpp"
#include "xeval/metrics.hpp"
#include "xeval/stats.hpp"

namespace xeval {

inline constexpr int kSchemaVersion = 1;

// All emitters are pure string builders; the CLI owns file placement.

std::string eval_report_json(const EvalReport& report,
                             const std::vector<std::string>& class_names);

// One row of per-group EF1, bins low to high; empty cell for empty bins.
std::string ef1_csv(const EvalReport& report);

// `bin_low,bin_high,avg_pixels` rows.
std::string histogram_csv(const ExposureBins& bins, const std::vector<double>& averages);

// JSON lines, one object per consensus decision, keyed by image stem.
std::string decisions_jsonl(const std::string& stem,
                            const std::vector<ConsensusDecision>& decisions);

std::string disagreement_stats_json(const DisagreementStats& stats,
                                    const std::vector<std::string>& class_names);

std::string dataset_stats_json(const ClassDistribution& dist, double invalid,
                               const std::map<std::string, std::uint64_t>& city_counts,
                               const std::vector<std::string>& class_names);

std::string split_summary_json(const SplitResult& split,
                               const std::map<std::string, std::uint64_t>& train_cities,
                               const std::map<std::string, std::uint64_t>& test_cities,
                               double train_fraction, std::uint64_t seed);

// Minimal standalone bar chart.
std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& title, bool log_scale);

}  // namespace xeval
