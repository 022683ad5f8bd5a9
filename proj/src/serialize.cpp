#include "xeval/serialize.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "xeval/io_util.hpp"

namespace xeval {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string class_label(int id, const std::vector<std::string>& names) {
    if (id >= 0 && static_cast<std::size_t>(id) < names.size()) return names[id];
    return std::to_string(id);
}

}  // namespace

std::string eval_report_json(const EvalReport& report,
                             const std::vector<std::string>& class_names) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    ordered_json per_class = ordered_json::object();
    for (const auto& [id, value] : report.per_class_iou) {
        per_class[class_label(id, class_names)] = value;
    }
    j["per_class_iou"] = per_class;
    j["miou"] = report.miou;
    ordered_json groups = ordered_json::array();
    for (const auto& v : report.ef1_per_group) {
        if (v) {
            groups.push_back(*v);
        } else {
            groups.push_back(nullptr);
        }
    }
    j["ef1_per_group"] = groups;
    j["mef1"] = report.mef1;
    j["group_pixel_counts"] = report.group_pixel_counts;
    j["averaging"] = averaging_name(report.averaging);
    j["beta"] = report.beta;
    j["populated_groups"] = report.populated_groups;
    return j.dump(2) + "\n";
}

std::string ef1_csv(const EvalReport& report) {
    std::string header, row;
    const std::size_t groups = report.ef1_per_group.size();
    for (std::size_t g = 0; g < groups; ++g) {
        if (g) {
            header += ',';
            row += ',';
        }
        header += "ef1_bin" + std::to_string(g);
        if (report.ef1_per_group[g]) row += format_double(*report.ef1_per_group[g]);
    }
    return header + "\n" + row + "\n";
}

std::string histogram_csv(const ExposureBins& bins, const std::vector<double>& averages) {
    std::string out = "bin_low,bin_high,avg_pixels\n";
    for (int g = 0; g < bins.bin_count; ++g) {
        out += format_double(bins.edges[g]);
        out += ',';
        out += format_double(bins.edges[g + 1]);
        out += ',';
        out += format_double(averages[g]);
        out += '\n';
    }
    return out;
}

std::string decisions_jsonl(const std::string& stem,
                            const std::vector<ConsensusDecision>& decisions) {
    std::string out;
    for (const ConsensusDecision& d : decisions) {
        ordered_json j;
        j["schema_version"] = kSchemaVersion;
        j["image"] = stem;
        j["pixel"] = d.pixel;
        j["a"] = d.a_label;
        j["b"] = d.b_label;
        j["final"] = d.final_label;
        j["resolution"] = resolution_name(d.resolution);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string disagreement_stats_json(const DisagreementStats& stats,
                                    const std::vector<std::string>& class_names) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["total_pixels"] = stats.total_pixels;
    j["differing_pixels"] = stats.differing_pixels;
    j["corrected_among_differing"] = stats.corrected_among_differing;
    ordered_json per_class = ordered_json::object();
    for (const auto& [id, value] : stats.per_class_error) {
        per_class[class_label(id, class_names)] = value;
    }
    j["per_class_error"] = per_class;
    return j.dump(2) + "\n";
}

std::string dataset_stats_json(const ClassDistribution& dist, double invalid,
                               const std::map<std::string, std::uint64_t>& city_counts,
                               const std::vector<std::string>& class_names) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    ordered_json per_class = ordered_json::object();
    for (const auto& [id, count] : dist.per_class_pixels) {
        per_class[class_label(id, class_names)] = count;
    }
    j["per_class_pixels"] = per_class;
    ordered_json log_view = ordered_json::object();
    for (const auto& [id, value] : dist.log_scale_view) {
        log_view[class_label(id, class_names)] = value;
    }
    j["log_scale_view"] = log_view;
    j["invalid_ratio"] = invalid;
    ordered_json cities = ordered_json::object();
    for (const auto& [city, count] : city_counts) cities[city] = count;
    j["per_city_images"] = cities;
    return j.dump(2) + "\n";
}

std::string split_summary_json(const SplitResult& split,
                               const std::map<std::string, std::uint64_t>& train_cities,
                               const std::map<std::string, std::uint64_t>& test_cities,
                               double train_fraction, std::uint64_t seed) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["train_size"] = split.train_indices.size();
    j["test_size"] = split.test_indices.size();
    j["train_fraction"] = train_fraction;
    j["seed"] = seed;
    j["divergence"] = split.divergence;
    j["full_distribution"] = split.full_distribution;
    j["train_distribution"] = split.train_distribution;
    j["test_distribution"] = split.test_distribution;
    ordered_json train_c = ordered_json::object();
    for (const auto& [city, count] : train_cities) train_c[city] = count;
    j["train_per_city"] = train_c;
    ordered_json test_c = ordered_json::object();
    for (const auto& [city, count] : test_cities) test_c[city] = count;
    j["test_per_city"] = test_c;
    return j.dump(2) + "\n";
}

std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& title, bool log_scale) {
    const int width = 720, height = 420;
    const int margin_left = 56, margin_bottom = 72, margin_top = 36, margin_right = 16;
    const int plot_w = width - margin_left - margin_right;
    const int plot_h = height - margin_top - margin_bottom;

    std::vector<double> plotted(values.size(), 0.0);
    double peak = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        plotted[i] = log_scale ? (values[i] > 0 ? std::log10(values[i]) : 0.0) : values[i];
        peak = std::max(peak, plotted[i]);
    }
    if (peak <= 0.0) peak = 1.0;

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
        "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + title +
           (log_scale ? " (log10)" : "") + "</text>\n";

    const double slot = values.empty() ? 0.0 : static_cast<double>(plot_w) / values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double h = plotted[i] / peak * plot_h;
        const double x = margin_left + slot * i + slot * 0.1;
        const double y = margin_top + (plot_h - h);
        svg += "<rect x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
               "\" width=\"" + format_double(slot * 0.8) + "\" height=\"" + format_double(h) +
               "\" fill=\"#4878a8\"/>\n";
        const double lx = margin_left + slot * i + slot * 0.5;
        svg += "<text x=\"" + format_double(lx) + "\" y=\"" +
               std::to_string(height - margin_bottom + 14) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" "
               "transform=\"rotate(-45 " + format_double(lx) + " " +
               std::to_string(height - margin_bottom + 14) + ")\">" +
               labels[i] + "</text>\n";
    }
    svg += "<line x1=\"" + std::to_string(margin_left) + "\" y1=\"" +
           std::to_string(margin_top + plot_h) + "\" x2=\"" + std::to_string(width - margin_right) +
           "\" y2=\"" + std::to_string(margin_top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"8\" y=\"" + std::to_string(margin_top + 8) +
           "\" font-family=\"sans-serif\" font-size=\"10\">" + format_double(peak) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace xeval
