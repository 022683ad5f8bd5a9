#include "xeval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "xeval/error.hpp"
#include "xeval/rng.hpp"

namespace xeval {

DatasetIndex parse_manifest(const std::string& text, int class_count) {
    DatasetIndex index;
    index.class_count = class_count;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        DatasetEntry entry;
        const std::size_t tab1 = line.find('\t');
        if (tab1 == std::string::npos) {
            throw format_error("manifest line " + std::to_string(line_no) +
                               ": expected image<TAB>label[<TAB>city]");
        }
        entry.image_path = line.substr(0, tab1);
        const std::size_t tab2 = line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) {
            entry.label_path = line.substr(tab1 + 1);
        } else {
            entry.label_path = line.substr(tab1 + 1, tab2 - tab1 - 1);
            entry.city = line.substr(tab2 + 1);
            if (entry.city.find('\t') != std::string::npos) {
                throw format_error("manifest line " + std::to_string(line_no) +
                                   ": too many fields");
            }
        }
        if (entry.image_path.empty() || entry.label_path.empty()) {
            throw format_error("manifest line " + std::to_string(line_no) +
                               ": empty path");
        }
        index.entries.push_back(std::move(entry));
    }
    return index;
}

std::string write_manifest(const DatasetIndex& index) {
    std::string out;
    for (const DatasetEntry& e : index.entries) {
        out += e.image_path;
        out += '\t';
        out += e.label_path;
        if (!e.city.empty()) {
            out += '\t';
            out += e.city;
        }
        out += '\n';
    }
    return out;
}

EntryHistogram entry_histogram(const DatasetEntry& entry, const LabelMap& labels) {
    EntryHistogram hist;
    hist.entry = entry;
    hist.class_pixels.assign(labels.class_count, 0);
    hist.total_pixels = labels.pixel_count();
    for (std::uint8_t id : labels.labels) {
        if (id == kInvalidLabel) {
            ++hist.invalid_pixels;
        } else {
            ++hist.class_pixels[id];
        }
    }
    return hist;
}

ClassDistribution class_distribution(const std::vector<EntryHistogram>& histograms) {
    if (histograms.empty()) throw metric_error("class_distribution: empty dataset");
    const std::size_t classes = histograms.front().class_pixels.size();
    std::vector<std::uint64_t> totals(classes, 0);
    for (const EntryHistogram& h : histograms) {
        if (h.class_pixels.size() != classes) {
            throw format_error("class_distribution: class count mismatch across entries");
        }
        for (std::size_t c = 0; c < classes; ++c) totals[c] += h.class_pixels[c];
    }
    ClassDistribution dist;
    for (std::size_t c = 0; c < classes; ++c) {
        dist.per_class_pixels[static_cast<int>(c)] = totals[c];
        if (totals[c] > 0) {
            dist.log_scale_view[static_cast<int>(c)] =
                std::log10(static_cast<double>(totals[c]));
        }
    }
    return dist;
}

double invalid_ratio(const std::vector<EntryHistogram>& histograms) {
    if (histograms.empty()) throw metric_error("invalid_ratio: empty dataset");
    std::uint64_t invalid = 0, total = 0;
    for (const EntryHistogram& h : histograms) {
        invalid += h.invalid_pixels;
        total += h.total_pixels;
    }
    if (total == 0) throw metric_error("invalid_ratio: no pixels");
    return static_cast<double>(invalid) / static_cast<double>(total);
}

SplitSizes split_sizes(std::size_t n, double train_fraction) {
    if (n < 2) throw std::domain_error("split: need at least 2 entries");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::domain_error("split: train fraction must be in (0,1)");
    }
    const auto train = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * train_fraction));
    if (train == 0 || train == n) {
        throw std::domain_error("split: fraction leaves one side empty");
    }
    return {train, n - train};
}

double l1_divergence(const std::vector<std::uint64_t>& counts,
                     const std::vector<double>& reference) {
    std::uint64_t total = 0;
    for (std::uint64_t v : counts) total += v;
    double distance = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const double p = total == 0 ? 0.0
                                    : static_cast<double>(counts[c]) /
                                          static_cast<double>(total);
        distance += std::abs(p - reference[c]);
    }
    return distance;
}

namespace {

std::vector<double> normalize(const std::vector<std::uint64_t>& counts) {
    std::uint64_t total = 0;
    for (std::uint64_t v : counts) total += v;
    std::vector<double> dist(counts.size(), 0.0);
    if (total == 0) return dist;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        dist[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
    }
    return dist;
}

void add_counts(std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
    for (std::size_t c = 0; c < into.size(); ++c) into[c] += from[c];
}

void sub_counts(std::vector<std::uint64_t>& into, const std::vector<std::uint64_t>& from) {
    for (std::size_t c = 0; c < into.size(); ++c) into[c] -= from[c];
}

struct SplitState {
    std::vector<bool> in_train;
    std::vector<std::uint64_t> train_counts;
    std::vector<std::uint64_t> test_counts;
    double divergence = 0.0;
};

// One greedy pass over `order`: each entry goes to the side that keeps
// the worse of the two distributions closest to the full set, under the
// size budget.
SplitState greedy_assign(const std::vector<EntryHistogram>& histograms,
                         const std::vector<std::size_t>& order, const SplitSizes& sizes,
                         const std::vector<double>& full) {
    const std::size_t classes = full.size();
    SplitState state;
    state.in_train.assign(histograms.size(), false);
    state.train_counts.assign(classes, 0);
    state.test_counts.assign(classes, 0);
    std::size_t train_used = 0, test_used = 0;

    for (std::size_t idx : order) {
        const EntryHistogram& h = histograms[idx];
        bool to_train;
        if (train_used == sizes.train) {
            to_train = false;
        } else if (test_used == sizes.test) {
            to_train = true;
        } else {
            add_counts(state.train_counts, h.class_pixels);
            const double if_train = std::max(l1_divergence(state.train_counts, full),
                                             l1_divergence(state.test_counts, full));
            sub_counts(state.train_counts, h.class_pixels);
            add_counts(state.test_counts, h.class_pixels);
            const double if_test = std::max(l1_divergence(state.train_counts, full),
                                            l1_divergence(state.test_counts, full));
            sub_counts(state.test_counts, h.class_pixels);
            to_train = if_train <= if_test;
        }
        if (to_train) {
            add_counts(state.train_counts, h.class_pixels);
            state.in_train[idx] = true;
            ++train_used;
        } else {
            add_counts(state.test_counts, h.class_pixels);
            ++test_used;
        }
    }
    state.divergence = std::max(l1_divergence(state.train_counts, full),
                                l1_divergence(state.test_counts, full));
    return state;
}

// Repeatedly applies the single train/test exchange that lowers the
// divergence most, until none helps or the swap budget runs out.
void refine_by_swaps(const std::vector<EntryHistogram>& histograms, SplitState& state,
                     const std::vector<double>& full, int max_swaps) {
    const std::size_t n = histograms.size();
    auto divergence = [&] {
        return std::max(l1_divergence(state.train_counts, full),
                        l1_divergence(state.test_counts, full));
    };
    for (int pass = 0; pass < max_swaps && state.divergence > 0.0; ++pass) {
        std::size_t best_i = n, best_j = n;
        double best_candidate = state.divergence;
        for (std::size_t i = 0; i < n; ++i) {
            if (!state.in_train[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (state.in_train[j]) continue;
                sub_counts(state.train_counts, histograms[i].class_pixels);
                add_counts(state.train_counts, histograms[j].class_pixels);
                sub_counts(state.test_counts, histograms[j].class_pixels);
                add_counts(state.test_counts, histograms[i].class_pixels);
                const double candidate = divergence();
                sub_counts(state.train_counts, histograms[j].class_pixels);
                add_counts(state.train_counts, histograms[i].class_pixels);
                sub_counts(state.test_counts, histograms[i].class_pixels);
                add_counts(state.test_counts, histograms[j].class_pixels);
                if (candidate + 1e-12 < best_candidate) {
                    best_candidate = candidate;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_i == n) break;
        sub_counts(state.train_counts, histograms[best_i].class_pixels);
        add_counts(state.train_counts, histograms[best_j].class_pixels);
        sub_counts(state.test_counts, histograms[best_j].class_pixels);
        add_counts(state.test_counts, histograms[best_i].class_pixels);
        state.in_train[best_i] = false;
        state.in_train[best_j] = true;
        state.divergence = best_candidate;
    }
}

}  // namespace

SplitResult stratified_split(const std::vector<EntryHistogram>& histograms,
                             double train_fraction, std::uint64_t seed) {
    const std::size_t n = histograms.size();
    const SplitSizes sizes = split_sizes(n, train_fraction);
    const std::size_t classes = histograms.front().class_pixels.size();

    std::vector<std::uint64_t> full_counts(classes, 0);
    for (const EntryHistogram& h : histograms) {
        if (h.class_pixels.size() != classes) {
            throw format_error("stratified_split: class count mismatch across entries");
        }
        add_counts(full_counts, h.class_pixels);
    }
    const std::vector<double> full = normalize(full_counts);

    // Multi-start: the first restart walks entries heaviest-first (the
    // strong order for one-shot greedy); later restarts use raw shuffled
    // orders so they land in different basins before swap refinement.
    // Small instances get more restarts because local optima bite
    // hardest there; the swap scan is O(n^2), so its budget shrinks as
    // n grows, where single entries barely move the distributions anyway.
    const int restarts = n <= 64 ? 24 : (n <= 512 ? 6 : (n <= 2048 ? 2 : 1));
    const int max_swaps = n <= 64 ? 64 : (n <= 512 ? 16 : (n <= 2048 ? 8 : 2));

    SplitMix64 rng(seed);
    std::vector<std::size_t> order(n);
    SplitState best;
    best.divergence = 3.0;  // above any reachable L1 value
    for (int restart = 0; restart < restarts; ++restart) {
        std::iota(order.begin(), order.end(), 0);
        shuffle(order, rng);
        if (restart == 0) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t lhs, std::size_t rhs) {
                                 std::uint64_t ml = 0, mr = 0;
                                 for (std::uint64_t v : histograms[lhs].class_pixels)
                                     ml += v;
                                 for (std::uint64_t v : histograms[rhs].class_pixels)
                                     mr += v;
                                 return ml > mr;
                             });
        }
        SplitState state = greedy_assign(histograms, order, sizes, full);
        refine_by_swaps(histograms, state, full, max_swaps);
        if (state.divergence + 1e-15 < best.divergence) best = std::move(state);
        if (best.divergence == 0.0) break;
    }

    SplitResult result;
    for (std::size_t i = 0; i < n; ++i) {
        (best.in_train[i] ? result.train_indices : result.test_indices).push_back(i);
    }
    result.full_distribution = full;
    result.train_distribution = normalize(best.train_counts);
    result.test_distribution = normalize(best.test_counts);
    result.divergence = best.divergence;
    return result;
}

std::map<std::string, std::uint64_t> per_city_counts(
    const std::vector<EntryHistogram>& histograms) {
    std::map<std::string, std::uint64_t> counts;
    for (const EntryHistogram& h : histograms) {
        if (!h.entry.city.empty()) ++counts[h.entry.city];
    }
    return counts;
}

}  // namespace xeval
