#pragma once

// Corpus ingestion and frequency-thresholded, time-weighted concept networks.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "errors.hpp"

namespace topothresh {

struct CorpusRecord {
    std::string article_id;
    int year = 0;
    std::string label;
    /// tau(v): number of distinct articles containing the concept.
    std::size_t frequency = 0;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

struct YearRange {
    int min = 0;
    int max = 0;

    friend bool operator==(const YearRange&, const YearRange&) = default;
};

/// A point of the parameter domain. For frequency thresholding coords = (lower, upper).
struct ThresholdPoint {
    std::vector<double> coords;

    double lower() const { return coords.at(0); }
    double upper() const { return coords.at(1); }

    friend bool operator==(const ThresholdPoint&, const ThresholdPoint&) = default;
};

struct ConceptNode {
    std::string label;
    std::size_t frequency = 0;

    friend bool operator==(const ConceptNode&, const ConceptNode&) = default;
};

/// Undirected edge between node indices a < b. Nodes are kept sorted by concept,
/// so index order coincides with lexicographic concept order.
struct ConceptEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double weight = 0.0;

    friend bool operator==(const ConceptEdge&, const ConceptEdge&) = default;
};

struct ConceptNetwork {
    std::vector<ConceptNode> nodes;
    std::vector<ConceptEdge> edges;
    YearRange years;

    std::size_t node_count() const noexcept { return nodes.size(); }
    std::size_t edge_count() const noexcept { return edges.size(); }
    bool empty() const noexcept { return nodes.empty(); }

    friend bool operator==(const ConceptNetwork&, const ConceptNetwork&) = default;
};

enum class InputFormat { records, edge_list };

inline std::string normalize_concept(std::string_view raw) {
    std::string s(csv::trim(raw));
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Linear time weight of a link first observed in `year`.
/// With `single_year_zero` set, a one-year corpus maps every weight to 0.
inline double edge_weight(int year, int y_min, int y_max, bool single_year_zero = false) {
    if (y_min > y_max) throw std::invalid_argument("edge_weight: y_min > y_max");
    if (year < y_min || year > y_max)
        throw std::invalid_argument("edge_weight: year " + std::to_string(year) +
                                    " outside [" + std::to_string(y_min) + ", " +
                                    std::to_string(y_max) + "]");
    if (y_min == y_max) {
        if (single_year_zero) return 0.0;
        throw degenerate_range_error("edge_weight: corpus spans a single year (" +
                                     std::to_string(y_min) + ")");
    }
    return static_cast<double>(year - y_min) / static_cast<double>(y_max - y_min);
}

/// Integer frequency window [ceil(lower), floor(upper)].
struct FrequencyWindow {
    double lo;
    double hi;

    bool contains(std::size_t tau) const noexcept {
        const auto t = static_cast<double>(tau);
        return lo <= t && t <= hi;
    }
};

inline FrequencyWindow frequency_window(const ThresholdPoint& theta) {
    if (theta.coords.size() != 2)
        throw std::invalid_argument("frequency thresholding needs a 2-coordinate point");
    const double l = theta.lower(), u = theta.upper();
    if (std::isnan(l) || std::isnan(u) || std::isinf(l))
        throw std::invalid_argument("threshold bounds must be finite (upper may be +inf)");
    if (l > u) throw std::invalid_argument("threshold lower bound exceeds upper bound");
    return {std::ceil(l), std::floor(u)};
}

namespace detail {

inline std::map<std::string, std::size_t> header_columns(const csv::row& header,
                                                         const std::string& name) {
    std::map<std::string, std::size_t> cols;
    for (std::size_t i = 0; i < header.size(); ++i) {
        auto key = normalize_concept(header[i]);
        if (key.size() >= 3 && key.compare(0, 3, "\xEF\xBB\xBF") == 0) key.erase(0, 3);
        if (!cols.emplace(key, i).second)
            throw parse_error(name, 1, "duplicate column '" + key + "'");
    }
    return cols;
}

inline std::size_t require_column(const std::map<std::string, std::size_t>& cols,
                                  const std::string& key, const std::string& name) {
    auto it = cols.find(key);
    if (it == cols.end()) throw parse_error(name, 1, "missing column '" + key + "'");
    return it->second;
}

}  // namespace detail

/// Parses a records CSV (`article_id,year,concept[,frequency]`). Records are
/// normalized and de-duplicated per (article, concept) keeping the first row;
/// frequencies are recomputed when the column is absent.
inline std::vector<CorpusRecord> read_records(std::istream& in, const std::string& name = "<records>") {
    csv::reader rd(in, name);
    auto header = rd.next();
    if (!header) throw parse_error(name, 0, "empty corpus");
    const auto cols = detail::header_columns(*header, name);
    const auto c_article = detail::require_column(cols, "article_id", name);
    const auto c_year = detail::require_column(cols, "year", name);
    const auto c_concept = detail::require_column(cols, "concept", name);
    const auto f_it = cols.find("frequency");
    const bool has_frequency = f_it != cols.end();

    std::vector<CorpusRecord> records;
    std::set<std::pair<std::string, std::string>> seen;
    std::unordered_map<std::string, int> article_year;
    std::unordered_map<std::string, std::size_t> given_frequency;

    while (auto row = rd.next()) {
        if (csv::is_blank(*row)) continue;
        const auto line = rd.line();
        if (row->size() != header->size())
            throw parse_error(name, line, "expected " + std::to_string(header->size()) +
                                              " fields, got " + std::to_string(row->size()));
        CorpusRecord rec;
        rec.article_id = std::string(csv::trim((*row)[c_article]));
        if (rec.article_id.empty()) throw parse_error(name, line, "empty article_id");
        auto year = csv::parse_int<int>((*row)[c_year]);
        if (!year) throw parse_error(name, line, "invalid year '" + (*row)[c_year] + "'");
        rec.year = *year;
        rec.label = normalize_concept((*row)[c_concept]);
        if (rec.label.empty()) throw parse_error(name, line, "empty concept");

        if (has_frequency) {
            auto f = csv::parse_int<long long>((*row)[f_it->second]);
            if (!f || *f < 1)
                throw parse_error(name, line, "frequency must be a positive integer, got '" +
                                                  (*row)[f_it->second] + "'");
            rec.frequency = static_cast<std::size_t>(*f);
            auto [it, fresh] = given_frequency.emplace(rec.label, rec.frequency);
            if (!fresh && it->second != rec.frequency)
                throw parse_error(name, line, "conflicting frequency for concept '" + rec.label + "'");
        }

        auto [yit, fresh_article] = article_year.emplace(rec.article_id, rec.year);
        if (!fresh_article && yit->second != rec.year)
            throw parse_error(name, line, "conflicting year for article '" + rec.article_id + "'");

        if (!seen.emplace(rec.article_id, rec.label).second) continue;
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw parse_error(name, 0, "empty corpus");

    if (!has_frequency) {
        std::unordered_map<std::string, std::size_t> tau;
        for (const auto& r : records) ++tau[r.label];  // rows are unique per (article, concept)
        for (auto& r : records) r.frequency = tau[r.label];
    }
    return records;
}

inline void write_records(std::ostream& out, const std::vector<CorpusRecord>& records,
                          bool with_frequency = true) {
    csv::write_row(out, with_frequency ? csv::row{"article_id", "year", "concept", "frequency"}
                                       : csv::row{"article_id", "year", "concept"});
    for (const auto& r : records) {
        csv::row row{r.article_id, std::to_string(r.year), r.label};
        if (with_frequency) row.push_back(std::to_string(r.frequency));
        csv::write_row(out, row);
    }
}

/// Parses an edge-list CSV (`source,target,weight`). Node frequency is set to
/// the node degree so the same thresholding grid applies.
inline ConceptNetwork read_edge_list(std::istream& in, const std::string& name = "<edges>") {
    csv::reader rd(in, name);
    auto header = rd.next();
    if (!header) throw parse_error(name, 0, "empty edge list");
    const auto cols = detail::header_columns(*header, name);
    const auto c_src = detail::require_column(cols, "source", name);
    const auto c_dst = detail::require_column(cols, "target", name);
    const auto c_w = detail::require_column(cols, "weight", name);

    std::map<std::pair<std::string, std::string>, double> raw;
    while (auto row = rd.next()) {
        if (csv::is_blank(*row)) continue;
        const auto line = rd.line();
        if (row->size() != header->size())
            throw parse_error(name, line, "expected " + std::to_string(header->size()) +
                                              " fields, got " + std::to_string(row->size()));
        auto a = normalize_concept((*row)[c_src]);
        auto b = normalize_concept((*row)[c_dst]);
        if (a.empty() || b.empty()) throw parse_error(name, line, "empty endpoint");
        if (a == b) throw parse_error(name, line, "self-loop on '" + a + "'");
        auto w = csv::parse_double((*row)[c_w]);
        if (!w || !(*w >= 0.0 && *w <= 1.0))
            throw parse_error(name, line, "weight must lie in [0,1], got '" + (*row)[c_w] + "'");
        if (b < a) std::swap(a, b);
        if (!raw.emplace(std::pair{a, b}, *w).second)
            throw parse_error(name, line, "duplicate edge " + a + " - " + b);
    }
    if (raw.empty()) throw parse_error(name, 0, "empty edge list");

    std::map<std::string, std::size_t> degree;
    for (const auto& [key, w] : raw) {
        ++degree[key.first];
        ++degree[key.second];
    }
    ConceptNetwork net;
    std::map<std::string, std::size_t> index;
    for (const auto& [label, deg] : degree) {
        index.emplace(label, net.nodes.size());
        net.nodes.push_back({label, deg});
    }
    for (const auto& [key, w] : raw) net.edges.push_back({index[key.first], index[key.second], w});
    std::sort(net.edges.begin(), net.edges.end(),
              [](const auto& x, const auto& y) { return std::pair{x.a, x.b} < std::pair{y.a, y.b}; });
    net.years = {0, 1};
    return net;
}

inline void write_edge_list(std::ostream& out, const ConceptNetwork& net) {
    csv::write_row(out, {"source", "target", "weight"});
    for (const auto& e : net.edges)
        csv::write_row(out, {net.nodes[e.a].label, net.nodes[e.b].label, csv::format(e.weight)});
}

using IngestResult = std::variant<std::vector<CorpusRecord>, ConceptNetwork>;

inline IngestResult ingest_corpus(const std::string& path, InputFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error(path, 0, "cannot open file");
    if (format == InputFormat::records) return read_records(in, path);
    return read_edge_list(in, path);
}

inline YearRange infer_year_range(const std::vector<CorpusRecord>& records) {
    if (records.empty()) throw std::invalid_argument("infer_year_range: empty corpus");
    YearRange r{records.front().year, records.front().year};
    for (const auto& rec : records) {
        r.min = std::min(r.min, rec.year);
        r.max = std::max(r.max, rec.year);
    }
    return r;
}

inline std::size_t article_count(const std::vector<CorpusRecord>& records) {
    std::set<std::string_view> ids;
    for (const auto& r : records) ids.insert(r.article_id);
    return ids.size();
}

/// Pre-digested corpus: concepts, frequencies and the earliest co-appearance
/// year of every concept pair. Building a network for one threshold point is
/// then a filter over this index.
class CorpusIndex {
public:
    CorpusIndex(const std::vector<CorpusRecord>& records, YearRange years, bool single_year_zero = false)
        : years_(years), single_year_zero_(single_year_zero) {
        if (records.empty()) throw std::invalid_argument("CorpusIndex: empty corpus");
        if (years.min > years.max) throw std::invalid_argument("CorpusIndex: inverted year range");
        if (years.min == years.max && !single_year_zero)
            throw degenerate_range_error("corpus spans a single year (" + std::to_string(years.min) +
                                         "); enable single-year zero weights to proceed");

        std::map<std::string, std::size_t> freq;
        for (const auto& r : records) {
            if (r.year < years.min || r.year > years.max)
                throw std::invalid_argument("record year " + std::to_string(r.year) + " of article '" +
                                            r.article_id + "' outside the configured year range");
            if (r.frequency < 1)
                throw std::invalid_argument("record frequency must be >= 1 (concept '" + r.label + "')");
            freq.emplace(r.label, r.frequency);
        }
        std::unordered_map<std::string, std::uint32_t> id;
        for (const auto& [label, tau] : freq) {
            id.emplace(label, static_cast<std::uint32_t>(concepts_.size()));
            concepts_.push_back({label, tau});
        }

        // article -> (year, concept ids)
        std::map<std::string, std::pair<int, std::vector<std::uint32_t>>> articles;
        for (const auto& r : records) {
            auto& slot = articles[r.article_id];
            slot.first = r.year;
            slot.second.push_back(id.at(r.label));
        }
        std::unordered_map<std::uint64_t, int> first_year;
        for (auto& [article, entry] : articles) {
            auto& ids = entry.second;
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (std::size_t j = i + 1; j < ids.size(); ++j) {
                    const auto key = (std::uint64_t{ids[i]} << 32) | ids[j];
                    auto [it, fresh] = first_year.emplace(key, entry.first);
                    if (!fresh) it->second = std::min(it->second, entry.first);
                }
        }
        pairs_.reserve(first_year.size());
        for (const auto& [key, year] : first_year)
            pairs_.push_back({static_cast<std::uint32_t>(key >> 32),
                              static_cast<std::uint32_t>(key & 0xffffffffu),
                              edge_weight(year, years.min, years.max, single_year_zero)});
        std::sort(pairs_.begin(), pairs_.end(), [](const auto& x, const auto& y) {
            return std::pair{x.a, x.b} < std::pair{y.a, y.b};
        });
    }

    ConceptNetwork network(const ThresholdPoint& theta) const {
        const auto window = frequency_window(theta);
        std::vector<std::size_t> remap(concepts_.size(), npos);
        ConceptNetwork net;
        net.years = years_;
        for (std::size_t i = 0; i < concepts_.size(); ++i) {
            if (!window.contains(concepts_[i].frequency)) continue;
            remap[i] = net.nodes.size();
            net.nodes.push_back(concepts_[i]);
        }
        for (const auto& p : pairs_) {
            if (remap[p.a] == npos || remap[p.b] == npos) continue;
            net.edges.push_back({remap[p.a], remap[p.b], p.weight});
        }
        return net;
    }

    const std::vector<ConceptNode>& concepts() const noexcept { return concepts_; }
    YearRange years() const noexcept { return years_; }
    std::size_t pair_count() const noexcept { return pairs_.size(); }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    struct Pair {
        std::uint32_t a;
        std::uint32_t b;
        double weight;
    };

    YearRange years_;
    bool single_year_zero_;
    std::vector<ConceptNode> concepts_;
    std::vector<Pair> pairs_;
};

inline ConceptNetwork build_network(const std::vector<CorpusRecord>& records, const ThresholdPoint& theta,
                                    YearRange years, bool single_year_zero = false) {
    return CorpusIndex(records, years, single_year_zero).network(theta);
}

/// Induced sub-network on nodes whose frequency passes the window of `theta`.
inline ConceptNetwork filter_network(const ConceptNetwork& net, const ThresholdPoint& theta) {
    const auto window = frequency_window(theta);
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> remap(net.nodes.size(), npos);
    ConceptNetwork out;
    out.years = net.years;
    for (std::size_t i = 0; i < net.nodes.size(); ++i) {
        if (!window.contains(net.nodes[i].frequency)) continue;
        remap[i] = out.nodes.size();
        out.nodes.push_back(net.nodes[i]);
    }
    for (const auto& e : net.edges)
        if (remap[e.a] != npos && remap[e.b] != npos) out.edges.push_back({remap[e.a], remap[e.b], e.weight});
    return out;
}

}  // namespace topothresh
