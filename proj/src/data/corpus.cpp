#include "fedhar/data/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fedhar/errors.hpp"

namespace fedhar::data {

void CorpusSpec::validate() const {
    if (window_len < 8) throw ConfigError("corpus: window_len must be >= 8");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("corpus: overlap must be in [0,1)");
    if (channel_columns.empty()) throw ConfigError("corpus: no channel columns");
    if (label_map.empty()) throw ConfigError("corpus: empty label map");
    if (stride() == 0) throw ConfigError("corpus: overlap leaves a zero stride");
}

std::size_t CorpusSpec::stride() const {
    auto s = static_cast<std::size_t>(
        std::llround(static_cast<double>(window_len) * (1.0 - overlap)));
    return s;
}

std::size_t CorpusSpec::n_classes() const {
    int mx = -1;
    for (const auto& [_, id] : label_map) mx = std::max(mx, id);
    return static_cast<std::size_t>(mx + 1);
}

namespace {

ColumnRef column_ref_from_json(const nlohmann::json& j, const std::string& field) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_unsigned() || j.is_number_integer()) return j.get<std::size_t>();
    throw ConfigError("corpus spec: " + field + " must be a column name or index");
}

}  // namespace

CorpusSpec corpus_spec_from_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open corpus spec " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("corpus spec " + path.string() + ": " + e.what());
    }

    CorpusSpec spec;
    spec.name = j.value("name", path.stem().string());
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d == "whitespace") {
            spec.whitespace_delimited = true;
        } else if (d.size() == 1) {
            spec.delimiter = d[0];
        } else {
            throw ConfigError("corpus spec: delimiter must be one character or 'whitespace'");
        }
    }
    spec.has_header = j.value("has_header", true);
    if (j.contains("subject_column")) {
        spec.subject_column = column_ref_from_json(j.at("subject_column"), "subject_column");
    }
    if (j.contains("label_column")) {
        spec.label_column = column_ref_from_json(j.at("label_column"), "label_column");
    }
    if (j.contains("timestamp_column")) {
        spec.timestamp_column =
            column_ref_from_json(j.at("timestamp_column"), "timestamp_column");
    }
    for (const auto& c : j.at("channel_columns")) {
        spec.channel_columns.push_back(column_ref_from_json(c, "channel_columns"));
    }
    for (const auto& [key, value] : j.at("label_map").items()) {
        spec.label_map[key] = value.get<int>();
    }
    if (j.contains("drop_labels")) {
        spec.drop_labels = j.at("drop_labels").get<std::vector<std::string>>();
    }
    if (j.contains("exclude_subjects")) {
        spec.exclude_subjects = j.at("exclude_subjects").get<std::vector<std::string>>();
    }
    spec.sampling_rate_hz = j.value("sampling_rate_hz", 50.0);
    spec.window_len = j.value("window_len", std::size_t{128});
    spec.overlap = j.value("overlap", 0.5);
    if (j.contains("normalization")) {
        const auto n = j.at("normalization").get<std::string>();
        if (n == "zscore") spec.normalization = Normalization::kZScore;
        else if (n == "none") spec.normalization = Normalization::kNone;
        else throw ConfigError("corpus spec: normalization must be 'zscore' or 'none'");
    }
    spec.validate();
    return spec;
}

namespace {

std::vector<std::string> split_line(const std::string& line, const CorpusSpec& spec) {
    std::vector<std::string> fields;
    if (spec.whitespace_delimited) {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) fields.push_back(tok);
    } else {
        std::string cur;
        for (char ch : line) {
            if (ch == spec.delimiter) {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        fields.push_back(cur);
    }
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Resolves a column reference against the header (or directly as an index).
std::size_t resolve_column(const ColumnRef& ref, const std::vector<std::string>& header,
                           const std::string& what) {
    if (std::holds_alternative<std::size_t>(ref)) return std::get<std::size_t>(ref);
    const std::string& name = std::get<std::string>(ref);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    throw IngestError("column '" + name + "' for " + what + " not found in header");
}

struct SubjectStream {
    std::vector<double> samples;  // interleaved per row: ch0, ch1, ...
    std::vector<int> labels;      // per row
};

struct ColumnPlan {
    std::optional<std::size_t> subject;
    std::size_t label = 0;
    std::vector<std::size_t> channels;
};

void ingest_file(const std::filesystem::path& file, const CorpusSpec& spec,
                 std::optional<std::string> forced_subject,
                 std::map<std::string, SubjectStream>& streams, IngestStats& stats) {
    std::ifstream is(file);
    if (!is) throw IoError("cannot open " + file.string());

    std::string line;
    std::vector<std::string> header;
    if (spec.has_header) {
        if (!std::getline(is, line)) return;
        header = split_line(line, spec);
    }

    ColumnPlan plan;
    if (!forced_subject) {
        if (!spec.subject_column) {
            throw ConfigError("corpus: single-file input requires subject_column");
        }
        plan.subject = resolve_column(*spec.subject_column, header, "subject");
    }
    plan.label = resolve_column(spec.label_column, header, "label");
    for (const auto& c : spec.channel_columns) {
        plan.channels.push_back(resolve_column(c, header, "channel"));
    }

    const auto is_dropped = [&](const std::string& raw) {
        return std::find(spec.drop_labels.begin(), spec.drop_labels.end(), raw) !=
               spec.drop_labels.end();
    };

    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_line(line, spec);
        ++stats.rows_read;

        std::size_t max_col = plan.label;
        for (std::size_t c : plan.channels) max_col = std::max(max_col, c);
        if (plan.subject) max_col = std::max(max_col, *plan.subject);
        if (fields.size() <= max_col) {
            ++stats.rows_skipped_bad_value;
            continue;
        }

        std::string subject = forced_subject ? *forced_subject
                                             : trim(fields[*plan.subject]);
        if (subject.empty()) {
            ++stats.rows_skipped_empty_subject;
            continue;
        }
        if (std::find(spec.exclude_subjects.begin(), spec.exclude_subjects.end(), subject) !=
            spec.exclude_subjects.end()) {
            continue;
        }

        const std::string raw_label = trim(fields[plan.label]);
        if (is_dropped(raw_label)) {
            ++stats.rows_skipped_dropped_label;
            continue;
        }
        auto it = spec.label_map.find(raw_label);
        if (it == spec.label_map.end()) {
            throw IngestError("unknown label value '" + raw_label + "' in " + file.string());
        }

        std::vector<double> values(plan.channels.size());
        bool bad = false;
        for (std::size_t c = 0; c < plan.channels.size(); ++c) {
            const std::string raw = trim(fields[plan.channels[c]]);
            char* end = nullptr;
            values[c] = std::strtod(raw.c_str(), &end);
            if (raw.empty() || end != raw.c_str() + raw.size() || !std::isfinite(values[c])) {
                bad = true;
                break;
            }
        }
        if (bad) {
            ++stats.rows_skipped_bad_value;
            continue;
        }

        auto& stream = streams[subject];
        stream.samples.insert(stream.samples.end(), values.begin(), values.end());
        stream.labels.push_back(it->second);
    }
}

// Sliding windows over one subject's sample stream. Majority label must
// cover at least half the window or the window is dropped.
void windowize(const SubjectStream& stream, const CorpusSpec& spec, int client_id,
               std::vector<double>& out_windows, std::vector<int>& out_labels,
               std::vector<int>& out_prov, IngestStats& stats) {
    const std::size_t C = spec.channel_columns.size();
    const std::size_t T = spec.window_len;
    const std::size_t n_rows = stream.labels.size();
    if (n_rows < T) return;

    const std::size_t stride = spec.stride();
    const std::size_t n_classes = spec.n_classes();
    std::vector<std::size_t> counts(n_classes);

    for (std::size_t start = 0; start + T <= n_rows; start += stride) {
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t t = 0; t < T; ++t) {
            ++counts[static_cast<std::size_t>(stream.labels[start + t])];
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < n_classes; ++k) {
            if (counts[k] > counts[best]) best = k;
        }
        if (2 * counts[best] < T) {
            ++stats.windows_dropped_no_majority;
            continue;
        }

        // Transpose row-interleaved samples into [C, T] channel blocks.
        const std::size_t base = out_windows.size();
        out_windows.resize(base + C * T);
        for (std::size_t t = 0; t < T; ++t) {
            const double* row = stream.samples.data() + (start + t) * C;
            for (std::size_t c = 0; c < C; ++c) out_windows[base + c * T + t] = row[c];
        }
        out_labels.push_back(static_cast<int>(best));
        out_prov.push_back(client_id);
    }
}

}  // namespace

CorpusLoad load_corpus(const CorpusSpec& spec, const std::filesystem::path& path) {
    spec.validate();

    std::map<std::string, SubjectStream> streams;
    CorpusLoad load;

    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw DataError("load_corpus: no files in " + path.string());
        for (const auto& f : files) {
            const std::string subject = f.stem().string();
            if (std::find(spec.exclude_subjects.begin(), spec.exclude_subjects.end(),
                          subject) != spec.exclude_subjects.end()) {
                continue;
            }
            ingest_file(f, spec, subject, streams, load.stats);
        }
    } else if (std::filesystem::is_regular_file(path)) {
        ingest_file(path, spec, std::nullopt, streams, load.stats);
    } else {
        throw IoError("load_corpus: no such file or directory: " + path.string());
    }

    // Subjects get dense client ids in sorted-key order, so the mapping is
    // stable across runs. Subjects too short for a single window are dropped.
    int next_id = 0;
    for (const auto& [subject, stream] : streams) {
        std::vector<double> w;
        std::vector<int> labels, prov;
        windowize(stream, spec, next_id, w, labels, prov, load.stats);
        if (labels.empty()) {
            ++load.stats.subjects_without_windows;
            continue;
        }
        load.subject_to_client[subject] = next_id;

        WindowedDataset ds;
        const std::size_t n = labels.size();
        ds.windows = Tensor({n, spec.channel_columns.size(), spec.window_len}, std::move(w));
        ds.labels = std::move(labels);
        ds.provenance = std::move(prov);
        load.clients.emplace(next_id, std::move(ds));
        ++next_id;
    }

    if (load.clients.empty()) throw DataError("load_corpus: no usable subjects in input");
    return load;
}

}  // namespace fedhar::data
