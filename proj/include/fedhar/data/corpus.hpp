#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedhar/data/windowed.hpp"

namespace fedhar::data {

// Column reference: header name or zero-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

enum class Normalization { kNone, kZScore };

// Generic delimited-text schema for accelerometer corpora. One spec file per
// public dataset ships under configs/.
struct CorpusSpec {
    std::string name;
    char delimiter = ',';          // ignored when whitespace_delimited
    bool whitespace_delimited = false;
    bool has_header = true;

    // When the input path is a directory, every file is one subject and the
    // subject id is the filename stem; subject_column is then unused.
    std::optional<ColumnRef> subject_column;
    ColumnRef label_column = std::string("label");
    std::vector<ColumnRef> channel_columns;
    std::optional<ColumnRef> timestamp_column;  // parsed but unused

    std::map<std::string, int> label_map;  // raw value -> class id
    std::vector<std::string> drop_labels;  // raw values silently skipped
    std::vector<std::string> exclude_subjects;

    double sampling_rate_hz = 50.0;  // documentation only
    std::size_t window_len = 128;
    double overlap = 0.5;  // stride = window_len * (1 - overlap)
    Normalization normalization = Normalization::kZScore;

    void validate() const;
    std::size_t stride() const;
    std::size_t n_classes() const;
};

CorpusSpec corpus_spec_from_json_file(const std::filesystem::path& path);

struct IngestStats {
    std::size_t rows_read = 0;
    std::size_t rows_skipped_empty_subject = 0;
    std::size_t rows_skipped_dropped_label = 0;
    std::size_t rows_skipped_bad_value = 0;
    std::size_t windows_dropped_no_majority = 0;
    std::size_t subjects_without_windows = 0;
};

struct CorpusLoad {
    std::map<int, WindowedDataset> clients;        // dense ids 0..n-1
    std::map<std::string, int> subject_to_client;  // original subject keys
    IngestStats stats;
};

// Reads a delimited file (or one file per subject in a directory), slices
// each subject's sample stream into sliding windows of window_len with the
// spec's stride, and labels each window by majority vote; windows whose
// majority label covers less than half the window are dropped. Unknown
// labels raise IngestError naming the offending value. Normalization is NOT
// applied here: z-score statistics must come from a client's training split
// only, so callers normalize after splitting.
CorpusLoad load_corpus(const CorpusSpec& spec, const std::filesystem::path& path);

}  // namespace fedhar::data
