#pragma once

#include <stdexcept>
#include <string>

namespace diagbench {

enum class ErrorKind {
    // document-model
    malformed_input,
    unsupported_feature,
    empty_document,
    degenerate_canvas,
    // layout-metrics
    out_of_range,
    // perceptual-metrics
    negative_count,
    // judge-gateway
    judge_unreachable,
    unparseable_verdict,
    // scoring
    weight_mismatch,
    malformed_trace,
    nonpositive_k,
    unfrozen_season,
    empty_season,
    // cohort-sampler
    empty_subset,
    corpus_too_small,
    invalid_cohort_size,
    // season-registry
    duplicate_id,
    season_incomplete,
    insufficient_corpus,
    committed_cohorts_immutable,
    invalid_item,
    // evaluation-pipeline
    task_mismatch,
    // generic I/O
    io_failure,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::malformed_input: return "MalformedInput";
        case ErrorKind::unsupported_feature: return "UnsupportedFeature";
        case ErrorKind::empty_document: return "EmptyDocument";
        case ErrorKind::degenerate_canvas: return "DegenerateCanvas";
        case ErrorKind::out_of_range: return "OutOfRange";
        case ErrorKind::negative_count: return "NegativeCount";
        case ErrorKind::judge_unreachable: return "JudgeUnreachable";
        case ErrorKind::unparseable_verdict: return "UnparseableVerdict";
        case ErrorKind::weight_mismatch: return "WeightMismatch";
        case ErrorKind::malformed_trace: return "MalformedTrace";
        case ErrorKind::nonpositive_k: return "NonpositiveK";
        case ErrorKind::unfrozen_season: return "UnfrozenSeason";
        case ErrorKind::empty_season: return "EmptySeason";
        case ErrorKind::empty_subset: return "EmptySubset";
        case ErrorKind::corpus_too_small: return "CorpusTooSmall";
        case ErrorKind::invalid_cohort_size: return "InvalidCohortSize";
        case ErrorKind::duplicate_id: return "DuplicateId";
        case ErrorKind::season_incomplete: return "SeasonIncomplete";
        case ErrorKind::insufficient_corpus: return "InsufficientCorpus";
        case ErrorKind::committed_cohorts_immutable: return "CommittedCohortsImmutable";
        case ErrorKind::invalid_item: return "InvalidItem";
        case ErrorKind::task_mismatch: return "TaskMismatch";
        case ErrorKind::io_failure: return "IoFailure";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace diagbench
