//! Entity-level scoring and output similarity measures.

mod counts;
mod report;
mod run;
mod similarity;
mod strsim;

pub use counts::{match_entities, match_keyed, precision_recall_f1, Counts, MatchCounts, Scores};
pub use report::{
    render_table1, render_table2, write_reports, EvalReport, RecordOutcome, RecordSimilarity, SimilarityMeans, Skip,
    REPORT_FILE, TABLE1_FILE, TABLE1_LABELS, TABLE2_FILE,
};
pub use run::{
    run_evaluation, DatasetRef, EvalOptions, LiveDetector, MatchMode, Prediction, RecordDetector, ScriptedDetector,
};
pub use similarity::{cosine_similarity, semantic_similarity, tokens, Cosine, EmbeddingProvider, HttpEmbeddings, TokenFrequency};
pub use strsim::{
    jaro, jaro_winkler, jaro_winkler_with, levenshtein, normalized_levenshtein, WINKLER_MAX_PREFIX,
    WINKLER_PREFIX_SCALE,
};
