//! Game records to training files: winner filtering, comment filtering,
//! engine labelling and the stage splits.

mod filter;
mod labels;
mod pipeline;
mod prompt;

pub use filter::{
    contains_keyword, default_keywords, extract_triplets, filter_comment, winner_filter, HttpSanitizer,
    IdentitySanitizer, ReplayError, Sanitizer, SanitizerError, Triplet, DEFAULT_KEYWORDS,
};
pub use labels::{classify_situation, coarsen_to_3class, SituationLabel3, SituationLabel5};
pub use pipeline::{
    build_stage_files, is_good_move, write_outputs, Funnel, LabelSource, PipelineConfig, PipelineError,
    PipelineOutput, RejectRecord, SanitizerFailure, Shortfall, Source, Stage1Record, Stage2Record, Stage3Record,
    TestRecord,
};
pub use prompt::{build_prompt, PromptMode};
