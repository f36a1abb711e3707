//! Text features, classifiers and impurity-based feature relevance for
//! predicting whether a research grant yields at least one publication.
//!
//! The pipeline runs in five stages, each living in its own module:
//!
//! * [`corpus`]: grant records, productivity labels, balanced resampling and
//!   stratified folds.
//! * [`textproc`]: sentence splitting, tokenization, lexicon-driven
//!   part-of-speech tagging and named-entity marking (Portuguese and English).
//! * [`complexity`]: lexical-complexity metrics assembled into a fixed schema.
//! * [`topical`]: frequency and tf-idf vectors over a top-X vocabulary.
//! * [`ml`]: decision trees, random forests, naive Bayes, kNN, linear SVM and
//!   MLP evaluated under the balanced-resample x k-fold protocol.
//! * [`relevance`]: Gini impurity decrease, average ranks and the Nemenyi
//!   critical difference.
//!
//! [`report`] serializes evaluation and relevance results to CSV, JSON and SVG.

pub mod complexity;
pub mod corpus;
pub mod error;
pub mod ml;
pub mod relevance;
pub mod report;
pub mod seed;
pub mod synthetic;
pub mod textproc;
pub mod topical;

pub use complexity::{ComplexityVector, FeatureSchema};
pub use corpus::{Area, BalancedDataset, FoldAssignment, GrantRecord, Label};
pub use error::{Error, Result};
pub use ml::{Algorithm, EvalReport, FeatureMatrix, TrainedModel};
pub use relevance::FeatureRelevanceReport;
pub use textproc::{Language, LexiconSet, Tag, TaggedDocument, TaggedToken, Token, TokenKind};
pub use topical::{FieldSelector, SparseVector, Vocabulary};
