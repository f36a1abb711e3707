//! Run configuration: command-line flags merged over an optional TOML file.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use grantscope_core::corpus::InputFormat;
use grantscope_core::ml::{Algorithm, ComplexityText, FeatureConfig, VocabularyScope};
use grantscope_core::relevance::{Alpha, ImportanceWeighting};
use grantscope_core::topical::{FieldSelector, IdfVariant, WeightingMode, TOP_X_ABSTRACT_SMALL};
use grantscope_core::{Area, Language};

use crate::Invalid;

/// Flags shared by every subcommand. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Corpus file; defaults to `<out>/corpus.jsonl` after the ingest step.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// csv or jsonl; inferred from the file extension when absent.
    #[arg(long)]
    pub format: Option<String>,
    /// pt or en.
    #[arg(long)]
    pub lang: Option<String>,
    /// title, subject, title+subject or abstract.
    #[arg(long)]
    pub fields: Option<String>,
    /// complexity or tfidf.
    #[arg(long)]
    pub features: Option<String>,
    /// Vocabulary size: 1100, 7196 or any positive count.
    #[arg(long)]
    pub top_x: Option<usize>,
    /// dtrees, svm, knn, bayes, mlp or all; comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub algo: Vec<String>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file whose keys mirror these flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Leave the generation timestamp out of the SVG.
    #[arg(long)]
    pub no_timestamp: bool,
    /// Directory of lexicon overrides (optionally with `pt/` and `en/` subdirectories).
    #[arg(long)]
    pub lexicons: Option<PathBuf>,
    /// Restrict to one area: MED, DENT, VET or OTHER.
    #[arg(long)]
    pub area: Option<String>,
    /// Complexity text: abstract or title+abstract.
    #[arg(long)]
    pub complexity_text: Option<String>,
    /// tf-idf vocabulary fit: training-folds or global.
    #[arg(long)]
    pub vocabulary: Option<String>,
    /// tfidf or raw.
    #[arg(long)]
    pub weighting: Option<String>,
    /// log-ratio or conventional.
    #[arg(long)]
    pub idf: Option<String>,
    /// Trees per forest in the relevance analysis.
    #[arg(long)]
    pub trees: Option<usize>,
    /// per-node or instance-weighted.
    #[arg(long)]
    pub importance: Option<String>,
    /// Significance level: 0.05 or 0.10.
    #[arg(long)]
    pub alpha: Option<f64>,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    input: Option<PathBuf>,
    format: Option<String>,
    #[serde(alias = "language")]
    lang: Option<String>,
    #[serde(alias = "field")]
    fields: Option<String>,
    features: Option<String>,
    #[serde(alias = "top_x")]
    top_x: Option<usize>,
    algo: Option<StringOrList>,
    folds: Option<usize>,
    resamples: Option<usize>,
    seed: Option<u64>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    #[serde(alias = "no_timestamp")]
    no_timestamp: Option<bool>,
    lexicons: Option<PathBuf>,
    area: Option<String>,
    #[serde(alias = "complexity_text")]
    complexity_text: Option<String>,
    vocabulary: Option<String>,
    weighting: Option<String>,
    idf: Option<String>,
    trees: Option<usize>,
    importance: Option<String>,
    alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum StringOrList {
    One(String),
    Many(Vec<String>),
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Invalid(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Invalid(format!("config {}: {e}", path.display())).into())
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub language: Language,
    pub field: FieldSelector,
    pub features: FeatureKind,
    pub top_x: usize,
    pub algorithms: Vec<Algorithm>,
    pub folds: usize,
    pub resamples: usize,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub timestamp: bool,
    pub lexicons: Option<PathBuf>,
    pub area: Option<Area>,
    pub complexity_text: ComplexityText,
    pub vocabulary: VocabularyScope,
    pub weighting: WeightingMode,
    pub idf: IdfVariant,
    pub trees: usize,
    pub importance: ImportanceWeighting,
    pub alpha: Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Complexity,
    Tfidf,
}

/// Settings that determine output content, echoed into every output file.
/// Paths of outputs and the thread count are left out so reruns elsewhere
/// produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho<'a> {
    pub command: &'a str,
    pub input: String,
    pub area: Option<Area>,
    pub features: FeatureConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub algorithms: Vec<Algorithm>,
    pub folds: usize,
    pub resamples: usize,
    pub alpha: f64,
}

fn invalid<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Invalid(msg.into()).into())
}

fn parse<T: std::str::FromStr<Err = String>>(what: &str, s: &str) -> anyhow::Result<T> {
    s.parse().map_err(|e| Invalid(format!("--{what}: {e}")).into())
}

fn pick<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Expands one `--algo` value.
pub fn parse_algorithms(name: &str) -> anyhow::Result<Vec<Algorithm>> {
    Ok(match name.trim().to_ascii_lowercase().as_str() {
        "dtrees" => vec![Algorithm::Dtree, Algorithm::RandomForest],
        "svm" => vec![Algorithm::LinearSvm],
        "bayes" => vec![Algorithm::NaiveBayes],
        "all" => Algorithm::ALL.to_vec(),
        other => vec![parse("algo", other)?],
    })
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let out = pick(args.out.clone(), file.out).unwrap_or_else(|| PathBuf::from("out"));
        let input = pick(args.input.clone(), file.input).unwrap_or_else(|| out.join("corpus.jsonl"));
        let format = match pick(args.format.clone(), file.format) {
            Some(f) => parse("format", &f)?,
            None => match input.extension().and_then(|e| e.to_str()) {
                Some("csv") => InputFormat::Csv,
                Some("jsonl") | Some("json") => InputFormat::Jsonl,
                _ => return invalid(format!("cannot infer the format of {}; pass --format", input.display())),
            },
        };
        let language: Language = parse("lang", &pick(args.lang.clone(), file.lang).unwrap_or_else(|| "pt".into()))?;
        let field: FieldSelector = parse("fields", &pick(args.fields.clone(), file.fields).unwrap_or_else(|| "abstract".into()))?;
        let features = match pick(args.features.clone(), file.features).as_deref().unwrap_or("complexity") {
            "complexity" => FeatureKind::Complexity,
            "tfidf" => FeatureKind::Tfidf,
            other => return invalid(format!("--features: unknown family `{other}` (expected complexity or tfidf)")),
        };
        let top_x = pick(args.top_x, file.top_x).unwrap_or(TOP_X_ABSTRACT_SMALL);
        if top_x == 0 {
            return invalid("--top-x must be positive");
        }
        let algo_names = if !args.algo.is_empty() {
            args.algo.clone()
        } else {
            match file.algo {
                Some(StringOrList::One(s)) => s.split(',').map(str::to_string).collect(),
                Some(StringOrList::Many(v)) => v,
                None => vec!["all".to_string()],
            }
        };
        let mut algorithms = Vec::new();
        for name in &algo_names {
            for a in parse_algorithms(name)? {
                if !algorithms.contains(&a) {
                    algorithms.push(a);
                }
            }
        }
        let folds = pick(args.folds, file.folds).unwrap_or(10);
        if folds < 2 {
            return invalid("--folds must be at least 2");
        }
        let resamples = pick(args.resamples, file.resamples).unwrap_or(10);
        if resamples == 0 {
            return invalid("--resamples must be at least 1");
        }
        let jobs = pick(args.jobs, file.jobs);
        if jobs == Some(0) {
            return invalid("--jobs must be at least 1");
        }
        let area = match pick(args.area.clone(), file.area) {
            Some(a) => Some(parse("area", &a)?),
            None => None,
        };
        let complexity_text = match pick(args.complexity_text.clone(), file.complexity_text).as_deref() {
            None | Some("abstract") => ComplexityText::Abstract,
            Some("title+abstract") => ComplexityText::TitleAbstract,
            Some(other) => return invalid(format!("--complexity-text: unknown value `{other}`")),
        };
        let vocabulary = match pick(args.vocabulary.clone(), file.vocabulary).as_deref() {
            None | Some("training-folds") => VocabularyScope::TrainingFolds,
            Some("global") => VocabularyScope::Global,
            Some(other) => return invalid(format!("--vocabulary: unknown value `{other}`")),
        };
        let weighting = match pick(args.weighting.clone(), file.weighting).as_deref() {
            None | Some("tfidf") => WeightingMode::Tfidf,
            Some("raw") => WeightingMode::RawFrequency,
            Some(other) => return invalid(format!("--weighting: unknown value `{other}`")),
        };
        let idf = match pick(args.idf.clone(), file.idf).as_deref() {
            None | Some("log-ratio") => IdfVariant::LogRatio,
            Some("conventional") => IdfVariant::Conventional,
            Some(other) => return invalid(format!("--idf: unknown value `{other}`")),
        };
        let trees = pick(args.trees, file.trees).unwrap_or(100);
        if trees == 0 {
            return invalid("--trees must be at least 1");
        }
        let importance = match pick(args.importance.clone(), file.importance).as_deref() {
            None | Some("per-node") => ImportanceWeighting::PerNode,
            Some("instance-weighted") => ImportanceWeighting::InstanceWeighted,
            Some(other) => return invalid(format!("--importance: unknown value `{other}`")),
        };
        let alpha = Alpha::from_value(pick(args.alpha, file.alpha).unwrap_or(0.05)).map_err(|e| Invalid(e.to_string()))?;
        Ok(RunConfig {
            input,
            format,
            language,
            field,
            features,
            top_x,
            algorithms,
            folds,
            resamples,
            seed: pick(args.seed, file.seed),
            jobs,
            out,
            timestamp: !(args.no_timestamp || file.no_timestamp.unwrap_or(false)),
            lexicons: pick(args.lexicons.clone(), file.lexicons),
            area,
            complexity_text,
            vocabulary,
            weighting,
            idf,
            trees,
            importance,
            alpha,
        })
    }

    /// The base seed; commands that sample refuse to run without one.
    pub fn require_seed(&self) -> anyhow::Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => invalid("--seed is required (there is no clock-based default)"),
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        match self.features {
            FeatureKind::Complexity => FeatureConfig::Complexity {
                language: self.language,
                text: self.complexity_text,
            },
            FeatureKind::Tfidf => FeatureConfig::Tfidf {
                language: self.language,
                field: self.field,
                top_x: self.top_x,
                weighting: self.weighting,
                idf: self.idf,
                vocabulary_scope: self.vocabulary,
            },
        }
    }

    pub fn echo<'a>(&self, command: &'a str, features: FeatureConfig, algorithms: Vec<Algorithm>) -> ConfigEcho<'a> {
        ConfigEcho {
            command,
            input: self.input.display().to_string(),
            area: self.area,
            features,
            algorithms,
            folds: self.folds,
            resamples: self.resamples,
            alpha: self.alpha.value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_aliases() {
        assert_eq!(parse_algorithms("dtrees").unwrap(), [Algorithm::Dtree, Algorithm::RandomForest]);
        assert_eq!(parse_algorithms("all").unwrap().len(), 6);
        assert_eq!(parse_algorithms("bayes").unwrap(), [Algorithm::NaiveBayes]);
        assert!(parse_algorithms("xgboost").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "input = \"grants.csv\"\nseed = 3\nfolds = 5\nalgo = [\"svm\", \"knn\"]\ntop-x = 7196\nfeatures = \"tfidf\"\n",
        )
        .unwrap();
        let args = RunArgs {
            config: Some(path),
            folds: Some(4),
            ..RunArgs::default()
        };
        let c = RunConfig::resolve(&args).unwrap();
        assert_eq!(c.folds, 4);
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.format, InputFormat::Csv);
        assert_eq!(c.top_x, 7196);
        assert_eq!(c.features, FeatureKind::Tfidf);
        assert_eq!(c.algorithms, [Algorithm::LinearSvm, Algorithm::Knn]);
    }

    #[test]
    fn unknown_keys_and_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "sede = 3\n").unwrap();
        let args = RunArgs {
            config: Some(path),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(&args).unwrap_err().is::<Invalid>());
        let bad = RunArgs {
            input: Some("x.csv".into()),
            lang: Some("fr".into()),
            ..RunArgs::default()
        };
        assert!(RunConfig::resolve(&bad).unwrap_err().is::<Invalid>());
    }

    #[test]
    fn seed_is_required_but_not_defaulted() {
        let c = RunConfig::resolve(&RunArgs {
            input: Some("x.jsonl".into()),
            ..RunArgs::default()
        })
        .unwrap();
        assert!(c.require_seed().is_err());
        assert_eq!(c.input, PathBuf::from("x.jsonl"));
    }
}
