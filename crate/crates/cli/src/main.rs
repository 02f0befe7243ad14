use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use paravec::classify::{
    evaluate, train_logreg, train_logreg_early_stop, train_mlp, Classifier, FeatureSet, LogRegParams, MlpParams,
};
use paravec::corpus::read_documents;
use paravec::infer::{infer_batch, InferenceSchedule};
use paravec::matrix::DenseMatrix;
use paravec::persist::{load_model_file, read_header, read_vectors_file, save_model_file, write_vectors_file};
use paravec::query::{analogy, nearest, Neighbor, Query, Space};
use paravec::retrieval::{
    evaluate_lexical, split_errors, synth_triplets, vector_average_features, Distance, Method, SplitErrors,
    TripletSet, WeightedBigramParams,
};
use paravec::synth::SynthParams;
use paravec::train::{train_with, TrainSchedule};
use paravec::{Composition, Corpus, Model, ModelConfig, OutputLayer, Tokenizer, Vocabulary};

/// Paragraph vectors: train, infer, classify and evaluate.
#[derive(Parser)]
#[command(name = "paravec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count tokens and write the vocabulary as `surface<TAB>count` lines.
    BuildVocab {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train paragraph vectors on a corpus, one document per line.
    Train(TrainArgs),
    /// Infer vectors for new documents with frozen models.
    Infer {
        /// Repeat to concatenate the vectors of several models.
        #[arg(long, required = true)]
        model: Vec<PathBuf>,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.025)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        lr_min: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stop once a pass improves the mean loss by less than this.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Train a classifier on vectors and report error rates.
    Classify {
        #[arg(long)]
        train_vec: PathBuf,
        #[arg(long)]
        train_labels: PathBuf,
        #[arg(long)]
        test_vec: PathBuf,
        #[arg(long)]
        test_labels: PathBuf,
        #[arg(long, value_enum, default_value_t = ClassifierKind::Logreg)]
        model: ClassifierKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        epochs: usize,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        l2: Option<f64>,
        /// Hidden units of the neural network.
        #[arg(long, default_value_t = 50)]
        hidden: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Hold out the last tenth of the training rows and stop after this
        /// many epochs without validation improvement (logreg only).
        #[arg(long)]
        early_stop: Option<usize>,
    },
    /// Score a feature method on (anchor, positive, negative) triplets.
    EvalTriplet {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        triplets: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Trained model(s) for `avg` and `pv`; repeat to concatenate.
        #[arg(long)]
        model: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::Cosine)]
        metric: MetricArg,
        /// Inference passes for `pv` when the model was not trained on this corpus.
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Projection sizes tried by `wbigram`.
        #[arg(long, value_delimiter = ',', default_value = "128")]
        proj_dim: Vec<usize>,
        /// Loss weights tried by `wbigram`.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        wb_epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        wb_lr: f64,
    },
    /// Generate a synthetic topic corpus and triplets over it.
    SynthTriplets {
        #[arg(long)]
        topics: usize,
        #[arg(long)]
        docs_per_topic: usize,
        #[arg(long, default_value_t = 0.2)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        triplets: usize,
        #[arg(long, default_value_t = 20)]
        vocab_per_topic: usize,
        #[arg(long, default_value_t = 20)]
        shared_vocab: usize,
        #[arg(long, default_value_t = 20)]
        doc_len: usize,
        /// Topic words each document draws from (0 = the whole topic pool)
        #[arg(long, default_value_t = 0)]
        focus: usize,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_triplets: PathBuf,
        /// Also write each document's topic, one per line.
        #[arg(long)]
        out_labels: Option<PathBuf>,
    },
    /// Nearest neighbours by cosine similarity.
    Nearest {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, group = "query")]
        word: Option<String>,
        #[arg(long, group = "query")]
        paragraph: Option<usize>,
        /// Infer a vector for this text and query with it.
        #[arg(long, group = "query")]
        text: Option<String>,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SpaceArg::Words)]
        space: SpaceArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Words closest to vec(b) - vec(a) + vec(c).
    Analogy {
        #[arg(long)]
        model: PathBuf,
        a: String,
        b: String,
        c: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
    },
    /// Print a model file's metadata.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(clap::Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = TrainMode::PvDm)]
    mode: TrainMode,
    #[arg(long, default_value_t = 100)]
    dim_word: usize,
    #[arg(long, default_value_t = 100)]
    dim_para: usize,
    #[arg(long, default_value_t = 8)]
    window: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    lr_min: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    corpus: PathBuf,
    /// Output model; `both` writes `<out>.dm` and `<out>.dbow`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long, value_enum, default_value_t = CompositionArg::Concat)]
    composition: CompositionArg,
    #[arg(long, value_enum, default_value_t = OutputArg::Hierarchical)]
    output_layer: OutputArg,
    /// Centre the context window on the target instead of using only the
    /// preceding words.
    #[arg(long)]
    symmetric: bool,
    /// Visit documents in corpus order every epoch.
    #[arg(long)]
    no_shuffle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TrainMode {
    PvDm,
    PvDbow,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompositionArg {
    Concat,
    Average,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputArg {
    Hierarchical,
    Full,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ClassifierKind {
    Logreg,
    Mlp,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cosine,
    Euclidean,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Words,
    Paragraphs,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|_| "expected one of tfidf1, tfidf2, wbigram, avg, pv".to_owned())
}

/// Invocation problems found after argument parsing; exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::BuildVocab { corpus, min_count, out } => {
            let docs = read_corpus(&corpus)?;
            let vocab = Vocabulary::build(&docs, min_count)?;
            match out {
                Some(path) => vocab.write_dump(BufWriter::new(create(&path)?))?,
                None => vocab.write_dump(io::stdout().lock())?,
            }
            eprintln!("{} words", vocab.n_words());
            Ok(())
        }
        Command::Train(args) => train_cmd(args),
        Command::Infer {
            model,
            input,
            out,
            steps,
            lr,
            lr_min,
            seed,
            tolerance,
            workers,
        } => {
            let models = load_models(&model)?;
            let docs = read_corpus(&input)?;
            let schedule = InferenceSchedule {
                steps,
                lr_start: lr,
                lr_min,
                seed,
                tolerance,
                zero_on_empty: true,
            };
            let vectors = infer_all(&models, &docs, &schedule, workers)?;
            write_vectors_file(&vectors, &out).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{} vectors of dimension {}", vectors.rows(), vectors.cols());
            Ok(())
        }
        Command::Classify {
            train_vec,
            train_labels,
            test_vec,
            test_labels,
            model,
            out,
            epochs,
            lr,
            l2,
            hidden,
            seed,
            early_stop,
        } => {
            let train = feature_set(&train_vec, &train_labels)?;
            let test = feature_set(&test_vec, &test_labels)?;
            if train.dim() != test.dim() {
                bail!("train vectors have {} columns, test vectors {}", train.dim(), test.dim());
            }
            let (train_err, test_err) = match model {
                ClassifierKind::Logreg => {
                    let params = LogRegParams {
                        epochs,
                        seed,
                        lr: lr.unwrap_or(0.1),
                        l2: l2.unwrap_or(1e-4),
                        ..LogRegParams::default()
                    };
                    let clf = match early_stop {
                        Some(patience) => {
                            let (fit, val) = split_tail(&train)?;
                            train_logreg_early_stop(&fit, &val, &params, patience)?
                        }
                        None => train_logreg(&train, &params)?,
                    };
                    errors(&clf, &train, &test)
                }
                ClassifierKind::Mlp => {
                    if early_stop.is_some() {
                        return Err(usage("--early-stop applies to logreg only"));
                    }
                    let params = MlpParams {
                        hidden,
                        epochs,
                        seed,
                        lr: lr.unwrap_or(0.05),
                        l2: l2.unwrap_or(0.0),
                    };
                    let clf = train_mlp(&train, &params)?;
                    errors(&clf, &train, &test)
                }
            };
            let mut w = BufWriter::new(create(&out)?);
            writeln!(w, "split\terror_rate")?;
            writeln!(w, "train\t{train_err:.6}")?;
            writeln!(w, "test\t{test_err:.6}")?;
            w.flush()?;
            println!("test error rate {test_err:.4}");
            Ok(())
        }
        Command::EvalTriplet {
            method,
            corpus,
            triplets,
            out,
            model,
            metric,
            steps,
            seed,
            proj_dim,
            lambda,
            wb_epochs,
            wb_lr,
        } => {
            let docs = read_corpus(&corpus)?;
            let set = TripletSet::read(BufReader::new(open(&triplets)?))?;
            if let Some(&bad) = set
                .all()
                .flat_map(|t| [t.anchor, t.positive, t.negative])
                .find(|&i| i >= docs.len())
                .as_ref()
            {
                bail!("triplet refers to document {bad} but the corpus has {}", docs.len());
            }
            let metric = match metric {
                MetricArg::Cosine => Distance::Cosine,
                MetricArg::Euclidean => Distance::Euclidean,
            };
            let errs = match method {
                Method::TfIdfUnigram | Method::TfIdfBigram | Method::WeightedBigram => {
                    if !model.is_empty() {
                        return Err(usage(format!("--model is not used by {method}")));
                    }
                    if matches!(metric, Distance::Euclidean) {
                        eprintln!("note: lexical methods always use cosine distance");
                    }
                    let params = WeightedBigramParams {
                        proj_dims: proj_dim,
                        lambdas: lambda,
                        epochs: wb_epochs,
                        lr: wb_lr,
                        seed,
                    };
                    evaluate_lexical(method, &docs, &set, &params)?
                }
                Method::VectorAverage | Method::ParagraphVector => {
                    if model.is_empty() {
                        return Err(usage(format!("{method} needs --model")));
                    }
                    let models = load_models(&model)?;
                    let blocks: Vec<DenseMatrix<f32>> = if method == Method::VectorAverage {
                        models.iter().map(|m| vector_average_features(m, &docs)).collect()
                    } else {
                        let schedule = InferenceSchedule {
                            steps,
                            seed,
                            zero_on_empty: true,
                            ..InferenceSchedule::default()
                        };
                        models
                            .iter()
                            .map(|m| paragraph_features(m, &docs, &schedule))
                            .collect::<Result<_>>()?
                    };
                    let features = concat(blocks)?;
                    split_errors(&features, &set, metric)
                }
            };
            write_split_report(&out, &errs)?;
            println!("{method}\ttest error rate {:.4}", errs.test);
            Ok(())
        }
        Command::SynthTriplets {
            topics,
            docs_per_topic,
            noise,
            seed,
            triplets,
            vocab_per_topic,
            shared_vocab,
            doc_len,
            focus,
            out_corpus,
            out_triplets,
            out_labels,
        } => {
            if !(0.0..=1.0).contains(&noise) {
                return Err(usage("--noise must lie in [0, 1]"));
            }
            let params = SynthParams {
                topics,
                docs_per_topic,
                vocab_per_topic,
                shared_vocab,
                doc_len,
                noise,
                focus,
                seed,
            };
            let (corpus, set) = synth_triplets(&params, triplets)?;
            let mut w = BufWriter::new(create(&out_corpus)?);
            for doc in &corpus.docs {
                writeln!(w, "{}", doc.join(" "))?;
            }
            w.flush()?;
            let mut w = BufWriter::new(create(&out_triplets)?);
            set.write(&mut w)?;
            w.flush()?;
            if let Some(path) = out_labels {
                let mut w = BufWriter::new(create(&path)?);
                for t in &corpus.topics {
                    writeln!(w, "{t}")?;
                }
                w.flush()?;
            }
            eprintln!(
                "{} documents, {} train / {} validation / {} test triplets",
                corpus.docs.len(),
                set.train.len(),
                set.validation.len(),
                set.test.len()
            );
            Ok(())
        }
        Command::Nearest {
            model,
            word,
            paragraph,
            text,
            k,
            space,
            seed,
        } => {
            let m: Model = load_model(&model)?;
            let space = match space {
                SpaceArg::Words => Space::Words,
                SpaceArg::Paragraphs => Space::Paragraphs,
            };
            let inferred;
            let query = match (&word, paragraph, &text) {
                (Some(w), None, None) => Query::Word(w),
                (None, Some(p), None) => Query::Paragraph(p),
                (None, None, Some(t)) => {
                    let tokens = Tokenizer::default().tokenize(t);
                    let schedule = InferenceSchedule {
                        seed,
                        ..InferenceSchedule::default()
                    };
                    inferred = paravec::infer::infer_vector(&m, &tokens, &schedule)?
                        .into_iter()
                        .map(f64::from)
                        .collect::<Vec<_>>();
                    Query::Vector(&inferred)
                }
                _ => return Err(usage("give exactly one of --word, --paragraph or --text")),
            };
            print_neighbors(&m, space, &nearest(&m, &query, k, space)?)
        }
        Command::Analogy { model, a, b, c, k } => {
            let m: Model = load_model(&model)?;
            print_neighbors(&m, Space::Words, &analogy(&m, &a, &b, &c, k)?)
        }
        Command::Inspect { model } => {
            let bytes = std::fs::read(&model).with_context(|| format!("reading {}", model.display()))?;
            let (header, _) = read_header(&bytes)?;
            let c = &header.config;
            let mut out = io::stdout().lock();
            writeln!(out, "mode\t{}", c.mode)?;
            writeln!(out, "composition\t{}", c.composition)?;
            writeln!(out, "output_layer\t{}", c.output_layer)?;
            writeln!(out, "use_bias\t{}", c.use_bias)?;
            writeln!(out, "symmetric\t{}", c.symmetric)?;
            writeln!(out, "dim_word\t{}", c.dim_word)?;
            writeln!(out, "dim_para\t{}", c.dim_para)?;
            writeln!(out, "window\t{}", c.window)?;
            writeln!(out, "hidden_dim\t{}", c.hidden_dim())?;
            writeln!(out, "M\t{}", header.vocab.len())?;
            writeln!(out, "N\t{}", header.n_paragraphs)?;
            writeln!(out, "file_bytes\t{}", bytes.len())?;
            Ok(())
        }
    }
}

fn train_cmd(args: TrainArgs) -> Result<()> {
    let docs = read_corpus(&args.corpus)?;
    let vocab = Vocabulary::build(&docs, args.min_count)?;
    let corpus = Corpus::encode(&docs, &vocab);
    let schedule = TrainSchedule {
        epochs: args.epochs,
        lr_start: args.lr,
        lr_min: args.lr_min,
        workers: args.workers,
        seed: args.seed,
        shuffle: !args.no_shuffle,
        ..TrainSchedule::default()
    };
    let base = ModelConfig {
        dim_word: args.dim_word,
        dim_para: args.dim_para,
        window: args.window,
        composition: match args.composition {
            CompositionArg::Concat => Composition::Concat,
            CompositionArg::Average => Composition::Average,
        },
        output_layer: match args.output_layer {
            OutputArg::Hierarchical => OutputLayer::Hierarchical,
            OutputArg::Full => OutputLayer::Full,
        },
        symmetric: args.symmetric,
        ..ModelConfig::default()
    };
    let dm = ModelConfig {
        mode: paravec::Mode::Dm,
        ..base.clone()
    };
    let dbow = ModelConfig {
        mode: paravec::Mode::Dbow,
        ..base
    };
    let jobs: Vec<(ModelConfig, PathBuf)> = match args.mode {
        TrainMode::PvDm => vec![(dm, args.out.clone())],
        TrainMode::PvDbow => vec![(dbow, args.out.clone())],
        TrainMode::Both => vec![(dm, with_suffix(&args.out, "dm")), (dbow, with_suffix(&args.out, "dbow"))],
    };
    eprintln!(
        "{} documents, {} tokens, {} words",
        corpus.len(),
        corpus.total_tokens(),
        vocab.n_words()
    );
    for (config, path) in jobs {
        config.validate().map_err(|e| usage(e.to_string()))?;
        eprintln!("training {} -> {}", config.mode, path.display());
        let model = Model::new(config, vocab.clone(), corpus.len().max(1), args.seed)?;
        let mut stdout = io::stdout().lock();
        train_with(&model, &corpus, &schedule, |stats| {
            let _ = writeln!(stdout, "{stats}");
        })?;
        save_model_file(&model, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn read_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let tokenizer = Tokenizer::default();
    let docs = if path.as_os_str() == "-" {
        read_documents(io::stdin().lock(), &tokenizer)?
    } else {
        read_documents(BufReader::new(open(path)?), &tokenizer)?
    };
    Ok(docs)
}

fn load_model(path: &Path) -> Result<Model> {
    load_model_file(path).with_context(|| format!("loading {}", path.display()))
}

fn load_models(paths: &[PathBuf]) -> Result<Vec<Model>> {
    paths.iter().map(|p| load_model(p)).collect()
}

fn infer_all(models: &[Model], docs: &[Vec<String>], schedule: &InferenceSchedule, workers: usize) -> Result<DenseMatrix<f32>> {
    let mut blocks = Vec::with_capacity(models.len());
    for m in models {
        let batch = infer_batch(m, docs, schedule, workers);
        if let Some((i, e)) = batch.failures.first() {
            bail!("document {i}: {e}");
        }
        blocks.push(batch.vectors);
    }
    concat(blocks)
}

/// Trained paragraph vectors when the model was fitted on exactly these
/// documents, inferred vectors otherwise.
fn paragraph_features(model: &Model, docs: &[Vec<String>], schedule: &InferenceSchedule) -> Result<DenseMatrix<f32>> {
    if model.n_paragraphs() == docs.len() {
        let p = model.config().dim_para;
        return Ok(DenseMatrix::from_vec(docs.len(), p, model.paragraphs().to_vec())?);
    }
    infer_all(std::slice::from_ref(model), docs, schedule, 1)
}

fn concat(blocks: Vec<DenseMatrix<f32>>) -> Result<DenseMatrix<f32>> {
    let mut iter = blocks.into_iter();
    let first = iter.next().context("no feature blocks")?;
    iter.try_fold(first, |acc, b| Ok(paravec::classify::combine_features(&acc, &b)?))
}

fn feature_set(vec_path: &Path, label_path: &Path) -> Result<FeatureSet<f32>> {
    let vectors = read_vectors_file(vec_path).with_context(|| format!("reading {}", vec_path.display()))?;
    let labels = paravec::corpus::read_labels(BufReader::new(open(label_path)?))?;
    FeatureSet::new(vectors, labels).with_context(|| format!("pairing {} with {}", vec_path.display(), label_path.display()))
}

fn split_tail(data: &FeatureSet<f32>) -> Result<(FeatureSet<f32>, FeatureSet<f32>)> {
    let n = data.len();
    let n_val = (n / 10).max(1);
    if n_val >= n {
        bail!("too few training rows to hold out a validation split");
    }
    let fit: Vec<usize> = (0..n - n_val).collect();
    let val: Vec<usize> = (n - n_val..n).collect();
    let take = |idx: &[usize]| {
        FeatureSet::new(
            data.features().select_rows(idx),
            idx.iter().map(|&i| data.labels()[i]).collect(),
        )
    };
    Ok((take(&fit)?, take(&val)?))
}

fn errors<C: Classifier<f32>>(clf: &C, train: &FeatureSet<f32>, test: &FeatureSet<f32>) -> (f64, f64) {
    (evaluate(clf, train), evaluate(clf, test))
}

fn write_split_report(path: &Path, e: &SplitErrors) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    writeln!(w, "split\terror_rate")?;
    writeln!(w, "train\t{:.6}", e.train)?;
    writeln!(w, "validation\t{:.6}", e.validation)?;
    writeln!(w, "test\t{:.6}", e.test)?;
    w.flush()?;
    Ok(())
}

fn print_neighbors(model: &Model, space: Space, hits: &[Neighbor]) -> Result<()> {
    let mut out = io::stdout().lock();
    for h in hits {
        match space {
            Space::Words => writeln!(out, "{}\t{:.6}", model.vocab().surface(h.id), h.similarity)?,
            Space::Paragraphs => writeln!(out, "{}\t{:.6}", h.id, h.similarity)?,
        }
    }
    Ok(())
}
