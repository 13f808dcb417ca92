//! `plotqa`: ingest, inspect and evaluate multiple-choice QA over long plots.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use plotqa_core::corpus::DataFormat;
use plotqa_core::eval::ReportFormat;
use plotqa_core::{Error, QueryMode, RunConfig, Split};

#[derive(Debug, Parser)]
#[command(name = "plotqa", version, about = "Retrieval-gated multiple-choice QA over long documents")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Log progress to stderr (-vv for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct DataArgs {
    /// Dataset root directory.
    #[arg(long, value_name = "DIR")]
    data: Option<PathBuf>,
    /// normalized_jsonl or movieqa_official.
    #[arg(long)]
    format: Option<DataFormat>,
    /// train, val or test.
    #[arg(long)]
    split: Option<Split>,
    /// Items file (or qa.json), overriding the dataset root.
    #[arg(long, value_name = "FILE")]
    qa: Option<PathBuf>,
    /// Documents file (or plot directory), overriding the dataset root.
    #[arg(long, value_name = "PATH")]
    docs: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct PipelineArgs {
    /// Sentences selected per question.
    #[arg(long)]
    k: Option<usize>,
    /// Token budget of the reader input.
    #[arg(long)]
    max_tokens: Option<usize>,
    /// Reader id.
    #[arg(long)]
    reader: Option<String>,
    /// concat_all or per_answer.
    #[arg(long)]
    query_mode: Option<QueryMode>,
    /// Softmax temperature.
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert official MovieQA data to normalized JSONL, one directory per split.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Print dataset statistics.
    Stats {
        #[command(flatten)]
        data: DataArgs,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Export the selected, budgeted context of every question.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Restrict to one question.
        #[arg(long)]
        qid: Option<String>,
        /// JSONL output file; stdout when absent.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Answer a single question.
    Answer {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        qid: String,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the pipeline over a split.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Worker threads; all cores by default.
        #[arg(long)]
        jobs: Option<usize>,
        /// Report file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// json, csv or markdown_table.
        #[arg(long)]
        report_format: Option<ReportFormat>,
        /// Write `{qid, predicted_index}` lines here.
        #[arg(long, value_name = "FILE")]
        predictions: Option<PathBuf>,
        /// Print the JSON report to stdout.
        #[arg(long)]
        json: bool,
    },
    /// Show the evidence chain behind one answer.
    Trace {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long)]
        qid: String,
        #[arg(long)]
        json: bool,
    },
}

impl DataArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let d = &mut cfg.data;
        if let Some(p) = &self.data {
            d.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            d.format = f;
        }
        if let Some(s) = self.split {
            d.split = s;
        }
        if let Some(q) = &self.qa {
            d.qa = Some(q.clone());
        }
        if let Some(p) = &self.docs {
            d.docs = Some(p.clone());
        }
    }
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.pipeline;
        if let Some(k) = self.k {
            p.budget.k = k;
        }
        if let Some(m) = self.max_tokens {
            p.budget.max_tokens = m;
        }
        if let Some(r) = &self.reader {
            p.reader = r.clone();
            p.ensemble = None;
        }
        if let Some(q) = self.query_mode {
            p.query_mode = q;
        }
        if let Some(t) = self.temperature {
            p.temperature = t;
        }
    }
}

fn load_config(path: Option<&PathBuf>) -> plotqa_core::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    Ok(cfg)
}

fn run(cli: Cli) -> plotqa_core::Result<()> {
    let mut cfg = load_config(cli.config.as_ref())?;
    match cli.command {
        Command::Ingest { data, out } => {
            data.apply(&mut cfg);
            commands::ingest(&cfg, data.split, &out)
        }
        Command::Stats { data, json } => {
            data.apply(&mut cfg);
            commands::stats(&cfg, data.split.is_some(), json)
        }
        Command::Select {
            data,
            pipeline,
            qid,
            out,
        } => {
            data.apply(&mut cfg);
            pipeline.apply(&mut cfg);
            if let Some(o) = out {
                cfg.output.contexts = Some(o);
            }
            commands::select(&cfg, qid.as_deref())
        }
        Command::Answer {
            data,
            pipeline,
            qid,
            json,
        } => {
            data.apply(&mut cfg);
            pipeline.apply(&mut cfg);
            commands::answer(&cfg, &qid, json)
        }
        Command::Eval {
            data,
            pipeline,
            jobs,
            out,
            report_format,
            predictions,
            json,
        } => {
            data.apply(&mut cfg);
            pipeline.apply(&mut cfg);
            if jobs.is_some() {
                cfg.jobs = jobs;
            }
            if let Some(o) = out {
                cfg.output.report = Some(o);
            }
            if let Some(f) = report_format {
                cfg.output.format = f;
            }
            if let Some(p) = predictions {
                cfg.output.predictions = Some(p);
            }
            commands::eval(&cfg, json)
        }
        Command::Trace {
            data,
            pipeline,
            qid,
            json,
        } => {
            data.apply(&mut cfg);
            pipeline.apply(&mut cfg);
            commands::trace(&cfg, &qid, json)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_user_error() {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::new().parse_filters(level).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
