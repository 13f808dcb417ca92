use std::io::{self, Write};
use std::path::Path;

use plotqa_core::corpus::{dataset_stats, write_normalized, DataFormat, StatsReport};
use plotqa_core::eval::{emit_report, markdown_table, write_predictions};
use plotqa_core::selector::{enforce_token_budget, write_contexts, ContextRecord, Vocabulary};
use plotqa_core::{Dataset, Error, Result, RunConfig, SelectedContext, Split};

const ALL_SPLITS: [Split; 3] = [Split::Train, Split::Val, Split::Test];

fn load_split(cfg: &RunConfig, split: Split) -> Result<Dataset> {
    let mut data = cfg.data.clone();
    data.split = split;
    let ds = data.load()?;
    log::info!("loaded {} questions over {} documents ({split})", ds.items().len(), ds.num_documents());
    Ok(ds)
}

fn stdout_err(e: io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("json encoding: {e}")))?;
    println!("{text}");
    Ok(())
}

pub fn ingest(cfg: &RunConfig, split: Option<Split>, out: &Path) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.data.format = DataFormat::MovieqaOfficial;
    let splits = split.map_or(ALL_SPLITS.to_vec(), |s| vec![s]);
    for s in splits {
        let ds = load_split(&cfg, s)?;
        let dir = out.join(s.as_str());
        std::fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let (docs, items) = write_normalized(&ds, &dir)?;
        println!(
            "{s}: {} questions, {} documents -> {}, {}",
            ds.items().len(),
            ds.num_documents(),
            items.display(),
            docs.display()
        );
    }
    Ok(())
}

/// Official data carries all splits, so every split is reported unless one
/// was asked for; a normalized file holds a single split.
pub fn stats(cfg: &RunConfig, split_given: bool, json: bool) -> Result<()> {
    let splits = if cfg.data.format == DataFormat::MovieqaOfficial && !split_given {
        ALL_SPLITS.to_vec()
    } else {
        vec![cfg.data.split]
    };
    let reports = splits
        .into_iter()
        .map(|s| load_split(cfg, s).map(|ds| dataset_stats(&ds)))
        .collect::<Result<Vec<_>>>()?;
    if json {
        print_json(&reports)
    } else {
        print!("{}", StatsReport::table(&reports));
        Ok(())
    }
}

pub fn select(cfg: &RunConfig, qid: Option<&str>) -> Result<()> {
    let ds = cfg.data.load()?;
    let pipeline = cfg.build_pipeline()?;
    let vocab = Vocabulary::from_dataset(&ds);
    let items = match qid {
        Some(q) => vec![ds.item(q)?],
        None => ds.items().iter().collect(),
    };
    let contexts = items
        .into_iter()
        .map(|item| {
            let doc = ds.document_of(item);
            let selection = pipeline.selector().select(doc, item)?;
            enforce_token_budget(&item.qid, &selection.selected, doc, &cfg.pipeline.budget, &vocab)
        })
        .collect::<Result<Vec<SelectedContext>>>()?;

    match &cfg.output.contexts {
        Some(path) => {
            write_contexts(path, &contexts)?;
            eprintln!("wrote {} contexts to {}", contexts.len(), path.display());
        }
        None => {
            let mut out = io::stdout().lock();
            for ctx in &contexts {
                let line = serde_json::to_string(&ContextRecord::from(ctx))
                    .map_err(|e| Error::InvalidInput(format!("json encoding: {e}")))?;
                writeln!(out, "{line}").map_err(stdout_err)?;
            }
        }
    }
    Ok(())
}

pub fn answer(cfg: &RunConfig, qid: &str, json: bool) -> Result<()> {
    let ds = cfg.data.load()?;
    let pipeline = cfg.build_pipeline()?;
    let item = ds.item(qid)?;
    let out = pipeline.run_item(ds.document_of(item), item, &Vocabulary::from_dataset(&ds))?;
    if json {
        return print_json(&serde_json::json!({
            "qid": out.qid,
            "predicted_index": out.predicted,
            "predicted_choice": item.choices[out.predicted],
            "probabilities": out.distribution.probabilities,
            "correct_index": item.correct_index,
            "selected_indices": out.context.sentence_indices(),
        }));
    }
    println!("{}: {}", item.qid, item.question);
    for (i, (choice, p)) in item.choices.iter().zip(&out.distribution.probabilities).enumerate() {
        let mark = if i == out.predicted { '>' } else { ' ' };
        println!("{mark} [{i}] {p:.4}  {choice}");
    }
    if let Some(c) = item.correct_index {
        println!("{}", if c == out.predicted { "correct" } else { "wrong" });
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, json: bool) -> Result<()> {
    let ds = cfg.data.load()?;
    let pipeline = cfg.build_pipeline()?;
    let report = plotqa_core::evaluate(&ds, &pipeline, cfg.jobs)?;

    if let Some(path) = &cfg.output.report {
        emit_report(&report, cfg.output.format, path)?;
        eprintln!("wrote report to {}", path.display());
    }
    if let Some(path) = &cfg.output.predictions {
        write_predictions(&report, path)?;
        eprintln!("wrote {} predictions to {}", report.per_item.len(), path.display());
    }
    if json {
        return print_json(&report);
    }
    match report.accuracy {
        Some(a) => println!(
            "{} {}: accuracy {:.2}% ({}/{})",
            report.model,
            report.split,
            a * 100.0,
            report.num_correct,
            report.num_items
        ),
        None => println!("{} {}: no labeled items", report.model, report.split),
    }
    if report.num_unlabeled > 0 {
        println!("unlabeled: {}", report.num_unlabeled);
    }
    if let Some(r) = report.selection_recall {
        println!("selection recall: {r:.4}");
    }
    print!("{}", markdown_table(std::slice::from_ref(&report)));
    Ok(())
}

pub fn trace(cfg: &RunConfig, qid: &str, json: bool) -> Result<()> {
    let ds = cfg.data.load()?;
    let pipeline = cfg.build_pipeline()?;
    let t = plotqa_core::trace(qid, &ds, &pipeline)?;
    if json {
        print_json(&t)
    } else {
        print!("{t}");
        Ok(())
    }
}
