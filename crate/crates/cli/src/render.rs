//! Text, CSV, and JSON rendering of summaries, comparisons, and predictions.
//!
//! Text output rounds accuracy to one decimal and errors to four; CSV and
//! JSON carry full precision.

use std::fmt::Write as _;
use std::path::Path;

use credtree::dataset::Dataset;
use credtree::evaluation::{ClassifierSpec, Comparison, Model, RankingBasis, RunReport, TestMode};
use credtree::metrics::{ConfusionMatrix, EvalSummary, Prediction};
use serde_json::{json, Value};

use crate::Format;

pub struct RunHeader<'a> {
    pub data: &'a Path,
    pub seed: u64,
}

impl RunHeader<'_> {
    fn line(&self) -> String {
        format!("data: {}  seed: {}", self.data.display(), self.seed)
    }
}

const CSV_COLUMNS: &str = "classifier,mode,folds,seed,correct,incorrect,accuracy,mae,rmse,build_time_sec";

fn mode_fields(mode: TestMode) -> (Value, Value) {
    match mode {
        TestMode::TrainingSet => (json!("training"), Value::Null),
        TestMode::CrossValidation { k, seed } => (json!("cv"), json!({ "folds": k, "seed": seed })),
    }
}

fn summary_json(summary: &EvalSummary) -> Value {
    serde_json::to_value(summary).expect("summary serializes")
}

fn csv_row(name: &str, mode: TestMode, s: &EvalSummary) -> String {
    let (mode, folds, seed) = match mode {
        TestMode::TrainingSet => ("training", String::new(), String::new()),
        TestMode::CrossValidation { k, seed } => ("cv", k.to_string(), seed.to_string()),
    };
    format!(
        "{name},{mode},{folds},{seed},{},{},{},{},{},{}",
        s.correct, s.incorrect, s.accuracy, s.mae, s.rmse, s.build_time
    )
}

pub fn evaluation(
    format: Format,
    header: &RunHeader,
    spec: &ClassifierSpec,
    mode: TestMode,
    s: &EvalSummary,
) -> String {
    match format {
        Format::Json => {
            let mut value = summary_json(s);
            let (m, cv) = mode_fields(mode);
            let obj = value.as_object_mut().expect("object");
            obj.insert("classifier".into(), json!(spec.name()));
            obj.insert("mode".into(), m);
            obj.insert("cross_validation".into(), cv);
            obj.insert("seed".into(), json!(header.seed));
            format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
        }
        Format::Csv => {
            let mut out = format!("{CSV_COLUMNS}\n{}\n\n", csv_row(spec.name(), mode, s));
            out.push_str(&confusion_csv(&s.confusion));
            out
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "=== {spec} | {mode} ===");
            let _ = writeln!(out, "{}", header.line());
            let _ = writeln!(out);
            let total = s.total() as f64;
            let _ = writeln!(
                out,
                "Correctly Classified Instances    {:>6}  {:>6.1} %",
                s.correct, s.accuracy
            );
            let _ = writeln!(
                out,
                "Incorrectly Classified Instances  {:>6}  {:>6.1} %",
                s.incorrect,
                100.0 * s.incorrect as f64 / total
            );
            let _ = writeln!(out, "Mean Absolute Error               {:>14.4}", s.mae);
            let _ = writeln!(out, "Root Mean Squared Error           {:>14.4}", s.rmse);
            let _ = writeln!(out, "Time Taken to Build Model (Sec)   {:>14.2}", s.build_time);
            let _ = writeln!(out);
            out.push_str(&confusion_text(&s.confusion));
            out
        }
    }
}

fn confusion_text(m: &ConfusionMatrix) -> String {
    let width = m
        .classes
        .iter()
        .map(String::len)
        .chain(["Predicted (Total)".len()])
        .max()
        .unwrap_or(0);
    let mut out = String::from("Confusion Matrix (rows actual, columns predicted)\n");
    let _ = write!(out, "{:width$}", "");
    for c in &m.classes {
        let _ = write!(out, "  {c:>8}");
    }
    let _ = writeln!(out, "  {:>14}", "Actual (Total)");
    for (c, row) in m.classes.iter().zip(&m.counts) {
        let _ = write!(out, "{c:width$}");
        for v in row {
            let _ = write!(out, "  {v:>8}");
        }
        let _ = writeln!(out, "  {:>14}", row.iter().sum::<u64>());
    }
    let _ = write!(out, "{:width$}", "Predicted (Total)");
    for t in m.predicted_totals() {
        let _ = write!(out, "  {t:>8}");
    }
    let _ = writeln!(out, "  {:>14}", m.total());
    out
}

fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut out = format!("actual,{},actual_total\n", m.classes.join(","));
    for (c, row) in m.classes.iter().zip(&m.counts) {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "{c},{},{}", cells.join(","), row.iter().sum::<u64>());
    }
    let totals: Vec<String> = m.predicted_totals().iter().map(u64::to_string).collect();
    let _ = writeln!(out, "predicted_total,{},{}", totals.join(","), m.total());
    out
}

fn basis_name(basis: RankingBasis) -> &'static str {
    match basis {
        RankingBasis::MeanCvAccuracy => "mean CV accuracy",
        RankingBasis::TrainingAccuracy => "training-set accuracy (no CV modes)",
    }
}

fn basis_accuracy(report: &RunReport, basis: RankingBasis) -> f64 {
    match basis {
        RankingBasis::MeanCvAccuracy => report.mean_cv_accuracy.unwrap_or(f64::NAN),
        RankingBasis::TrainingAccuracy => report.result(TestMode::TrainingSet).map_or(f64::NAN, |s| s.accuracy),
    }
}

pub fn ranking_line(c: &Comparison) -> String {
    let order: Vec<String> = c
        .ranking
        .iter()
        .enumerate()
        .map(|(place, &i)| {
            let r = &c.reports[i];
            format!(
                "{}. {} ({:.2}%)",
                place + 1,
                r.classifier.name(),
                basis_accuracy(r, c.basis)
            )
        })
        .collect();
    format!(
        "ranking by {}: {}; best: {}",
        basis_name(c.basis),
        order.join("  "),
        c.winner().classifier.name()
    )
}

fn rank_of(c: &Comparison, report: &RunReport) -> usize {
    let index = c
        .reports
        .iter()
        .position(|r| std::ptr::eq(r, report))
        .expect("report belongs to comparison");
    c.ranking.iter().position(|&i| i == index).expect("ranked") + 1
}

/// One header-bearing CSV table for a single classifier.
pub fn comparison_csv_block(c: &Comparison, report: &RunReport) -> String {
    let mut out = format!("{CSV_COLUMNS},rank\n");
    let rank = rank_of(c, report);
    for r in &report.results {
        let _ = writeln!(out, "{},{rank}", csv_row(report.classifier.name(), r.mode, &r.summary));
    }
    out
}

pub fn comparison(format: Format, header: &RunHeader, c: &Comparison) -> String {
    match format {
        Format::Json => {
            let reports: Vec<Value> = c
                .reports
                .iter()
                .map(|r| {
                    let results: Vec<Value> = r
                        .results
                        .iter()
                        .map(|m| {
                            let mut v = summary_json(&m.summary);
                            let (mode, cv) = mode_fields(m.mode);
                            let obj = v.as_object_mut().expect("object");
                            obj.insert("mode".into(), mode);
                            obj.insert("cross_validation".into(), cv);
                            v
                        })
                        .collect();
                    json!({
                        "classifier": r.classifier.name(),
                        "description": r.classifier.to_string(),
                        "rank": rank_of(c, r),
                        "mean_cv_accuracy": r.mean_cv_accuracy,
                        "results": results,
                    })
                })
                .collect();
            let ranking: Vec<&str> = c.ranking.iter().map(|&i| c.reports[i].classifier.name()).collect();
            let value = json!({
                "seed": header.seed,
                "ranking_basis": basis_name(c.basis),
                "ranking": ranking,
                "reports": reports,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
        }
        Format::Csv => {
            let blocks: Vec<String> = c.reports.iter().map(|r| comparison_csv_block(c, r)).collect();
            blocks.join("\n")
        }
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "{}", header.line());
            for r in &c.reports {
                let _ = writeln!(out);
                let _ = writeln!(out, "=== {} ===", r.classifier);
                let _ = writeln!(
                    out,
                    "{:<14} {:>8} {:>10} {:>9} {:>8} {:>8} {:>10}",
                    "Test Mode", "Correct", "Incorrect", "Accuracy", "MAE", "RMSE", "Build (s)"
                );
                for m in &r.results {
                    let s = &m.summary;
                    let _ = writeln!(
                        out,
                        "{:<14} {:>8} {:>10} {:>8.1}% {:>8.4} {:>8.4} {:>10.2}",
                        m.mode.to_string(),
                        s.correct,
                        s.incorrect,
                        s.accuracy,
                        s.mae,
                        s.rmse,
                        s.build_time
                    );
                }
                if let Some(mean) = r.mean_cv_accuracy {
                    let _ = writeln!(out, "mean CV accuracy: {mean:.2}%");
                }
            }
            let _ = writeln!(out);
            let _ = writeln!(out, "{}", ranking_line(c));
            out
        }
    }
}

pub fn predictions(format: Format, model: &Model, data: &Dataset) -> String {
    let schema = model.schema();
    let classes = schema.class_names();
    let rows: Vec<(Option<usize>, Prediction)> = data
        .instances()
        .iter()
        .map(|inst| {
            (
                inst.class,
                Prediction::new(model.predict_distribution(inst), inst.class.unwrap_or(0)),
            )
        })
        .collect();
    let label = |c: Option<usize>| c.map_or("?", |c| classes[c].as_str());
    match format {
        Format::Json => {
            let records: Vec<Value> = rows
                .iter()
                .enumerate()
                .map(|(i, (actual, p))| {
                    json!({
                        "index": i,
                        "actual": actual.map(|c| classes[c].clone()),
                        "predicted": classes[p.predicted],
                        "probabilities": p.distribution,
                    })
                })
                .collect();
            let value = json!({ "classes": classes, "predictions": records });
            format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
        }
        Format::Csv => {
            let mut out = format!("index,actual,predicted,{}\n", classes.join(","));
            for (i, (actual, p)) in rows.iter().enumerate() {
                let probs: Vec<String> = p.distribution.iter().map(f64::to_string).collect();
                let _ = writeln!(
                    out,
                    "{i},{},{},{}",
                    label(*actual),
                    classes[p.predicted],
                    probs.join(",")
                );
            }
            out
        }
        Format::Text => {
            let mut out = format!("{:>6}  {:<10} {:<10}", "index", "actual", "predicted");
            for c in classes {
                let _ = write!(out, " {:>10}", format!("p({c})"));
            }
            out.push('\n');
            for (i, (actual, p)) in rows.iter().enumerate() {
                let _ = write!(out, "{i:>6}  {:<10} {:<10}", label(*actual), classes[p.predicted]);
                for q in &p.distribution {
                    let _ = write!(out, " {q:>10.4}");
                }
                out.push('\n');
            }
            out
        }
    }
}
