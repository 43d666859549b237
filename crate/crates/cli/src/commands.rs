use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use twolevel::dataset::{
    binarize as binarize_table, load_csv, Binarizer, ColumnKind, ColumnSpec, LabelSpec, RawTable,
    Schema,
};
use twolevel::eval::{cross_validate_table, tune_theta, zero_one_error, CvOptions, ThetaChoice};
use twolevel::rule::{format_rule, predict as predict_rule, RuleMatrix};
use twolevel::twolevel::{fit, LearnerConfig};

use crate::args::{BinarizeArgs, CvArgs, InputArgs, LearnArgs, PredictArgs, TrainArgs};

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("write: cannot write {}", path.display()))
}

fn schema(input: &InputArgs) -> Result<Schema> {
    let base = match &input.schema {
        Some(path) => Some(Schema::from_json_file(path).context("parse: cannot read schema")?),
        None => None,
    };
    let label = match (&input.label, base.as_ref().and_then(|s| s.label.clone())) {
        (Some(column), from_schema) => {
            let positive = input
                .positive
                .clone()
                .or_else(|| from_schema.as_ref().map(|l| l.positive.clone()));
            let Some(positive) = positive else {
                bail!("parse: --positive is required with --label");
            };
            Some(LabelSpec {
                column: column.clone(),
                positive,
                negative: input.negative.clone(),
            })
        }
        (None, Some(mut l)) => {
            if let Some(p) = &input.positive {
                l.positive = p.clone();
            }
            if input.negative.is_some() {
                l.negative = input.negative.clone();
            }
            Some(l)
        }
        (None, None) => None,
    };
    if label.is_none() {
        bail!("parse: no label column; pass --label and --positive or a schema with a label");
    }

    let mut explicit: Vec<ColumnSpec> = base.map(|s| s.columns).unwrap_or_default();
    for (names, kind) in [
        (&input.continuous, ColumnKind::Continuous),
        (&input.binary, ColumnKind::Binary),
        (&input.categorical, ColumnKind::Categorical),
    ] {
        for name in names {
            explicit.retain(|c| &c.name != name);
            explicit.push(ColumnSpec {
                name: name.clone(),
                kind,
            });
        }
    }
    explicit.retain(|c| !input.ignore.contains(&c.name));
    if input.schema.is_some()
        && input.continuous.is_empty()
        && input.binary.is_empty()
        && input.categorical.is_empty()
    {
        // A schema file lists every column to use.
        return Ok(Schema::new(explicit, label));
    }
    Schema::infer(&input.input, label, &explicit, &input.ignore).context("parse: cannot read input")
}

fn load(input: &InputArgs) -> Result<RawTable> {
    let schema = schema(input)?;
    log::info!("{} feature columns", schema.columns.len());
    load_csv(&input.input, &schema).context("parse: cannot load input")
}

fn learner(learn: &LearnArgs) -> LearnerConfig {
    LearnerConfig {
        clauses: learn.clauses as usize,
        theta: learn.theta.unwrap_or(0.0),
        max_iters: learn.max_iters as usize,
        algorithm: learn.algorithm.into(),
        polarity: learn.polarity.into(),
        seed: learn.seed,
        ..LearnerConfig::default()
    }
}

pub fn binarize(args: &BinarizeArgs) -> Result<()> {
    let table = load(&args.input)?;
    let data = binarize_table(&table, args.input.thresholds as usize).context("binarize")?;
    let mut out = csv_line(
        data.feature_names()[1..]
            .iter()
            .map(String::as_str)
            .chain(["label"]),
    );
    for (row, y) in data.rows().zip(data.labels()) {
        let cells: Vec<String> = row[1..].iter().chain([y]).map(u8::to_string).collect();
        out.push_str(&csv_line(cells.iter().map(String::as_str)));
    }
    write_file(&args.output, &out)?;
    if let Some(path) = &args.provenance {
        let json = serde_json::to_string_pretty(data.provenance()).context("write")?;
        write_file(path, &(json + "\n"))?;
    }
    eprintln!(
        "{} samples, {} binary features",
        data.n_samples(),
        data.width() - 1
    );
    Ok(())
}

fn csv_line<'a>(cells: impl Iterator<Item = &'a str>) -> String {
    let quoted: Vec<String> = cells
        .map(|c| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.to_string()
            }
        })
        .collect();
    quoted.join(",") + "\n"
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let table = load(&args.input)?;
    let data = binarize_table(&table, args.input.thresholds as usize).context("binarize")?;
    let mut cfg = learner(&args.learn);
    if args.learn.theta.is_none() {
        cfg.theta = tune_theta(&data, &cfg, &args.learn.grid, args.learn.inner_k as usize)
            .context("fit: theta tuning failed")?;
        eprintln!("tuned theta = {}", cfg.theta);
    }
    let (rule, trace) = fit(&data, &cfg).context("fit")?;
    let pred = predict_rule(&data, &rule).context("fit")?;
    let error = zero_one_error(&pred.labels, data.labels()).context("fit")?;

    write_file(&args.output, &(rule.to_json().context("write")? + "\n"))?;
    if let Some(path) = &args.trace {
        write_file(path, &(trace.to_json().context("write")? + "\n"))?;
    }
    print!("{}", format_rule(&rule));
    eprintln!(
        "training error {:.2}%, objective {}, {} iterations",
        100.0 * error,
        trace.final_objective,
        trace.iterations
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let rule = RuleMatrix::load(&args.rule).context("parse: cannot read rule")?;
    let binarizer = Binarizer::from_provenance(rule.provenance().to_vec()).context("parse")?;
    let schema = Schema::new(binarizer.input_columns(), None);
    let table = load_csv(&args.input, &schema).context("parse: input does not match the rule")?;
    let rows = binarizer.transform_rows(&table).context("binarize")?;
    let labels = rule
        .predict_rows(rows.iter().map(Vec::as_slice))
        .context("predict")?;
    let mut out = String::from("prediction\n");
    for y in labels {
        out.push_str(&format!("{y}\n"));
    }
    match &args.output {
        Some(path) => write_file(path, &out)?,
        None => std::io::stdout()
            .write_all(out.as_bytes())
            .context("write: stdout")?,
    }
    Ok(())
}

pub fn cv(args: &CvArgs) -> Result<()> {
    let table = load(&args.input)?;
    let cfg = learner(&args.learn);
    let opts = CvOptions {
        k: args.k as usize,
        inner_k: args.learn.inner_k as usize,
        theta: match args.learn.theta {
            Some(t) => ThetaChoice::Fixed(t),
            None => ThetaChoice::Tune(args.learn.grid.clone()),
        },
        seed: args.learn.seed,
        num_thresholds: args.input.thresholds as usize,
        timings: args.timings,
    };
    let (report, _) =
        cross_validate_table(&table, &cfg, &opts).context("fit: cross-validation failed")?;
    let text = report.render_table();
    if let Some(path) = &args.report {
        write_file(path, &report.to_json().context("write")?)?;
    }
    if let Some(path) = &args.table {
        write_file(path, &text)?;
    }
    print!("{text}");
    Ok(())
}
