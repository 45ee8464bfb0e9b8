//! CSV ingestion and serialization of surveys, counts, and curves.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::bindesign::DesignSweep;
use crate::bounds::BoundCurve;
use crate::calibrate::RmseCurve;
use crate::dataset::{Dataset, SurveyRecord};
use crate::error::{Error, Result};
use crate::scale::Score;
use crate::stats::CountVector;

pub const SCORE_COLUMN: &str = "score";
const RESERVED: [&str; 4] = ["id", SCORE_COLUMN, "unbiased_score", "self_category"];

/// Renders `x` with at most 12 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

/// A parsed survey plus any data-cleaning warnings.
#[derive(Debug, Clone)]
pub struct SurveyFile {
    pub dataset: Dataset,
    pub warnings: Vec<String>,
}

enum Column {
    Numeric {
        name: String,
        idx: usize,
        mean: f64,
    },
    Categorical {
        name: String,
        idx: usize,
        levels: Vec<String>,
    },
}

fn parse_score(text: &str, line: u64, column: &str) -> Result<Score> {
    let value: i64 = text.trim().parse().map_err(|_| Error::Row {
        line,
        message: format!("{column} `{text}` is not an integer"),
    })?;
    Score::new(value).map_err(|e| Error::Row {
        line,
        message: e.to_string(),
    })
}

/// Reads a survey CSV; see [`read_survey`].
pub fn read_survey_csv(path: impl AsRef<Path>) -> Result<SurveyFile> {
    read_survey(std::fs::File::open(path)?)
}

/// Parses a survey table with a required `score` column and optional `id`,
/// `unbiased_score`, and `self_category` columns. Every other column is a
/// feature: numeric columns pass through with missing cells mean-imputed;
/// columns with any non-numeric cell are one-hot encoded, one indicator per
/// level in sorted order. Lines starting with `#` are skipped.
pub fn read_survey<R: Read>(reader: R) -> Result<SurveyFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let score_idx = find(SCORE_COLUMN).ok_or_else(|| Error::invalid("survey has no `score` column"))?;
    let id_idx = find("id");
    let unbiased_idx = find("unbiased_score");
    let self_idx = find("self_category");

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(Error::invalid("survey has no data rows"));
    }

    let mut warnings = Vec::new();
    let mut columns = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        if RESERVED.contains(&name) {
            continue;
        }
        let cells = rows.iter().map(|(_, r)| r.get(idx).unwrap_or(""));
        let present: Vec<&str> = cells.clone().filter(|c| !c.is_empty()).collect();
        let numeric: Option<Vec<f64>> = present
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        match numeric {
            Some(values) => {
                if values.is_empty() {
                    return Err(Error::invalid(format!("feature column `{name}` is entirely empty")));
                }
                let missing = rows.len() - values.len();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                if missing > 0 {
                    warnings.push(format!(
                        "column `{name}`: {missing} missing value(s) imputed with the mean {}",
                        fmt_sig(mean)
                    ));
                }
                columns.push(Column::Numeric {
                    name: name.to_string(),
                    idx,
                    mean,
                });
            }
            None => {
                let levels: BTreeSet<&str> = present.into_iter().collect();
                let missing = cells.filter(|c| c.is_empty()).count();
                if missing > 0 {
                    warnings.push(format!(
                        "column `{name}`: {missing} missing value(s) encoded as all zeros"
                    ));
                }
                columns.push(Column::Categorical {
                    name: name.to_string(),
                    idx,
                    levels: levels.into_iter().map(String::from).collect(),
                });
            }
        }
    }

    let feature_names: Vec<String> = columns
        .iter()
        .flat_map(|c| match c {
            Column::Numeric { name, .. } => vec![name.clone()],
            Column::Categorical { name, levels, .. } => levels.iter().map(|l| format!("{name}={l}")).collect(),
        })
        .collect();

    let mut records = Vec::with_capacity(rows.len());
    for (n, (line, rec)) in rows.iter().enumerate() {
        let cell = |i: Option<usize>| i.and_then(|i| rec.get(i)).filter(|c| !c.is_empty());
        let score = parse_score(cell(Some(score_idx)).unwrap_or(""), *line, SCORE_COLUMN)?;
        let mut r = SurveyRecord::new(cell(id_idx).map_or_else(|| (n + 1).to_string(), String::from), score);
        r.unbiased_score = cell(unbiased_idx)
            .map(|c| parse_score(c, *line, "unbiased_score"))
            .transpose()?;
        r.self_category = cell(self_idx).map(String::from);
        if !columns.is_empty() {
            let mut f = Vec::with_capacity(feature_names.len());
            for c in &columns {
                match c {
                    Column::Numeric { idx, mean, .. } => {
                        f.push(cell(Some(*idx)).map_or(*mean, |c| c.parse().unwrap_or(*mean)));
                    }
                    Column::Categorical { idx, levels, .. } => {
                        let v = cell(Some(*idx));
                        f.extend(levels.iter().map(|l| f64::from(u8::from(v == Some(l.as_str())))));
                    }
                }
            }
            r.features = Some(f);
        }
        records.push(r);
    }
    let names = (!columns.is_empty()).then_some(feature_names);
    Ok(SurveyFile {
        dataset: Dataset::new(records, names)?,
        warnings,
    })
}

pub fn read_counts_csv(path: impl AsRef<Path>) -> Result<CountVector> {
    read_counts(std::fs::File::open(path)?)
}

/// Parses a `score,count` table. Scores not listed count as zero.
pub fn read_counts<R: Read>(reader: R) -> Result<CountVector> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (Some(si), Some(ci)) = (
        headers.iter().position(|h| h == "score"),
        headers.iter().position(|h| h == "count"),
    ) else {
        return Err(Error::invalid("count file needs `score` and `count` columns"));
    };
    let mut counts = [0u64; Score::LEVELS];
    let mut seen = [false; Score::LEVELS];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let score = parse_score(rec.get(si).unwrap_or(""), line, "score")?;
        let text = rec.get(ci).unwrap_or("");
        let count: u64 = text.parse().map_err(|_| Error::Row {
            line,
            message: format!("count `{text}` is not a non-negative integer"),
        })?;
        if std::mem::replace(&mut seen[score.index()], true) {
            return Err(Error::Row {
                line,
                message: format!("score {score} listed twice"),
            });
        }
        counts[score.index()] = count;
    }
    CountVector::new(counts)
}

/// Writes `# ` prefixed provenance lines.
pub fn write_comments<W: Write + ?Sized>(w: &mut W, lines: &[String]) -> Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

/// Survey CSV compatible with [`read_survey`].
pub fn write_survey<W: Write>(w: W, dataset: &Dataset) -> Result<()> {
    let mut out = writer(w);
    let mut header = vec!["id".to_string(), "score".into(), "unbiased_score".into()];
    if let Some(names) = dataset.feature_names() {
        header.extend(names.iter().cloned());
    } else if dataset.has_features() {
        header.extend((0..dataset.feature_count()).map(|i| format!("x{i}")));
    }
    out.write_record(&header)?;
    for r in dataset.records() {
        let mut row = vec![
            r.id.clone(),
            r.biased_score.to_string(),
            r.unbiased_score.map_or_else(String::new, |s| s.to_string()),
        ];
        if let Some(f) = &r.features {
            row.extend(f.iter().map(|x| fmt_sig(*x)));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per `v`. The leading columns are fixed; undersampled shares,
/// population quantities, and (for Monte Carlo) `<name>_std` columns follow.
pub fn write_curve<W: Write>(w: W, curve: &BoundCurve) -> Result<()> {
    let mut out = writer(w);
    let k = curve.scheme.k();
    let mut header: Vec<String> = [
        "v",
        "accuracy_upper",
        "precision_upper",
        "lower_majority",
        "lower_prior_matched",
    ]
    .map(String::from)
    .to_vec();
    header.extend((0..k).map(|i| format!("share_bin{i}")));
    header.extend(["nps_unbiased", "nps_biased"].map(String::from));
    header.extend((0..k).map(|i| format!("undersampled_share_bin{i}")));
    header.extend(
        [
            "nps_population_unbiased",
            "nps_population_biased",
            "population_accuracy",
        ]
        .map(String::from),
    );
    let has_std = curve.records.iter().any(|r| r.std.is_some());
    let names: Vec<String> = curve.records[0].quantities().into_iter().map(|(n, _)| n).collect();
    if has_std {
        header.extend(names.iter().map(|n| format!("{n}_std")));
    }
    out.write_record(&header)?;

    for r in &curve.records {
        let q = r.quantities();
        let get = |name: &str| q.iter().find(|(n, _)| n == name).map_or(f64::NAN, |(_, x)| *x);
        let mut row = vec![r.v.to_string()];
        row.extend(
            header[1..]
                .iter()
                .take_while(|h| !h.ends_with("_std"))
                .map(|h| fmt_sig(get(h))),
        );
        if has_std {
            let std = r.std.as_deref().unwrap_or(&[]);
            row.extend((0..names.len()).map(|i| std.get(i).map_or_else(String::new, |s| fmt_sig(*s))));
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Long form: one row per (scheme, v).
pub fn write_sweep<W: Write>(w: W, sweep: &DesignSweep) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["scheme", "group", "v", "accuracy"])?;
    for (i, s) in sweep.schemes.iter().enumerate() {
        for r in &sweep.curves[i].records {
            out.write_record([
                s.to_string(),
                sweep.groups[i].to_string(),
                r.v.to_string(),
                fmt_sig(r.accuracy_upper),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-class aggregate curves: one row per (group, v).
pub fn write_sweep_summary<W: Write>(w: W, sweep: &DesignSweep) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["group", "schemes", "v", "mean", "min", "max"])?;
    for g in &sweep.summaries {
        for v in 0..g.mean.len() {
            out.write_record([
                g.class.to_string(),
                g.members.len().to_string(),
                v.to_string(),
                fmt_sig(g.mean[v]),
                fmt_sig(g.min[v]),
                fmt_sig(g.max[v]),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_rmse_curve<W: Write>(w: W, curve: &RmseCurve) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["v", "rmse"])?;
    for (v, r) in curve.values().iter().enumerate() {
        out.write_record([v.to_string(), fmt_sig(*r)])?;
    }
    out.flush()?;
    Ok(())
}
