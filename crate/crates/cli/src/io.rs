//! File formats.
//!
//! * dataset CSV: header `x1,...,xm,y[,delta_bar]`, one sample per row;
//! * kernel JSON: `{"family": "squared_exponential", "lengthscale": 1.0}`;
//! * model JSON: [`ModelParts`];
//! * envelope CSV: `x_1..x_m,nominal,half_width,lower,upper,term_power,term_lebesgue,term_residual`.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use kernel_envelope::{
    Dataset, DomainBox, Error as CoreError, ErrorEnvelope, FittedModel, KernelSpec, ModelParts, Sites,
};
use serde::Serialize;

use crate::error::{CliError, Result};

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv {
        path: path.into(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.into(),
        source,
    }
}

/// Column layout of a dataset header.
fn dataset_columns(header: &csv::StringRecord) -> std::result::Result<(usize, bool), String> {
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    let has_noise = names.last() == Some(&"delta_bar");
    let label_at = names.len().saturating_sub(1 + usize::from(has_noise));
    if names.get(label_at) != Some(&"y") || label_at == 0 {
        return Err(format!(
            "dataset header must be x1,...,xm,y[,delta_bar], got {}",
            names.join(",")
        ));
    }
    for (k, name) in names[..label_at].iter().enumerate() {
        if *name != format!("x{}", k + 1) {
            return Err(format!("dataset column {} should be x{}, got {name:?}", k + 1, k + 1));
        }
    }
    Ok((label_at, has_noise))
}

/// Reads a dataset. `delta_bar` replaces the noise column, or supplies it
/// when the file has none.
pub fn read_dataset(path: &Path, delta_bar: Option<f64>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(open(path)?);
    let header = reader.headers().map_err(csv_err(path))?.clone();
    let (dim, has_noise) = dataset_columns(&header).map_err(CliError::Input)?;
    if !has_noise && delta_bar.is_none() {
        return Err(CliError::input(format!(
            "{}: no delta_bar column; pass --delta-bar",
            path.display()
        )));
    }
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut noise = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        let value = |c: usize| -> Result<f64> {
            let field = record.get(c).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                CliError::input(format!(
                    "{}: data row {}, column {}: cannot parse {field:?} as a number",
                    path.display(),
                    row + 1,
                    header.get(c).unwrap_or("?")
                ))
            })
        };
        for c in 0..dim {
            coords.push(value(c)?);
        }
        labels.push(value(dim)?);
        noise.push(match delta_bar {
            Some(b) => b,
            None => value(dim + 1)?,
        });
    }
    if labels.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    if let Some(bad) = coords.iter().find(|v| !v.is_finite()) {
        return Err(CliError::input(format!(
            "{}: non-finite coordinate {bad}",
            path.display()
        )));
    }
    let sites = Sites::new(dim, coords)?;
    Dataset::new(sites, labels, noise).map_err(|e| match e {
        CoreError::DuplicateSites {
            first,
            second,
            distance,
        } => CliError::DuplicateRows {
            first: first + 1,
            second: second + 1,
            distance,
        },
        e => e.into(),
    })
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = (1..=data.dim()).map(|k| format!("x{k}")).collect();
    header.push("y".into());
    header.push("delta_bar".into());
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, x) in data.sites().iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
        row.push(data.labels()[i].to_string());
        row.push(data.noise_bounds()[i].to_string());
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Accepts either a path or an inline JSON object.
pub fn read_kernel(arg: &str) -> Result<KernelSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        let path = Path::new(arg);
        std::fs::read_to_string(path).map_err(io_err(path))?
    };
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: arg.into(),
        source,
    })
}

pub fn read_model(path: &Path) -> Result<FittedModel> {
    let parts: ModelParts =
        serde_json::from_reader(std::io::BufReader::new(open(path)?)).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })?;
    Ok(FittedModel::from_parts(parts)?)
}

pub fn write_model(path: &Path, model: &FittedModel) -> Result<()> {
    write_json(path, &model.to_parts())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn write_envelope(path: &Path, env: &ErrorEnvelope) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = (1..=env.queries.dim()).map(|k| format!("x_{k}")).collect();
    header.extend(
        [
            "nominal",
            "half_width",
            "lower",
            "upper",
            "term_power",
            "term_lebesgue",
            "term_residual",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(csv_err(path))?;
    for (i, x) in env.queries.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(f64::to_string).collect();
        for v in [
            env.nominal[i],
            env.half_width[i],
            env.lower[i],
            env.upper[i],
            env.term_power[i],
            env.term_lebesgue[i],
            env.term_residual[i],
        ] {
            row.push(v.to_string());
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Tensor grid from `lo:hi:n[,lo:hi:n...]`, one triple per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub domain: DomainBox,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn sites(&self) -> Result<Sites> {
        Ok(kernel_envelope::sample_grid(&self.domain, &self.counts)?)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut counts = Vec::new();
        for axis in s.split(',') {
            let parts: Vec<&str> = axis.trim().split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(format!("grid axis {axis:?} is not lo:hi:n"));
            };
            let lo: f64 = lo.parse().map_err(|_| format!("bad lower end {lo:?}"))?;
            let hi: f64 = hi.parse().map_err(|_| format!("bad upper end {hi:?}"))?;
            let n: usize = n.parse().map_err(|_| format!("bad point count {n:?}"))?;
            if n < 2 {
                return Err(format!("grid axis {axis:?} needs at least 2 points"));
            }
            lower.push(lo);
            upper.push(hi);
            counts.push(n);
        }
        let domain = DomainBox::new(lower, upper).map_err(|e| e.to_string())?;
        Ok(Self { domain, counts })
    }
}
