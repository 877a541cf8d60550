//! File formats: TOML parameter files, quote CSVs and curve CSVs.
//!
//! Curve CSV files have the header `tenor_years,value` and write every number
//! in scientific notation with 17 significant digits, so they round-trip
//! bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use fxcredit_core::affine::{CirPpParams, ShiftBasis, ShiftFunction};
use fxcredit_core::calibration::{BondKind, BondQuote, CdsQuote, MarketQuote};
use fxcredit_core::curve::{Curve, CurveKind};
use fxcredit_core::products::PaymentSchedule;
use fxcredit_core::riccati::{AjdParams, JumpMeasure};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{file}: field `{field}`: {message}")]
    Field {
        file: String,
        field: String,
        message: String,
    },
    #[error("{file}: {message}")]
    Syntax { file: String, message: String },
    #[error("{file}: line {line}: {message}")]
    Row { file: String, line: u64, message: String },
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    ExpX { lambda_x: f64 },
    DiracXy { jump_x: f64, jump_y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AjdSection {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub m: f64,
    #[serde(default)]
    pub mu_x: f64,
    #[serde(default)]
    pub mu_y: f64,
    pub jump: JumpSpec,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub y0: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSpec {
    #[default]
    LevelSlopeDecay,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSection {
    #[serde(default)]
    pub f1: f64,
    #[serde(default)]
    pub f2: f64,
    #[serde(default)]
    pub f3: f64,
    #[serde(default)]
    pub basis: BasisSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CirSection {
    pub r0: f64,
    pub b_x: f64,
    pub beta_x: f64,
    pub sigma_x: f64,
    #[serde(default)]
    pub shift: ShiftSection,
}

/// Either explicit dates or `n` equal periods up to `maturity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub dates: Option<Vec<f64>>,
    pub maturity: Option<f64>,
    pub n: Option<usize>,
    #[serde(default)]
    pub coupon: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub ajd: Option<AjdSection>,
    pub cirpp: Option<CirSection>,
    pub schedule: Option<ScheduleSection>,
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn field_err(file: &str, field: impl Into<String>, message: impl ToString) -> InputError {
    InputError::Field {
        file: file.to_string(),
        field: field.into(),
        message: message.to_string(),
    }
}

/// Maps a core validation error onto the section it came from.
fn core_field_err(file: &str, section: &str, e: fxcredit_core::Error) -> InputError {
    match e {
        fxcredit_core::Error::InvalidParameter { name, reason } => field_err(file, format!("{section}.{name}"), reason),
        other => field_err(file, section, other),
    }
}

impl ParamFile {
    pub fn parse(text: &str, file: &str) -> Result<Self, InputError> {
        let de = toml::Deserializer::parse(text).map_err(|e| InputError::Syntax {
            file: file.to_string(),
            message: e.to_string(),
        })?;
        let pf: ParamFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            field_err(file, field, e.into_inner().message().trim())
        })?;
        pf.ajd_params(file).transpose()?;
        pf.cir_params(file).transpose()?;
        pf.schedule(file).transpose()?;
        Ok(pf)
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn ajd_params(&self, file: &str) -> Option<Result<AjdParams, InputError>> {
        let a = self.ajd.as_ref()?;
        let jump = match a.jump {
            JumpSpec::ExpX { lambda_x } => JumpMeasure::ExpX { rate: lambda_x },
            JumpSpec::DiracXy { jump_x, jump_y } => JumpMeasure::DiracXY { jump_x, jump_y },
        };
        let p = AjdParams {
            sigma_x: a.sigma_x,
            sigma_y: a.sigma_y,
            m: a.m,
            mu_x: a.mu_x,
            mu_y: a.mu_y,
            jump,
            x0: a.x0,
            y0: a.y0,
            h: a.h,
        };
        Some(p.validate().map(|_| p).map_err(|e| core_field_err(file, "ajd", e)))
    }

    pub fn cir_params(&self, file: &str) -> Option<Result<CirPpParams, InputError>> {
        let c = self.cirpp.as_ref()?;
        let p = CirPpParams {
            r0: c.r0,
            b_x: c.b_x,
            beta_x: c.beta_x,
            sigma_x: c.sigma_x,
            shift: ShiftFunction {
                coeffs: [c.shift.f1, c.shift.f2, c.shift.f3],
                basis: match c.shift.basis {
                    BasisSpec::LevelSlopeDecay => ShiftBasis::LevelSlopeDecay,
                    BasisSpec::Quadratic => ShiftBasis::Quadratic,
                },
            },
        };
        Some(p.validate().map(|_| p).map_err(|e| core_field_err(file, "cirpp", e)))
    }

    pub fn schedule(&self, file: &str) -> Option<Result<PaymentSchedule, InputError>> {
        let s = self.schedule.as_ref()?;
        let built = match (&s.dates, s.maturity, s.n) {
            (Some(d), None, None) => PaymentSchedule::new(d.clone(), s.coupon),
            (None, Some(t), Some(n)) => PaymentSchedule::equidistant(t, n, s.coupon),
            _ => {
                return Some(Err(field_err(
                    file,
                    "schedule",
                    "give either `dates` or both `maturity` and `n`",
                )))
            }
        };
        Some(built.map_err(|e| core_field_err(file, "schedule", e)))
    }

    pub fn require_ajd(&self, file: &str) -> Result<AjdParams, InputError> {
        self.ajd_params(file)
            .unwrap_or_else(|| Err(field_err(file, "ajd", "section is required")))
    }

    pub fn require_cir(&self, file: &str) -> Result<CirPpParams, InputError> {
        self.cir_params(file)
            .unwrap_or_else(|| Err(field_err(file, "cirpp", "section is required")))
    }

    pub fn require_schedule(&self, file: &str) -> Result<PaymentSchedule, InputError> {
        self.schedule(file)
            .unwrap_or_else(|| Err(field_err(file, "schedule", "section is required")))
    }
}

#[derive(Debug, Deserialize)]
struct QuoteRow {
    kind: String,
    maturity_years: f64,
    coupon: Option<f64>,
    price: Option<f64>,
    spread: Option<f64>,
    frequency: Option<f64>,
}

/// Reads `kind,maturity_years,coupon,price,spread,frequency`, with `kind`
/// one of `gov`, `corp`, `cds`. Empty cells are unused; frequency defaults to 1.
pub fn read_quotes(path: &Path) -> Result<Vec<MarketQuote>, InputError> {
    let text = read_text(path)?;
    parse_quotes(&text, &path.display().to_string())
}

pub fn parse_quotes(text: &str, file: &str) -> Result<Vec<MarketQuote>, InputError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize::<QuoteRow>() {
        let row_err = |line: u64, message: String| InputError::Row {
            file: file.to_string(),
            line,
            message,
        };
        let row = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e.to_string())
        })?;
        let line = out.len() as u64 + 2;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| row_err(line, format!("`{name}` is required")));
        let frequency = row.frequency.unwrap_or(1.0);
        let q = match row.kind.as_str() {
            "gov" | "corp" => {
                let b = BondQuote {
                    kind: if row.kind == "gov" {
                        BondKind::Government
                    } else {
                        BondKind::Corporate
                    },
                    maturity: row.maturity_years,
                    coupon: row.coupon.unwrap_or(0.0),
                    price: need(row.price, "price")?,
                    frequency,
                };
                b.validate().map_err(|e| row_err(line, e.to_string()))?;
                MarketQuote::Bond(b)
            }
            "cds" => {
                let c = CdsQuote {
                    maturity: row.maturity_years,
                    spread: need(row.spread, "spread")?,
                    frequency,
                };
                c.validate().map_err(|e| row_err(line, e.to_string()))?;
                MarketQuote::Cds(c)
            }
            other => return Err(row_err(line, format!("unknown quote kind `{other}` (gov, corp, cds)"))),
        };
        out.push(q);
    }
    if out.is_empty() {
        return Err(InputError::Syntax {
            file: file.to_string(),
            message: "no quotes".into(),
        });
    }
    Ok(out)
}

pub fn write_quotes(path: &Path, quotes: &[MarketQuote]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "maturity_years", "coupon", "price", "spread", "frequency"])?;
    for q in quotes {
        match q {
            MarketQuote::Bond(b) => {
                let kind = if b.kind == BondKind::Government { "gov" } else { "corp" };
                w.write_record([
                    kind.to_string(),
                    fmt_f64(b.maturity),
                    fmt_f64(b.coupon),
                    fmt_f64(b.price),
                    String::new(),
                    fmt_f64(b.frequency),
                ])?;
            }
            MarketQuote::Cds(c) => w.write_record([
                "cds".to_string(),
                fmt_f64(c.maturity),
                String::new(),
                String::new(),
                fmt_f64(c.spread),
                fmt_f64(c.frequency),
            ])?,
        }
    }
    w.flush()
}

pub fn curve_csv(points: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("tenor_years,value\n");
    for (t, v) in points {
        s.push_str(&fmt_f64(t));
        s.push(',');
        s.push_str(&fmt_f64(v));
        s.push('\n');
    }
    s
}

pub fn write_curve(path: &Path, c: &Curve) -> std::io::Result<()> {
    fs::File::create(path)?.write_all(curve_csv(c.points()).as_bytes())
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    tenor_years: f64,
    value: f64,
}

pub fn read_curve(path: &Path, kind: CurveKind) -> Result<Curve, InputError> {
    let file = path.display().to_string();
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut tenors = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.deserialize::<CurveRow>() {
        let r = rec.map_err(|e| InputError::Row {
            file: file.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        tenors.push(r.tenor_years);
        values.push(r.value);
    }
    Curve::new(tenors, values, kind).map_err(|e| InputError::Syntax {
        file,
        message: e.to_string(),
    })
}
