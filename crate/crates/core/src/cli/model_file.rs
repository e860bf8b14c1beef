//! Text model files.
//!
//! ```text
//! mlelab-model v1 <kind>
//! feature <name>          (one line per feature, in column order)
//! theta <v1> ... <vd>     (linear models)
//! tail <alpha>            (znbp)
//! row <v1> ... <vd+1>     (znbp, six rows, bias last)
//! ```
//!
//! Numbers are written with 17 significant digits.

use std::fmt::Write as _;

use crate::estimators::{EstimatorKind, Fitted};
use crate::linear_model::{LinkLayer, ParamVector, RAW_DIM};
use crate::{Error, Result};

const MAGIC: &str = "mlelab-model";
const VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: EstimatorKind,
    pub features: Vec<String>,
    pub params: Fitted,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_nums(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| f.parse().map_err(|_| Error::Parse(format!("model file line {line}: bad number '{f}'"))))
        .collect()
}

impl ModelFile {
    pub fn render(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION} {}\n", self.kind);
        for f in &self.features {
            let _ = writeln!(out, "feature {f}");
        }
        match &self.params {
            Fitted::Theta(theta) => {
                let vals: Vec<String> = theta.as_slice().iter().map(|v| num(*v)).collect();
                let _ = writeln!(out, "theta {}", vals.join(" "));
            }
            Fitted::Layer(layer) => {
                let _ = writeln!(out, "tail {}", num(layer.pareto_tail()));
                for k in 0..RAW_DIM {
                    let vals: Vec<String> = layer.output_row(k).iter().map(|v| num(*v)).collect();
                    let _ = writeln!(out, "row {}", vals.join(" "));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
        let header = lines.next().map(|(_, l)| l).unwrap_or("");
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 || head[0] != MAGIC {
            return Err(Error::Parse("not an mlelab model file".into()));
        }
        if head[1] != VERSION {
            return Err(Error::Parse(format!("unsupported model file version '{}'", head[1])));
        }
        let kind: EstimatorKind = head[2].parse()?;
        let mut features = Vec::new();
        let mut theta = None;
        let mut tail = None;
        let mut rows = Vec::new();
        for (no, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let fields: Vec<&str> = rest.split_whitespace().collect();
            match key {
                "feature" => features.push(rest.to_string()),
                "theta" => theta = Some(parse_nums(&fields, no)?),
                "tail" => tail = parse_nums(&fields, no)?.first().copied(),
                "row" => rows.push(parse_nums(&fields, no)?),
                _ => return Err(Error::Parse(format!("model file line {no}: unknown entry '{key}'"))),
            }
        }
        let d = features.len();
        let params = if kind == EstimatorKind::Znbp {
            let tail = tail.ok_or_else(|| Error::Parse("znbp model file lacks a tail line".into()))?;
            if rows.len() != RAW_DIM || rows.iter().any(|r| r.len() != d + 1) {
                return Err(Error::Parse(format!("znbp model file needs {RAW_DIM} rows of {} values", d + 1)));
            }
            Fitted::Layer(LinkLayer::new(d, rows.concat(), tail)?)
        } else {
            let theta = theta.ok_or_else(|| Error::Parse("model file lacks a theta line".into()))?;
            if theta.len() != d {
                return Err(Error::Parse(format!("theta has {} values for {d} features", theta.len())));
            }
            Fitted::Theta(ParamVector::new(theta)?)
        };
        Ok(Self { kind, features, params })
    }
}
