//! Contrastive score and loss over supplied sentence representations.
//!
//! Per triplet the loss is `-ln(e^h+ / (e^h+ + e^h-))`, computed as
//! `softplus(h- - h+)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ContrastiveError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("cosine score of a zero vector")]
    ZeroVector,
    #[error("no triplets")]
    Empty,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("unknown score `{0}` (expected cosine or dot)")]
    UnknownScore(String),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("pair `{pair_id}` is missing its {role} row")]
    MissingRole { pair_id: String, role: &'static str },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    #[default]
    Cosine,
    Dot,
}

impl FromStr for ScoreKind {
    type Err = ContrastiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(ScoreKind::Cosine),
            "dot" => Ok(ScoreKind::Dot),
            _ => Err(ContrastiveError::UnknownScore(s.to_string())),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = Neumaier::default();
    for (x, y) in a.iter().zip(b) {
        s.add(x * y);
    }
    s.total()
}

pub fn score(a: &[f64], b: &[f64], kind: ScoreKind) -> Result<f64, ContrastiveError> {
    if a.len() != b.len() {
        return Err(ContrastiveError::Dimension(a.len(), b.len()));
    }
    if let Some(x) = a.iter().chain(b).find(|x| !x.is_finite()) {
        return Err(ContrastiveError::NonFinite(*x));
    }
    match kind {
        ScoreKind::Dot => Ok(dot(a, b)),
        ScoreKind::Cosine => {
            let na = dot(a, a).sqrt();
            let nb = dot(b, b).sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(ContrastiveError::ZeroVector);
            }
            Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Loss of one triplet from its two scores.
pub fn triplet_loss(h_pos: f64, h_neg: f64) -> Result<f64, ContrastiveError> {
    for h in [h_pos, h_neg] {
        if !h.is_finite() {
            return Err(ContrastiveError::NonFinite(h));
        }
    }
    Ok(softplus(h_neg - h_pos))
}

/// d loss / d h_pos, i.e. `-e^h- / (e^h+ + e^h-)`.
pub fn triplet_loss_grad_pos(h_pos: f64, h_neg: f64) -> f64 {
    let d = h_neg - h_pos;
    if d >= 0.0 {
        -1.0 / (1.0 + (-d).exp())
    } else {
        let e = d.exp();
        -e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triplet {
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

impl Triplet {
    pub fn scores(&self, kind: ScoreKind) -> Result<(f64, f64), ContrastiveError> {
        Ok((score(&self.anchor, &self.positive, kind)?, score(&self.anchor, &self.negative, kind)?))
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = Neumaier::default();
    for v in values {
        s.add(v);
    }
    s.total()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub per_triplet: Vec<f64>,
    pub total: f64,
}

pub fn contrastive_loss(triplets: &[Triplet], kind: ScoreKind) -> Result<LossReport, ContrastiveError> {
    if triplets.is_empty() {
        return Err(ContrastiveError::Empty);
    }
    let dim = triplets[0].anchor.len();
    let mut per = Vec::with_capacity(triplets.len());
    for t in triplets {
        for v in [&t.anchor, &t.positive, &t.negative] {
            if v.len() != dim {
                return Err(ContrastiveError::Dimension(dim, v.len()));
            }
        }
        let (hp, hn) = t.scores(kind)?;
        per.push(triplet_loss(hp, hn)?);
    }
    let total = stable_sum(per.iter().copied());
    Ok(LossReport { per_triplet: per, total })
}

/// Reads `pair_id<TAB>role<TAB>x1<TAB>x2...` rows, role one of
/// anchor/pos/neg. Triplets come back in order of first appearance.
pub fn parse_vectors(text: &str) -> Result<Vec<(String, Triplet)>, ContrastiveError> {
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, [Option<Vec<f64>>; 3]> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ContrastiveError::Format { line: line_no, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(err("expected pair_id, role and at least one value".into()));
        }
        let slot = match cols[1].trim() {
            "anchor" => 0,
            "pos" | "positive" => 1,
            "neg" | "negative" => 2,
            other => return Err(err(format!("unknown role `{other}`"))),
        };
        let values = cols[2..]
            .iter()
            .map(|c| {
                let v: f64 = c.trim().parse().map_err(|_| err(format!("bad number `{c}`")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(err(format!("non-finite value `{c}`")))
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let id = cols[0].trim().to_string();
        let entry = rows.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            [None, None, None]
        });
        if entry[slot].replace(values).is_some() {
            return Err(err(format!("duplicate {} row for `{id}`", cols[1].trim())));
        }
    }
    let mut out = Vec::with_capacity(order.len());
    for id in order {
        let [a, p, n] = rows.remove(&id).expect("recorded");
        let need = |v: Option<Vec<f64>>, role| {
            v.ok_or_else(|| ContrastiveError::MissingRole {
                pair_id: id.clone(),
                role,
            })
        };
        let t = Triplet {
            anchor: need(a, "anchor")?,
            positive: need(p, "pos")?,
            negative: need(n, "neg")?,
        };
        out.push((id, t));
    }
    Ok(out)
}

pub fn read_vectors(path: &Path) -> Result<Vec<(String, Triplet)>, ContrastiveError> {
    let text = std::fs::read_to_string(path).map_err(|e| ContrastiveError::Io(format!("{}: {e}", path.display())))?;
    parse_vectors(&text)
}
