//! Input files: spectra (CSV or JSON), posets and family descriptors (JSON),
//! and the CSV view of trend windows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{FamilyKind, TailFamily, DEFAULT_GRID_POINTS};
use crate::order::{transitive_closure, Chain, FinitePoset};
use crate::slocc::TrendWindow;
use crate::spectra::{Generator, IndexPoint, SchmidtSpectrum, TailSequence};

/// Agreement required between a listed `tail_log` and its generator.
const TAIL_LOG_TOLERANCE: f64 = 1e-9;

/// A parsed state description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum StateInput {
    Spectrum { spectrum: SchmidtSpectrum },
    Tail { tail: TailSequence },
}

impl StateInput {
    pub fn tail(&self) -> TailSequence {
        match self {
            StateInput::Spectrum { spectrum } => crate::spectra::tail_sums(spectrum),
            StateInput::Tail { tail } => tail.clone(),
        }
    }

    pub fn spectrum(&self) -> Option<&SchmidtSpectrum> {
        match self {
            StateInput::Spectrum { spectrum } => Some(spectrum),
            StateInput::Tail { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            StateInput::Spectrum { .. } => true,
            StateInput::Tail { tail } => tail.is_finite(),
        }
    }
}

/// One coefficient per line, descending. Blank lines and `#` comments are
/// skipped.
pub fn parse_spectrum_csv(text: &str) -> Result<SchmidtSpectrum> {
    let mut lambdas = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|e| Error::parse(format!("line {}", i + 1), format!("{field:?}: {e}")))?;
        lambdas.push(v);
    }
    if lambdas.is_empty() {
        return Err(Error::parse("csv", "no coefficients"));
    }
    SchmidtSpectrum::new(&lambdas)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumJson {
    lambdas: Option<Vec<f64>>,
    tail_log: Option<Vec<f64>>,
    generator: Option<Generator>,
}

/// JSON with `lambdas`, `tail_log` (natural-log tail values), or a closed-form
/// `generator`. A generator listed alongside `tail_log` is authoritative and
/// the listed values must agree with it.
pub fn parse_spectrum_json(text: &str) -> Result<StateInput> {
    let raw: SpectrumJson = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("json line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    match raw {
        SpectrumJson { lambdas: Some(_), tail_log: Some(_), .. } | SpectrumJson { lambdas: Some(_), generator: Some(_), .. } => {
            Err(Error::parse("json", "give either \"lambdas\" or a tail, not both"))
        }
        SpectrumJson { lambdas: Some(l), .. } => Ok(StateInput::Spectrum {
            spectrum: SchmidtSpectrum::new(&l)?,
        }),
        SpectrumJson { generator: Some(g), tail_log, .. } => {
            g.validate()?;
            if let Some(listed) = tail_log {
                for (n, &v) in listed.iter().enumerate() {
                    let expect = g.log_tail(IndexPoint::at(n as u64));
                    if !((v - expect).abs() <= TAIL_LOG_TOLERANCE * (1.0 + expect.abs())) {
                        return Err(Error::parse(
                            format!("field \"tail_log\" entry {n}"),
                            format!("{v} disagrees with the generator value {expect}"),
                        ));
                    }
                }
            }
            Ok(StateInput::Tail {
                tail: TailSequence::generated(g),
            })
        }
        SpectrumJson { tail_log: Some(t), .. } => {
            if let Some(n) = t.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(Error::parse(format!("field \"tail_log\" entry {n}"), "not a log value"));
            }
            Ok(StateInput::Tail {
                tail: TailSequence::finite_from_log(t),
            })
        }
        _ => Err(Error::parse("json", "expected \"lambdas\", \"tail_log\" or \"generator\"")),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    }
}

/// Load a spectrum or tail file; `.csv` is CSV, `.json` is JSON, anything
/// else is JSON if it starts with `{`.
pub fn load_state(path: &Path) -> Result<StateInput> {
    let text = read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let json = match ext.as_deref() {
        Some("json") => true,
        Some("csv") => false,
        _ => text.trim_start().starts_with('{'),
    };
    let parsed = if json {
        parse_spectrum_json(&text)
    } else {
        parse_spectrum_csv(&text).map(|spectrum| StateInput::Spectrum { spectrum })
    };
    parsed.map_err(|e| with_path(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Name(String),
    Index(u64),
}

impl Label {
    fn text(&self) -> String {
        match self {
            Label::Name(s) => s.clone(),
            Label::Index(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub members: Vec<Label>,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetSpec {
    pub elements: Vec<Label>,
    #[serde(default)]
    pub edges: Vec<[Label; 2]>,
    pub chain: Option<ChainSpec>,
}

impl PosetSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("json line {} column {}", e.line(), e.column()), e.to_string()))
    }

    /// Close the relation and check the chain.
    pub fn build(&self) -> Result<(FinitePoset, Option<Chain>)> {
        let labels: Vec<String> = self.elements.iter().map(Label::text).collect();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidPoset(format!("duplicate element {l:?}")));
            }
        }
        let index = |l: &Label| {
            let t = l.text();
            labels
                .iter()
                .position(|x| *x == t)
                .ok_or_else(|| Error::InvalidPoset(format!("unknown element {t:?}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|[a, b]| Ok((index(a)?, index(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let poset = transitive_closure(labels.clone(), &edges)?;
        let chain = match &self.chain {
            None => None,
            Some(c) => {
                let members = c.members.iter().map(index).collect::<Result<Vec<_>>>()?;
                Some(Chain::new(&poset, members, c.params.clone())?)
            }
        };
        Ok((poset, chain))
    }
}

/// Family descriptor, e.g.
/// `{"kind":"paper_log_oscillation","q":0.5,"r_lo":1.0,"r_hi":2.0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub r_lo: f64,
    pub r_hi: f64,
    pub grid_points: Option<usize>,
}

impl FamilyDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("json line {} column {}", e.line(), e.column()), e.to_string()))
    }

    pub fn build(&self) -> Result<TailFamily> {
        TailFamily::new(
            self.kind.clone(),
            self.r_lo,
            self.r_hi,
            self.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
        )
    }
}

/// `decade,n_lo,n_hi,log1p_lo,log1p_hi,window_min_log_ratio,window_max_log_ratio`.
pub fn windows_csv(windows: &[TrendWindow]) -> String {
    let mut out = String::from("decade,n_lo,n_hi,log1p_lo,log1p_hi,window_min_log_ratio,window_max_log_ratio\n");
    for w in windows {
        out.push_str(&format!(
            "{},{:e},{:e},{},{},{},{}\n",
            w.decade, w.n_lo, w.n_hi, w.log1p_lo, w.log1p_hi, w.window_min_log_ratio, w.window_max_log_ratio
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_spectrum() {
        let s = parse_spectrum_csv("0.5\n# comment\n0.3\n\n0.2\n").unwrap();
        assert_eq!(s.len(), 3);
        let err = parse_spectrum_csv("0.5\nabc\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_spectrum_csv("0.5\n0.6\n").is_err());
    }

    #[test]
    fn json_inputs() {
        let s = parse_spectrum_json(r#"{"lambdas":[0.5,0.5]}"#).unwrap();
        assert!(s.is_finite());
        let g = parse_spectrum_json(r#"{"generator":{"kind":"squeezed","q":0.5}}"#).unwrap();
        assert!(!g.is_finite());
        let ln4 = -(4f64.ln());
        let ok = format!(r#"{{"tail_log":[0.0,{ln4}],"generator":{{"kind":"squeezed","q":0.5}}}}"#);
        assert!(parse_spectrum_json(&ok).is_ok());
        let bad = r#"{"tail_log":[0.0,-1.0],"generator":{"kind":"squeezed","q":0.5}}"#;
        assert!(parse_spectrum_json(bad).is_err());
        let t = parse_spectrum_json(r#"{"tail_log":[0.0,-0.693,-1.609]}"#).unwrap();
        assert_eq!(t.tail().rank(), Some(3));
        let err = parse_spectrum_json("{\"lambdas\": [0.5,\n oops]}").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(parse_spectrum_json(r#"{"other":1}"#).is_err());
    }

    #[test]
    fn poset_spec() {
        let spec = PosetSpec::parse(
            r#"{"elements":["a","b","c"],"edges":[["c","b"],["b","a"]],
                "chain":{"members":["a","c"],"params":[0,1]}}"#,
        )
        .unwrap();
        let (p, c) = spec.build().unwrap();
        assert!(p.reaches(2, 0));
        assert_eq!(c.unwrap().members, vec![0, 2]);
        let wrong = PosetSpec::parse(r#"{"elements":["a","b"],"edges":[["a","b"]],"chain":{"members":["a","b"],"params":[0,1]}}"#)
            .unwrap();
        assert!(matches!(wrong.build(), Err(Error::InvalidChain(_))));
        let unknown = PosetSpec::parse(r#"{"elements":["a"],"edges":[["a","z"]]}"#).unwrap();
        assert!(unknown.build().is_err());
    }

    #[test]
    fn family_descriptor() {
        let d = FamilyDescriptor::parse(r#"{"kind":"paper_log_oscillation","q":0.5,"r_lo":1.0,"r_hi":2.0,"shift":20.0}"#)
            .unwrap();
        let f = d.build().unwrap();
        assert_eq!(f.grid.len(), DEFAULT_GRID_POINTS);
        assert_eq!(f.kind, FamilyKind::LogOscillation { q: 0.5, shift: Some(20.0) });
        let p = FamilyDescriptor::parse(r#"{"kind":"power_law","rate":1.0,"r_lo":0.5,"r_hi":2.0,"grid_points":4}"#).unwrap();
        assert_eq!(p.build().unwrap().grid.len(), 4);
    }
}
