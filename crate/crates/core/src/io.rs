//! Claims ingestion, result files and atomic writes.
//!
//! Input CSV files name their columns in a header row:
//!
//! * LTRC triples: `y,t,delta` plus an optional `group`
//! * raw claims: `claim` plus an optional `group`, converted through a
//!   deductible/limit window
//!
//! Lines starting with `#` are skipped, so output files (which carry a
//! reproducibility header) can be read back.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrmError};
use crate::pl::LtrcObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimsFormat {
    LtrcTriples,
    RawClaims,
}

impl std::str::FromStr for ClaimsFormat {
    type Err = SrmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ltrc" | "ltrc-triples" | "triples" => Ok(ClaimsFormat::LtrcTriples),
            "raw" | "raw-claims" | "claims" => Ok(ClaimsFormat::RawClaims),
            other => Err(SrmError::Usage(format!("unknown input format `{other}` (expected ltrc or raw)"))),
        }
    }
}

/// Deductible and limit used to turn raw claims into triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimWindow {
    pub deductible: f64,
    pub limit: f64,
}

impl ClaimWindow {
    pub fn new(deductible: f64, limit: f64) -> Result<Self> {
        if !(deductible.is_finite() && deductible >= 0.0 && deductible < limit) {
            return Err(SrmError::Config(format!("need 0 <= deductible < limit, got {deductible} and {limit}")));
        }
        Ok(Self { deductible, limit })
    }

    /// `(min(x, u), d, x < u)`.
    pub fn observe(&self, claim: f64) -> Result<LtrcObservation> {
        LtrcObservation::new(claim.min(self.limit), self.deductible, claim < self.limit)
    }
}

/// Parsed observations, grouped by the optional `group` column in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsFile {
    pub format: ClaimsFormat,
    pub groups: Vec<(Option<String>, Vec<LtrcObservation>)>,
    pub rows: usize,
}

impl ClaimsFile {
    pub fn all_observations(&self) -> Vec<LtrcObservation> {
        self.groups.iter().flat_map(|(_, o)| o.iter().copied()).collect()
    }
}

fn parse_number(field: &str, line: usize, name: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| SrmError::Parse { line, message: format!("`{field}` is not a number in column {name}") })?;
    if v.is_nan() {
        return Err(SrmError::Parse { line, message: format!("NaN in column {name}") });
    }
    Ok(v)
}

/// Strict parse of CSV text; the first offending row aborts with its line number.
pub fn parse_claims_str(text: &str, format: ClaimsFormat, window: Option<&ClaimWindow>) -> Result<ClaimsFile> {
    if format == ClaimsFormat::RawClaims && window.is_none() {
        return Err(SrmError::Config("raw claims need a deductible and limit".into()));
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| SrmError::Parse { line: 1, message: e.to_string() })?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let need =
        |name: &str| col(name).ok_or_else(|| SrmError::Parse { line: 1, message: format!("missing column `{name}`") });
    let group_col = col("group");
    let cols = match format {
        ClaimsFormat::LtrcTriples => vec![need("y")?, need("t")?, need("delta")?],
        ClaimsFormat::RawClaims => vec![need("claim")?],
    };

    let mut order: Vec<Option<String>> = Vec::new();
    let mut grouped: BTreeMap<Option<String>, Vec<LtrcObservation>> = BTreeMap::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| SrmError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let obs = match format {
            ClaimsFormat::LtrcTriples => {
                let y = parse_number(field(cols[0]), line, "y")?;
                let t = parse_number(field(cols[1]), line, "t")?;
                let delta = match field(cols[2]).trim() {
                    "1" => true,
                    "0" => false,
                    other => {
                        return Err(SrmError::Parse { line, message: format!("delta must be 0 or 1, got `{other}`") })
                    }
                };
                LtrcObservation::new(y, t, delta).map_err(|e| SrmError::Parse { line, message: e.to_string() })?
            }
            ClaimsFormat::RawClaims => {
                let x = parse_number(field(cols[0]), line, "claim")?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(SrmError::Parse { line, message: format!("claim {x} must be positive") });
                }
                window
                    .unwrap()
                    .observe(x)
                    .map_err(|_| SrmError::Parse { line, message: format!("claim {x} lies below the deductible") })?
            }
        };
        let g = group_col.map(|i| field(i).trim().to_string());
        if !grouped.contains_key(&g) {
            order.push(g.clone());
        }
        grouped.entry(g).or_default().push(obs);
        rows += 1;
    }
    if rows == 0 {
        return Err(SrmError::Parse { line: 1, message: "no observations".into() });
    }
    let groups = order
        .into_iter()
        .map(|g| {
            let obs = grouped.remove(&g).unwrap();
            (g, obs)
        })
        .collect();
    Ok(ClaimsFile { format, groups, rows })
}

pub fn parse_claims(path: &Path, format: ClaimsFormat, window: Option<&ClaimWindow>) -> Result<ClaimsFile> {
    let text = fs::read_to_string(path).map_err(|e| SrmError::Io(format!("{}: {e}", path.display())))?;
    parse_claims_str(&text, format, window)
}

/// `y,t,delta` CSV; `f64` display is the shortest string that parses back
/// to the same value.
pub fn ltrc_to_csv(obs: &[LtrcObservation]) -> String {
    let mut s = String::from("y,t,delta\n");
    for o in obs {
        s.push_str(&format!("{},{},{}\n", o.y, o.t, u8::from(o.delta)));
    }
    s
}

/// `# `-prefixed lines naming the tool version and the resolved
/// configuration as JSON.
pub fn reproducibility_header<T: Serialize>(config: &T) -> Result<String> {
    let json = serde_json::to_string(config).map_err(|e| SrmError::Io(e.to_string()))?;
    Ok(format!("# {} {}\n# config: {json}\n", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")))
}

/// Serializes `rows` as CSV below a reproducibility header.
pub fn csv_with_header<C: Serialize, R: Serialize>(config: &C, rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| SrmError::Io(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| SrmError::Io(e.to_string()))?)
        .map_err(|e| SrmError::Io(e.to_string()))?;
    Ok(reproducibility_header(config)? + &body)
}

/// `{"config": ..., "<key>": ...}`, pretty printed.
pub fn json_document<C: Serialize, B: Serialize>(config: &C, key: &str, body: &B) -> Result<String> {
    let doc = serde_json::json!({
        "tool": format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        "config": config,
        key: body,
    });
    serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| SrmError::Io(e.to_string()))
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| SrmError::Io(format!("{} has no file name", path.display())))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        SrmError::Io(format!("{}: {e}", path.display()))
    })
}
