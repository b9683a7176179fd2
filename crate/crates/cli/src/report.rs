use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Process exit status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Pass = 0,
    Verification = 1,
    Usage = 2,
    Search = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { exit: Exit::Usage, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<interlace::Error> for CliError {
    fn from(e: interlace::Error) -> Self {
        use interlace::Error as E;
        let exit = match &e {
            E::Verification(_) => Exit::Verification,
            _ if e.is_search_or_resource() => Exit::Search,
            _ => Exit::Usage,
        };
        Self { exit, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Outcome of one invocation. Everything except `wall_time` is a function of
/// the inputs, the parameters and the seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the input file, hex encoded.
    pub input_digest: Option<String>,
    pub parameters: Value,
    pub results: Value,
    pub pass: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl RunReport {
    pub fn exit(&self) -> Exit {
        if self.pass {
            Exit::Pass
        } else if self.results.get("search_or_resource").and_then(Value::as_bool) == Some(true) {
            Exit::Search
        } else {
            Exit::Verification
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_input(path: &Path) -> CliResult<(String, String)> {
    let bytes = fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let digest = digest(&bytes);
    let text = String::from_utf8(bytes).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok((text, digest))
}

/// CSV rendering of the numeric sequence at JSON pointer `field` of the
/// report results: a header row, then `index,value` per element.
pub fn plot_csv(report: &RunReport, field: &str) -> CliResult<String> {
    let value = report
        .results
        .pointer(field)
        .ok_or_else(|| CliError::usage(format!("results have no field {field:?}")))?;
    let Value::Array(items) = value else {
        return Err(CliError::usage(format!("field {field:?} is not a sequence")));
    };
    let name = field.rsplit('/').next().filter(|s| !s.is_empty()).unwrap_or("value");
    let mut out = format!("index,{name}\n");
    for (i, item) in items.iter().enumerate() {
        let x = item
            .as_f64()
            .ok_or_else(|| CliError::usage(format!("element {i} of {field:?} is not a number")))?;
        out.push_str(&format!("{i},{x:?}\n"));
    }
    Ok(out)
}

pub fn emit_plot_data(report: &RunReport, field: &str, path: &Path) -> CliResult<()> {
    let csv = plot_csv(report, field)?;
    fs::write(path, csv).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}
