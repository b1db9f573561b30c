//! Command-line jobs over the reconstruction library.

pub mod args;
pub mod gen;
mod jobs;

use std::fmt;
use std::time::Instant;

use serde_json::{json, Value};
use tensorforge::field::FieldDescriptor;
use tensorforge::Error;

pub use args::{Cli, Command, Common, Format, Kind};

/// Mersenne prime `2^61 - 1`.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Clone)]
pub struct CliError {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError { code: EXIT_PARSE, kind: "ParseError".into(), message: message.into() }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VERIFY, kind: "VerificationFailed".into(), message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

fn variant_name(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::RankExceedsBound(_)
            | Error::BudgetExceeded(_)
            | Error::SearchExhausted(_)
            | Error::ReconstructionFailed(_)
            | Error::NotRepresentable(_)
            | Error::RandomShiftExhausted
            | Error::ScaleExceeded(_) => EXIT_BUDGET,
            Error::VerificationFailed(_) | Error::CandidateRejected(_) => EXIT_VERIFY,
            Error::InvalidInput(_) | Error::ShapeMismatch(_) | Error::NotPrime(_) | Error::NotIrreducible => EXIT_PARSE,
            _ => EXIT_FAILURE,
        };
        CliError { code, kind: variant_name(&e), message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `p` or `p^t`.
pub fn parse_field(s: &str) -> CliResult<FieldDescriptor> {
    let bad = || CliError::parse(format!("bad field `{s}`, expected p or p^t"));
    let (p, t) = match s.split_once('^') {
        Some((p, t)) => (p.trim(), Some(t.trim().parse::<usize>().map_err(|_| bad())?)),
        None => (s.trim(), None),
    };
    let p: u64 = p.parse().map_err(|_| bad())?;
    Ok(FieldDescriptor { prime: p, ext_degree: t.filter(|&t| t > 1), modulus: None })
}

/// Seed from the flag or environment, else zero.
pub fn job_seed(c: &Common) -> u64 {
    c.seed.unwrap_or(0)
}

/// Run one job. The returned value always carries `command`, `seed` and
/// `timing_ms`; failures add `error` and a nonzero exit code.
pub fn execute(cli: &Cli) -> (i32, Value) {
    let start = Instant::now();
    let seed = job_seed(&cli.common);
    let (code, mut body) = match jobs::dispatch(cli) {
        Ok(v) => (EXIT_OK, v),
        Err(e) => (e.code, json!({ "error": { "kind": e.kind, "message": e.message } })),
    };
    body["command"] = json!(command_name(&cli.command));
    body["seed"] = json!(seed);
    body["threads"] = json!(cli.common.threads);
    body["exit_code"] = json!(code);
    body["timing_ms"] = json!(start.elapsed().as_secs_f64() * 1e3);
    (code, body)
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Rank { .. } => "rank",
        Command::Decompose { .. } => "decompose",
        Command::RankSym { .. } => "rank-sym",
        Command::DecomposeSym { .. } => "decompose-sym",
        Command::ReconstructMl { .. } => "reconstruct-ml",
        Command::Verify { .. } => "verify",
        Command::Solve { .. } => "solve",
        Command::Gen { .. } => "gen",
    }
}

/// Rank, k, field and timing only.
pub fn summary(v: &Value) -> String {
    let show = |key: &str| v.get(key).map(|x| x.to_string()).unwrap_or_else(|| "-".into());
    let field = v
        .get("field")
        .map(|d| match d.get("ext_degree").and_then(Value::as_u64) {
            Some(t) => format!("F_{}^{}", d["prime"], t),
            None => format!("F_{}", d["prime"]),
        })
        .unwrap_or_else(|| "-".into());
    format!(
        "rank: {}\nk: {}\nfield: {}\ntime: {:.1} ms\n",
        show("rank"),
        show("k"),
        field,
        v.get("timing_ms").and_then(Value::as_f64).unwrap_or(0.0)
    )
}

/// Drop the timing field, for reproducibility comparisons.
pub fn without_timing(v: &Value) -> Value {
    let mut v = v.clone();
    if let Some(m) = v.as_object_mut() {
        m.remove("timing_ms");
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_strings() {
        assert_eq!(parse_field("101").unwrap(), FieldDescriptor::prime(101));
        let e = parse_field("3^4").unwrap();
        assert_eq!((e.prime, e.ext_degree), (3, Some(4)));
        assert_eq!(parse_field("7^x").unwrap_err().code, EXIT_PARSE);
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::RankExceedsBound(1)).code, EXIT_BUDGET);
        assert_eq!(CliError::from(Error::RankExceedsBound(1)).kind, "RankExceedsBound");
        assert_eq!(CliError::from(Error::VerificationFailed("x".into())).code, EXIT_VERIFY);
    }
}
