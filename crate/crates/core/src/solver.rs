//! Running an external SMT-LIB2 solver as a child process.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Sat,
    Unsat,
    Unknown,
}

/// A solver process. An argument containing `{file}` receives the path of
/// a temporary copy of the script; otherwise the script goes to stdin, as
/// for `z3 -in`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalSolver {
    pub fn z3() -> Self {
        ExternalSolver { program: "z3".into(), args: vec!["-in".into()], timeout: Duration::from_secs(100) }
    }

    /// Parses a command line such as `"z3 -in"` or `"cvc5 {file}"`.
    pub fn from_command(cmd: &str, timeout: Duration) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(String::from);
        let program = parts.next()?;
        Some(ExternalSolver { program, args: parts.collect(), timeout })
    }

    /// Runs the script and reads the first `sat`/`unsat`/`unknown` line.
    /// A timeout yields `Unknown`; a missing binary is `SolverUnavailable`.
    pub fn check(&self, script: &str) -> Result<SolverVerdict> {
        let file = if self.args.iter().any(|a| a.contains("{file}")) {
            let mut f = tempfile::Builder::new().suffix(".smt2").tempfile()?;
            f.write_all(script.as_bytes())?;
            f.flush()?;
            Some(f)
        } else {
            None
        };
        let args: Vec<String> = match &file {
            Some(f) => {
                let path = f.path().to_string_lossy();
                self.args.iter().map(|a| a.replace("{file}", &path)).collect()
            }
            None => self.args.clone(),
        };
        let mut child = Command::new(&self.program)
            .args(&args)
            .stdin(if file.is_some() { Stdio::null() } else { Stdio::piped() })
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| Error::SolverUnavailable(format!("{}: {e}", self.program)))?;
        if let Some(mut stdin) = child.stdin.take() {
            // A solver that exits without reading its input is not an error.
            let _ = stdin.write_all(script.as_bytes());
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if Instant::now() >= deadline {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SolverVerdict::Unknown);
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let mut out = String::new();
        child.stdout.take().expect("piped stdout").read_to_string(&mut out)?;
        Ok(parse_verdict(&out))
    }
}

pub fn parse_verdict(output: &str) -> SolverVerdict {
    for line in output.lines() {
        match line.trim() {
            "sat" => return SolverVerdict::Sat,
            "unsat" => return SolverVerdict::Unsat,
            "unknown" | "timeout" => return SolverVerdict::Unknown,
            _ => {}
        }
    }
    SolverVerdict::Unknown
}
