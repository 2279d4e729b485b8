//! Built-in conjecture sources.
//!
//! The external-process protocol is line-oriented over the child's standard
//! input/output: the harness writes one JSON request line
//! `{"board": [[<structure tokens>, 0|1], ...], "budget": t, "seed": u64}`
//! and then reads up to `t` lines, one conjecture per line; a blank line or
//! end of stream ends the batch. A batch that exceeds the timeout yields a
//! timeout error carrying the number of lines received so far.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::time::Duration;

use rand::Rng;
use serde::Serialize;

use super::{ConjectureSource, SolveError};
use crate::rules::RuleSet;
use crate::seeds;

/// One request to a conjecture source.
pub struct ConjectureRequest {
    /// Board observations as (structure token text, tag).
    pub board: Vec<(String, bool)>,
    pub budget: usize,
    pub seed: u64,
}

/// Yields every rule in ID order, up to the budget.
pub struct ExhaustiveEnumerator<'a> {
    rules: &'a RuleSet,
}

impl<'a> ExhaustiveEnumerator<'a> {
    pub fn new(rules: &'a RuleSet) -> Self {
        Self { rules }
    }
}

impl ConjectureSource for ExhaustiveEnumerator<'_> {
    fn conjectures(&mut self, request: &ConjectureRequest) -> Result<Vec<String>, SolveError> {
        Ok(self
            .rules
            .texts()
            .iter()
            .take(request.budget)
            .cloned()
            .collect())
    }
}

/// Seeded uniform sampling over the enumeration, with replacement. Draws
/// for budget `t` are a prefix of draws for any larger budget under the
/// same seed.
pub struct GrammarSampler<'a> {
    rules: &'a RuleSet,
}

impl<'a> GrammarSampler<'a> {
    pub fn new(rules: &'a RuleSet) -> Self {
        Self { rules }
    }
}

impl ConjectureSource for GrammarSampler<'_> {
    fn conjectures(&mut self, request: &ConjectureRequest) -> Result<Vec<String>, SolveError> {
        let mut rng = seeds::rng(request.seed);
        Ok((0..request.budget)
            .map(|_| self.rules.text(rng.gen_range(0..self.rules.len())).to_string())
            .collect())
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    board: Vec<(&'a str, u8)>,
    budget: usize,
    seed: u64,
}

/// Runs a child process per batch and speaks the line protocol with it.
pub struct ExternalProcess {
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl ExternalProcess {
    pub fn new(program: &str, args: &[String], timeout: Duration) -> Self {
        Self {
            program: program.to_string(),
            args: args.to_vec(),
            timeout,
        }
    }
}

impl ConjectureSource for ExternalProcess {
    fn conjectures(&mut self, request: &ConjectureRequest) -> Result<Vec<String>, SolveError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolveError::Source(format!("spawn {}: {e}", self.program)))?;

        let wire = WireRequest {
            board: request
                .board
                .iter()
                .map(|(text, tag)| (text.as_str(), u8::from(*tag)))
                .collect(),
            budget: request.budget,
            seed: request.seed,
        };
        let line = serde_json::to_string(&wire)
            .map_err(|e| SolveError::Source(format!("encode request: {e}")))?;
        {
            let stdin = child.stdin.take().expect("piped stdin");
            let mut stdin = std::io::BufWriter::new(stdin);
            // A child that exits without reading breaks the pipe; that is
            // its way of declining the batch, not a harness error.
            let _ = writeln!(stdin, "{line}");
            let _ = stdin.flush();
        }

        let stdout = child.stdout.take().expect("piped stdout");
        let budget = request.budget;
        let (sender, receiver) = mpsc::channel();
        let reader = std::thread::spawn(move || {
            let mut lines = Vec::new();
            for line in BufReader::new(stdout).lines().take(budget) {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    break;
                }
                lines.push(line);
            }
            let _ = sender.send(());
            lines
        });

        match receiver.recv_timeout(self.timeout) {
            Ok(()) => {
                let lines = reader.join().unwrap_or_default();
                let _ = child.wait();
                Ok(lines)
            }
            Err(_) => {
                // Killing the child closes its stdout, which unblocks the
                // reader thread.
                let _ = child.kill();
                let _ = child.wait();
                let received = reader.join().map(|lines| lines.len()).unwrap_or(0);
                Err(SolveError::Timeout { received })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldConfig;

    fn rules() -> RuleSet {
        RuleSet::enumerate(&WorldConfig::new(3, &["red"]).unwrap())
    }

    fn request(budget: usize, seed: u64) -> ConjectureRequest {
        ConjectureRequest {
            board: vec![("_ _ _".to_string(), true)],
            budget,
            seed,
        }
    }

    #[test]
    fn enumerator_yields_rules_in_id_order() {
        let rules = rules();
        let mut source = ExhaustiveEnumerator::new(&rules);
        let drawn = source.conjectures(&request(5, 0)).unwrap();
        assert_eq!(drawn.len(), 5);
        for (i, text) in drawn.iter().enumerate() {
            assert_eq!(text, rules.text(i));
        }
        let all = source.conjectures(&request(usize::MAX, 0)).unwrap();
        assert_eq!(all.len(), rules.len());
    }

    #[test]
    fn sampler_draws_are_a_prefix_across_budgets() {
        let rules = rules();
        let mut source = GrammarSampler::new(&rules);
        let short = source.conjectures(&request(10, 7)).unwrap();
        let long = source.conjectures(&request(100, 7)).unwrap();
        assert_eq!(&long[..10], &short[..]);
        let other_seed = source.conjectures(&request(10, 8)).unwrap();
        assert_ne!(short, other_seed);
    }

    #[test]
    fn external_process_roundtrip() {
        let rules = rules();
        // Echo two fixed conjectures, ignoring the request line.
        let mut source = ExternalProcess::new(
            "sh",
            &[
                "-c".to_string(),
                "read line; printf 'zero red\\nat_least 1 red\\n'".to_string(),
            ],
            Duration::from_secs(10),
        );
        let drawn = source.conjectures(&request(10, 0)).unwrap();
        assert_eq!(drawn, vec!["zero red".to_string(), "at_least 1 red".to_string()]);
        let _ = rules;
    }

    #[test]
    fn external_process_blank_line_ends_batch() {
        let mut source = ExternalProcess::new(
            "sh",
            &[
                "-c".to_string(),
                "read line; printf 'zero red\\n\\nat_least 1 red\\n'".to_string(),
            ],
            Duration::from_secs(10),
        );
        let drawn = source.conjectures(&request(10, 0)).unwrap();
        assert_eq!(drawn, vec!["zero red".to_string()]);
    }

    #[test]
    fn external_process_timeout_is_reported() {
        let mut source = ExternalProcess::new(
            "sh",
            &[
                "-c".to_string(),
                "read line; printf 'zero red\\n'; sleep 30".to_string(),
            ],
            Duration::from_millis(300),
        );
        match source.conjectures(&request(10, 0)) {
            Err(SolveError::Timeout { .. }) => {}
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn external_process_budget_caps_reading() {
        let mut source = ExternalProcess::new(
            "sh",
            &[
                "-c".to_string(),
                "read line; yes 'zero red' | head -n 1000".to_string(),
            ],
            Duration::from_secs(10),
        );
        let drawn = source.conjectures(&request(3, 0)).unwrap();
        assert_eq!(drawn.len(), 3);
    }
}
