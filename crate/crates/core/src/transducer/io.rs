//! Plain-text transducer format:
//!
//! ```text
//! states=2 alphabet=2 semiring=real
//! 0 0 1 1 0.5
//! initial: 0 1
//! final: 1 1
//! ```
//!
//! Transition lines read `src input output dst weight`. States without an
//! `initial:` or `final:` line get weight `0̄`. Blank lines and lines
//! starting with `#` are skipped.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::semiring::Semiring;
use crate::transducer::{Transition, WeightedTransducer};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

pub fn parse_transducer(text: &str) -> Result<WeightedTransducer> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let (mut states, mut alphabet, mut semiring) = (None, None, None);
    for tok in header.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| parse_err(hline, format!("expected key=value, got {tok:?}")))?;
        match key {
            "states" => states = Some(field::<usize>(Some(value), "state count", hline)?),
            "alphabet" => alphabet = Some(field::<usize>(Some(value), "alphabet size", hline)?),
            "semiring" => semiring = Some(value.parse::<Semiring>().map_err(|e| parse_err(hline, e.to_string()))?),
            _ => return Err(parse_err(hline, format!("unknown header key {key:?}"))),
        }
    }
    let states = states.ok_or_else(|| parse_err(hline, "header lacks states="))?;
    let alphabet = alphabet.ok_or_else(|| parse_err(hline, "header lacks alphabet="))?;
    let semiring = semiring.ok_or_else(|| parse_err(hline, "header lacks semiring="))?;

    let mut initial = vec![semiring.zero(); states];
    let mut finals = vec![semiring.zero(); states];
    let mut transitions = Vec::new();
    for (ln, line) in lines {
        let (target, rest) = if let Some(rest) = line.strip_prefix("initial:") {
            (Some(&mut initial), rest)
        } else if let Some(rest) = line.strip_prefix("final:") {
            (Some(&mut finals), rest)
        } else {
            (None, line)
        };
        let mut toks = rest.split_whitespace();
        match target {
            Some(weights) => {
                let idx: usize = field(toks.next(), "state", ln)?;
                let w: f64 = field(toks.next(), "weight", ln)?;
                if idx >= states {
                    return Err(parse_err(ln, format!("state {idx} outside {states} states")));
                }
                weights[idx] = w;
            }
            None => {
                transitions.push(Transition {
                    src: field(toks.next(), "source state", ln)?,
                    input: field(toks.next(), "input label", ln)?,
                    output: field(toks.next(), "output label", ln)?,
                    dst: field(toks.next(), "target state", ln)?,
                    weight: field(toks.next(), "weight", ln)?,
                });
            }
        }
        if toks.next().is_some() {
            return Err(parse_err(ln, "trailing fields"));
        }
    }
    WeightedTransducer::new(semiring, states, alphabet, transitions, initial, finals)
}

/// Canonical text form; parses back to an equal transducer.
pub fn write_transducer(t: &WeightedTransducer) -> String {
    let mut out = format!("states={} alphabet={} semiring={}\n", t.num_states(), t.alphabet_size(), t.semiring());
    for x in t.transitions() {
        let _ = writeln!(out, "{} {} {} {} {}", x.src, x.input, x.output, x.dst, x.weight);
    }
    let zero = t.semiring().zero();
    for (label, weights) in [("initial", t.initial()), ("final", t.finals())] {
        for (i, &w) in weights.iter().enumerate() {
            if w != zero {
                let _ = writeln!(out, "{label}: {i} {w}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# two states\nstates=2 alphabet=2 semiring=logarithmic\n0 0 1 1 -0.5\n1 1 1 0 inf\n\ninitial: 0 0\nfinal: 1 -1.25\n";
        let t = parse_transducer(text).unwrap();
        assert_eq!(t.transitions().len(), 2);
        assert_eq!(t.initial()[1], f64::NEG_INFINITY);
        let again = parse_transducer(&write_transducer(&t)).unwrap();
        assert_eq!(again, t);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = "states=1 alphabet=1 semiring=real\n0 0 0 0\n";
        assert!(matches!(parse_transducer(bad), Err(Error::Parse { line: 2, .. })));
        assert!(parse_transducer("states=1 alphabet=1 semiring=fuzzy\n").is_err());
        assert!(parse_transducer("states=1 alphabet=1 semiring=boolean\n0 0 0 0 0.5\n").is_err());
        assert!(matches!(
            parse_transducer("states=1 alphabet=1 semiring=real\ninitial: 3 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
