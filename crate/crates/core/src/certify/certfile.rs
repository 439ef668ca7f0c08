//! Certificate files (`.cert`):
//!
//! ```text
//! lambda 0.5 0.5
//! limit 1 0
//! step 1.5 0 ; 0 0.16666666666666674 2.6666666666666665
//! ```

use std::fmt::Write as _;

use super::{AkktCertificate, AkktStep};
use crate::error::{Error, Result};

fn reals(tokens: &str, line: usize) -> Result<Vec<f64>> {
    tokens
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::CertificateFormat {
                line,
                msg: format!("malformed number '{t}'"),
            })
        })
        .collect()
}

pub fn parse_certificate(text: &str) -> Result<AkktCertificate> {
    let mut lambda = None;
    let mut limit = None;
    let mut steps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (kw, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        match kw {
            "lambda" => lambda = Some(reals(rest, line)?),
            "limit" => limit = Some(reals(rest, line)?),
            "step" => {
                let (xs, mus) = rest.split_once(';').ok_or_else(|| Error::CertificateFormat {
                    line,
                    msg: "step needs '<x> ; <mu>'".into(),
                })?;
                steps.push(AkktStep {
                    x: reals(xs, line)?,
                    mu: reals(mus, line)?,
                });
            }
            other => {
                return Err(Error::CertificateFormat {
                    line,
                    msg: format!("unknown keyword '{other}'"),
                })
            }
        }
    }
    let missing = |what: &str| Error::CertificateFormat {
        line: 0,
        msg: format!("missing '{what}' line"),
    };
    Ok(AkktCertificate {
        lambda: lambda.ok_or_else(|| missing("lambda"))?,
        limit: limit.ok_or_else(|| missing("limit"))?,
        steps,
    })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Shortest round-trip formatting; parsing the output is lossless.
pub fn write_certificate(cert: &AkktCertificate) -> String {
    let mut out = String::new();
    writeln!(out, "lambda {}", join(&cert.lambda)).unwrap();
    writeln!(out, "limit {}", join(&cert.limit)).unwrap();
    for s in &cert.steps {
        writeln!(out, "step {} ; {}", join(&s.x), join(&s.mu)).unwrap();
    }
    out
}
