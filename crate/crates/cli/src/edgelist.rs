//! Edge-list text format.
//!
//! One edge per line as whitespace-separated `u v c`. The conductance `c` is
//! optional and defaults to 1. Blank lines and lines whose first
//! non-blank character is `#` are skipped. Labels are any non-whitespace
//! tokens.

use ohmwalk::{Error, Network};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: Error,
    },
    #[error(transparent)]
    Network(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn parse_network_file(text: &str) -> Result<Network, LoadError> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let (u, v, c) = match fields.as_slice() {
            [u, v] => (*u, *v, 1.0),
            [u, v, c] => {
                let c: f64 = c.parse().map_err(|_| LoadError::Parse {
                    line,
                    message: format!("conductance {c:?} is not a number"),
                })?;
                (*u, *v, c)
            }
            _ => {
                return Err(LoadError::Parse {
                    line,
                    message: format!("expected `u v [c]`, found {} fields", fields.len()),
                })
            }
        };
        if !(c.is_finite() && c > 0.0) {
            return Err(LoadError::Invalid {
                line,
                source: Error::NonPositiveConductance {
                    from: u.into(),
                    to: v.into(),
                    conductance: c,
                },
            });
        }
        if u == v {
            return Err(LoadError::Invalid {
                line,
                source: Error::SelfLoop(u.into()),
            });
        }
        edges.push((u, v, c));
    }
    Ok(Network::from_edges(edges)?)
}
