//! Names of the per-step risk evaluators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Imhof,
    Ltz,
    ChebyshevQuad,
    ChebyshevHalfspace,
    /// Univariate SOS program of the given degree (2, 4 or 6).
    Sos(u8),
    Mc,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Imhof,
        Method::Ltz,
        Method::ChebyshevQuad,
        Method::ChebyshevHalfspace,
        Method::Sos(2),
        Method::Sos(4),
        Method::Sos(6),
        Method::Mc,
    ];

    /// Bound methods return an upper bound on the probability rather than an
    /// estimate of it.
    pub fn is_upper_bound(self) -> bool {
        matches!(
            self,
            Method::ChebyshevQuad | Method::ChebyshevHalfspace | Method::Sos(_)
        )
    }

    /// Needs the Gaussian structure of each mode, not just its moments.
    pub fn needs_gaussian(self) -> bool {
        matches!(self, Method::Imhof | Method::Ltz)
    }

    /// Highest raw moment order of the position consumed.
    pub fn moment_order(self) -> usize {
        match self {
            Method::ChebyshevHalfspace => 2,
            Method::ChebyshevQuad => 4,
            Method::Sos(d) => 2 * d as usize,
            Method::Imhof | Method::Ltz | Method::Mc => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Imhof => f.write_str("imhof"),
            Method::Ltz => f.write_str("ltz"),
            Method::ChebyshevQuad => f.write_str("chebyshev-quad"),
            Method::ChebyshevHalfspace => f.write_str("chebyshev-halfspace"),
            Method::Sos(d) => write!(f, "sos-d{d}"),
            Method::Mc => f.write_str("mc"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s.trim() {
            "imhof" => Method::Imhof,
            "ltz" => Method::Ltz,
            "chebyshev-quad" => Method::ChebyshevQuad,
            "chebyshev-halfspace" => Method::ChebyshevHalfspace,
            "sos-d2" => Method::Sos(2),
            "sos-d4" => Method::Sos(4),
            "sos-d6" => Method::Sos(6),
            "mc" => Method::Mc,
            other => {
                return Err(Error::Validation(format!(
                    "unknown method `{other}` (expected one of imhof, ltz, chebyshev-quad, \
                     chebyshev-halfspace, sos-d2, sos-d4, sos-d6, mc)"
                )))
            }
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma separated method list, keeping order and dropping
/// duplicates.
pub fn parse_method_list(s: &str) -> Result<Vec<Method>, Error> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(Error::Validation("no methods given".into()));
    }
    Ok(out)
}
