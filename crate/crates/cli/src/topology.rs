//! Topology selection from command-line arguments.

use clap::Args;
use lattice_net::{Error, IntMatrix, TopologyKind};

const NAMES: [&str; 9] = ["torus", "fcc4", "bcc4", "hybrid", "pc", "rtt", "fcc", "bcc", "lip"];

#[derive(Args, Debug, Clone)]
pub struct TopologyArgs {
    /// Named family: pc, fcc, bcc, rtt, fcc4, bcc4, lip, torus, hybrid.
    #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
    pub topology: Option<String>,
    /// Crystal side.
    #[arg(long)]
    pub a: Option<i64>,
    /// Torus sides, e.g. 8,8,8,4.
    #[arg(long, value_delimiter = ',')]
    pub sides: Vec<i64>,
    /// Hybrid parts, e.g. pc:4,bcc:2 or pc2a,bcc with --a.
    #[arg(long, value_delimiter = ',')]
    pub parts: Vec<String>,
    /// Literal generator matrix, rows separated by ';', e.g. "8,4,4;0,4,0;0,0,4".
    #[arg(long)]
    pub matrix: Option<String>,
}

impl TopologyArgs {
    pub fn kind(&self) -> Result<TopologyKind, Error> {
        if let Some(m) = &self.matrix {
            return Ok(TopologyKind::Custom { matrix: m.parse::<IntMatrix>()? });
        }
        let name = self.topology.as_deref().unwrap_or_default();
        match name {
            "torus" => {
                if self.sides.is_empty() {
                    return Err(Error::Parse("torus needs --sides".into()));
                }
                Ok(TopologyKind::Torus { sides: self.sides.clone() })
            }
            "hybrid" => {
                if self.parts.len() < 2 {
                    return Err(Error::Parse("hybrid needs at least two --parts".into()));
                }
                let parts = self.parts.iter().map(|p| parse_part(p, self.a)).collect::<Result<_, _>>()?;
                Ok(TopologyKind::Hybrid { parts })
            }
            _ => {
                let a = self.a.ok_or_else(|| Error::Parse(format!("{name} needs --a")))?;
                named(name, a)
            }
        }
    }

    /// Side parameter of a named crystal, if any.
    pub fn side(&self) -> Option<i64> {
        match self.topology.as_deref() {
            Some("torus") | Some("hybrid") | None => None,
            Some(_) => self.a,
        }
    }
}

fn named(name: &str, a: i64) -> Result<TopologyKind, Error> {
    Ok(match name {
        "pc" => TopologyKind::Pc { a },
        "rtt" => TopologyKind::Rtt { a },
        "fcc" => TopologyKind::Fcc { a },
        "bcc" => TopologyKind::Bcc { a },
        "fcc4" => TopologyKind::Fcc4 { a },
        "bcc4" => TopologyKind::Bcc4 { a },
        "lip" => TopologyKind::Lip { a },
        other => return Err(Error::Parse(format!("unknown topology {other:?}"))),
    })
}

/// Parses one component of a lift: `name`, `name:param` or `name<k>a`, where
/// the parameter is an integer, `a`, or a multiple `ka` of `--a`. Tori are
/// written `torus:8x8x4`.
pub fn parse_part(token: &str, a: Option<i64>) -> Result<TopologyKind, Error> {
    let token = token.trim().to_ascii_lowercase();
    let (name, param) = match token.split_once(':') {
        Some((n, p)) => (n.to_string(), p.to_string()),
        None => {
            let name = NAMES
                .iter()
                .filter(|n| token.starts_with(**n))
                .max_by_key(|n| n.len())
                .ok_or_else(|| Error::Parse(format!("unknown topology {token:?}")))?;
            (name.to_string(), token[name.len()..].to_string())
        }
    };
    if name == "torus" {
        let sides = param
            .split('x')
            .map(|s| s.parse::<i64>().map_err(|_| Error::Parse(format!("bad torus side {s:?} in {token:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(TopologyKind::Torus { sides });
    }
    let side = if param.is_empty() || param.ends_with('a') {
        let a = a.ok_or_else(|| Error::Parse(format!("{token:?} refers to a but --a is missing")))?;
        let k = match &param[..param.len().saturating_sub(1)] {
            "" => 1,
            k => k.parse::<i64>().map_err(|_| Error::Parse(format!("bad multiplier in {token:?}")))?,
        };
        k.checked_mul(a).ok_or(Error::Overflow("side"))?
    } else {
        param.parse::<i64>().map_err(|_| Error::Parse(format!("bad side in {token:?}")))?
    };
    named(&name, side)
}
