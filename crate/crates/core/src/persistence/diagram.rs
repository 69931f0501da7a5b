use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    enclosing_radius, pairwise_distances, persistence_h0, persistence_h1, H1Options,
    PersistencePair, PointCloud,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiagramOptions {
    /// Highest homology dimension to compute (0 or 1).
    pub max_dim: usize,
    /// Truncation radius for dimension 1; the enclosing radius when `None`.
    pub threshold: Option<f64>,
    pub keep_zero_persistence: bool,
}

/// All pairs of one point cloud: the `r - 1` finite H0 pairs by death, the
/// surviving H0 class, then H1 pairs by (birth, death).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    #[serde(skip)]
    pub n_points: usize,
    #[serde(skip)]
    pub ambient_dim: usize,
    #[serde(skip)]
    pub max_dim: usize,
}

impl PersistenceDiagram {
    pub fn compute(cloud: &PointCloud, opts: DiagramOptions) -> Result<Self> {
        if opts.max_dim > 1 {
            return Err(Error::InvalidInput(format!(
                "homology dimension {} is not supported (max 1)",
                opts.max_dim
            )));
        }
        let d = pairwise_distances(cloud)?;
        let mut pairs = persistence_h0(&d)?;
        pairs.push(PersistencePair::new(0, 0.0, f64::INFINITY));
        if opts.max_dim >= 1 {
            let threshold = opts.threshold.unwrap_or_else(|| enclosing_radius(&d));
            let h1 = H1Options {
                keep_zero_persistence: opts.keep_zero_persistence,
            };
            pairs.extend(persistence_h1(&d, threshold, h1)?);
        }
        Ok(Self {
            pairs,
            n_points: cloud.n_points(),
            ambient_dim: cloud.dim(),
            max_dim: opts.max_dim,
        })
    }

    pub fn dimension(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Number of classes of dimension `dim` alive at radius `t`.
    pub fn betti(&self, dim: usize, t: f64) -> usize {
        self.dimension(dim).filter(|p| p.birth <= t && t < p.death).count()
    }

    /// `dim,birth,death` CSV with `inf` for classes that never die.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.pairs {
            let _ = writeln!(out, "{},{},{}", p.dim, fmt_value(p.birth), fmt_value(p.death));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "dim,birth,death" => {}
            other => return Err(Error::Format(format!("bad diagram header {other:?}"))),
        }
        let mut pairs = Vec::new();
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [dim, birth, death] = fields[..] else {
                return Err(Error::Format(format!("line {}: expected 3 fields", lineno + 2)));
            };
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 2)))
            };
            let dim = dim
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad dimension {dim:?}", lineno + 2)))?;
            pairs.push(PersistencePair::new(dim, parse(birth)?, parse(death)?));
        }
        let max_dim = pairs.iter().map(|p| p.dim).max().unwrap_or(0);
        let n_points = pairs.iter().filter(|p| p.dim == 0).count();
        Ok(Self {
            pairs,
            n_points,
            ambient_dim: 0,
            max_dim,
        })
    }

    /// `{"pairs":[{"dim":0,"birth":0.0,"death":1.5},...]}`; infinite deaths
    /// are written as `null`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

fn fmt_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}
