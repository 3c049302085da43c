//! Serializable summary of a fitted posterior.
//!
//! A particle is stored as its cut tree plus, per leaf, the constraint path
//! and label counts. Member indices are dropped: routing a query only needs
//! the tree, and predictions only need the counts.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SmspError};
use crate::geometry::Point;
use crate::inference::{Hyperparams, Posterior};
use crate::partition::{CutTree, PathStep};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafSummary {
    pub path: Vec<PathStep>,
    pub counts: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedParticle {
    /// Normalized weight.
    pub weight: f64,
    pub elapsed: f64,
    pub tree: CutTree,
    pub leaves: Vec<LeafSummary>,
}

impl FittedParticle {
    pub fn leaf_of(&self, p: Point) -> &LeafSummary {
        &self.leaves[self.tree.route(p)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub n_labels: usize,
    pub alpha: Hyperparams,
    /// `None` for an unbounded budget.
    pub budget: Option<f64>,
    pub particles: Vec<FittedParticle>,
}

impl Posterior {
    pub fn to_model(&self) -> FittedModel {
        let weights = self.weights();
        let particles = self
            .particles
            .iter()
            .zip(weights)
            .map(|(p, weight)| FittedParticle {
                weight,
                elapsed: p.state.elapsed,
                tree: p.state.tree.clone(),
                leaves: p
                    .state
                    .leaves
                    .iter()
                    .map(|l| LeafSummary {
                        path: l.constraint_path.clone(),
                        counts: l.counts.clone(),
                    })
                    .collect(),
            })
            .collect();
        FittedModel {
            n_labels: self.n_labels,
            alpha: self.alpha.clone(),
            budget: self.budget.is_finite().then_some(self.budget),
            particles,
        }
    }
}

impl FittedModel {
    pub fn budget(&self) -> f64 {
        self.budget.unwrap_or(f64::INFINITY)
    }

    /// Highest-weight particle; lowest index on ties.
    pub fn best(&self) -> &FittedParticle {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.weight > self.particles[best].weight {
                best = i;
            }
        }
        &self.particles[best]
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(SmspError::EmptyInput("model has no particles"));
        }
        if self.alpha.len() != self.n_labels {
            return Err(SmspError::DimensionMismatch(format!(
                "{} alpha entries for {} labels",
                self.alpha.len(),
                self.n_labels
            )));
        }
        for (i, p) in self.particles.iter().enumerate() {
            let bad = p.leaves.iter().any(|l| l.counts.len() != self.n_labels);
            let n_leaves = p.tree.len() + 1;
            if bad || p.leaves.len() != n_leaves {
                return Err(SmspError::CountMismatch(format!("particle {i} has inconsistent leaves")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer(out, self)?;
        Ok(())
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let model: FittedModel = serde_json::from_reader(input)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| SmspError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| SmspError::io(path, e))?;
        Self::read(std::io::BufReader::new(f))
    }

    /// SHA-256 of the serialized model, hex encoded.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(&self.to_json()?))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
